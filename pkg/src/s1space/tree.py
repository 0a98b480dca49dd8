"""Nodes of the dyadic tree, antichains, subtree maps and clopen subsets of 2^N.

A node is a finite binary word stored as ``(length, bits)`` with the first
letter in the most significant position, so prefix tests are a shift and a
compare and the natural (level, then lexicographic) rank is
``2**length - 1 + bits``.
"""
from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field
from functools import total_ordering
from itertools import combinations
from typing import Iterable, Iterator, Mapping

MAX_DEPTH = 62


def max_depth() -> int:
    """MAX_DEPTH, lowered (never raised) by the ``S1_MAX_DEPTH`` variable."""
    env = os.environ.get("S1_MAX_DEPTH")
    if env:
        try:
            return max(0, min(MAX_DEPTH, int(env)))
        except ValueError:
            pass
    return MAX_DEPTH


@total_ordering
@dataclass(frozen=True)
class Node:
    length: int
    bits: int = 0

    def __post_init__(self):
        if not 0 <= self.length <= MAX_DEPTH:
            raise ValueError(f"node length {self.length} outside 0..{MAX_DEPTH}")
        if not 0 <= self.bits < (1 << self.length):
            raise ValueError("bits do not fit the node length")

    @classmethod
    def parse(cls, literal: str) -> Node:
        if literal == "e":
            return ROOT
        if not literal or any(ch not in "01" for ch in literal):
            raise ValueError(f"bad node literal {literal!r}")
        if len(literal) > max_depth():
            raise ValueError(f"node {literal!r} deeper than MAX_DEPTH={max_depth()}")
        return cls(len(literal), int(literal, 2))

    @classmethod
    def from_word(cls, word: Iterable[int]) -> Node:
        bits = length = 0
        for b in word:
            bits = (bits << 1) | (1 if b else 0)
            length += 1
        return cls(length, bits)

    @classmethod
    def from_rank(cls, rank: int) -> Node:
        length = (rank + 1).bit_length() - 1
        return cls(length, rank + 1 - (1 << length))

    def __str__(self):
        if self.length == 0:
            return "e"
        return format(self.bits, f"0{self.length}b")

    def __repr__(self):
        return f"Node({str(self)!r})"

    def __len__(self):
        return self.length

    def __lt__(self, other):
        if not isinstance(other, Node):
            return NotImplemented
        return self.rank < other.rank

    @property
    def rank(self) -> int:
        return (1 << self.length) - 1 + self.bits

    @property
    def word(self) -> str:
        return "" if self.length == 0 else str(self)

    def bit(self, k: int) -> int:
        """Letter at 0-based position k."""
        return (self.bits >> (self.length - 1 - k)) & 1

    def child(self, b: int) -> Node:
        return Node(self.length + 1, (self.bits << 1) | b)

    def children(self) -> tuple[Node, Node]:
        return self.child(0), self.child(1)

    @property
    def parent(self) -> Node:
        if self.length == 0:
            raise ValueError("the root has no parent")
        return Node(self.length - 1, self.bits >> 1)

    def prefix(self, m: int) -> Node:
        """s|m."""
        if not 0 <= m <= self.length:
            raise ValueError("prefix length out of range")
        return Node(m, self.bits >> (self.length - m))

    def extend(self, word: str) -> Node:
        out = self
        for ch in word:
            out = out.child(int(ch))
        return out

    def is_prefix_of(self, other: Node) -> bool:
        """self ⊑ other."""
        return self.length <= other.length and (
            other.bits >> (other.length - self.length)
        ) == self.bits

    def incomparable(self, other: Node) -> bool:
        return not (self.is_prefix_of(other) or other.is_prefix_of(self))

    def meet(self, other: Node) -> Node:
        """Longest common prefix s ∧ t."""
        m = min(self.length, other.length)
        a = self.bits >> (self.length - m)
        b = other.bits >> (other.length - m)
        diff = a ^ b
        common = m - diff.bit_length()
        return Node(common, a >> (m - common))

    def lex_less(self, other: Node) -> bool:
        """Strict lexicographic order: prefixes first, else the 0-side of the split."""
        if self == other:
            return False
        if self.is_prefix_of(other):
            return True
        if other.is_prefix_of(self):
            return False
        w = self.meet(other)
        return self.bit(w.length) == 0

    def ancestors(self) -> Iterator[Node]:
        """Proper prefixes, root first."""
        for m in range(self.length):
            yield self.prefix(m)

    def path(self) -> tuple[Node, ...]:
        """The initial segment I(s) as a root-to-s path."""
        return tuple(self.prefix(m) for m in range(self.length + 1))

    def descendants_at(self, level: int) -> Iterator[Node]:
        """Nodes at ``level`` extending self, in lexicographic order."""
        if level < self.length:
            return
        k = level - self.length
        base = self.bits << k
        for j in range(1 << k):
            yield Node(level, base | j)


ROOT = Node(0, 0)


def level(n: int) -> Iterator[Node]:
    for j in range(1 << n):
        yield Node(n, j)


def nodes_upto(n: int) -> Iterator[Node]:
    """All of 2^{<=n} in natural order."""
    for k in range(n + 1):
        yield from level(k)


def natural_rank(s: Node) -> int:
    return s.rank


class Relation(enum.Enum):
    EQUAL = "equal"
    PREFIX = "s⊑t"
    EXTENSION = "t⊑s"
    INCOMPARABLE = "incomparable"


def classify_pair(s: Node, t: Node) -> tuple[Relation, Node]:
    if s == t:
        rel = Relation.EQUAL
    elif s.is_prefix_of(t):
        rel = Relation.PREFIX
    elif t.is_prefix_of(s):
        rel = Relation.EXTENSION
    else:
        rel = Relation.INCOMPARABLE
    return rel, s.meet(t)


def is_antichain(nodes: Iterable[Node]) -> bool:
    ns = sorted(set(nodes))
    # a comparable pair always shows up as a prefix of some later node
    seen = set(ns)
    for t in ns:
        for a in t.ancestors():
            if a in seen:
                return False
    return True


def first_comparable_pair(nodes: Iterable[Node]):
    ns = sorted(set(nodes))
    for a, b in combinations(ns, 2):
        if not a.incomparable(b):
            return a, b
    return None


def sets_incomparable(a: Iterable[Node], b: Iterable[Node]) -> bool:
    """A ⊥ B."""
    bs = list(b)
    return all(s.incomparable(t) for s in a for t in bs)


def is_maximal_antichain(nodes: Iterable[Node], n: int) -> bool:
    """Maximal in 2^{<=n}: every leaf-level node has exactly one prefix in the set."""
    ns = set(nodes)
    if any(s.length > n for s in ns) or not is_antichain(ns):
        return False
    for leaf in level(n):
        hits = sum(1 for s in leaf.path() if s in ns)
        if hits != 1:
            return False
    return True


def downward_closure(nodes: Iterable[Node]) -> set[Node]:
    out: set[Node] = set()
    for s in nodes:
        while s not in out:
            out.add(s)
            if s.length == 0:
                break
            s = s.parent
    return out


def format_nodes(nodes: Iterable[Node]) -> str:
    return "{" + ",".join(str(s) for s in sorted(nodes)) + "}"


def parse_nodes(text: str) -> frozenset[Node]:
    text = text.strip()
    if not (text.startswith("{") and text.endswith("}")):
        raise ValueError(f"expected a braced node set, got {text!r}")
    body = text[1:-1].strip()
    if not body:
        return frozenset()
    return frozenset(Node.parse(tok.strip()) for tok in body.split(","))


# ---------------------------------------------------------------- subtrees


class SubtreeStatus(enum.Enum):
    VALID_REGULAR = "valid_regular"
    VALID_DYADIC = "valid_dyadic"
    INVALID = "invalid"


@dataclass(frozen=True)
class SubtreeCheck:
    status: SubtreeStatus
    reason: str = ""
    pair: tuple[Node, Node] | None = None

    @property
    def valid(self) -> bool:
        return self.status is not SubtreeStatus.INVALID


@dataclass(frozen=True)
class SubtreeMap:
    """A finite piece (t_s)_{|s|<=d} of a dyadic subtree."""

    entries: Mapping[Node, Node]

    @property
    def depth(self) -> int:
        return max((s.length for s in self.entries), default=0)

    def __getitem__(self, s: Node) -> Node:
        return self.entries[s]

    def __iter__(self):
        return iter(sorted(self.entries))

    def __len__(self):
        return len(self.entries)

    def images(self) -> set[Node]:
        return set(self.entries.values())

    @property
    def regular(self) -> bool:
        return validate_subtree(self).status is SubtreeStatus.VALID_REGULAR

    def compose(self, inner: SubtreeMap) -> SubtreeMap:
        """s ↦ self[inner[s]]; defined where inner's images are indices of self."""
        return SubtreeMap({s: self.entries[t] for s, t in inner.entries.items()})

    def level_depths(self) -> list[int | None]:
        out = []
        for n in range(self.depth + 1):
            depths = {self.entries[s].length for s in level(n)}
            out.append(depths.pop() if len(depths) == 1 else None)
        return out


def validate_subtree(m: SubtreeMap) -> SubtreeCheck:
    d = m.depth
    for s in nodes_upto(d):
        if s not in m.entries:
            return SubtreeCheck(SubtreeStatus.INVALID, f"index {s} missing")
    idx = sorted(m.entries)
    for a, b in combinations(idx, 2):
        ta, tb = m.entries[a], m.entries[b]
        if ta == tb:
            return SubtreeCheck(SubtreeStatus.INVALID, f"{a} and {b} share image {ta}", (a, b))
        for x, y, tx, ty in ((a, b, ta, tb), (b, a, tb, ta)):
            if x.is_prefix_of(y) != tx.is_prefix_of(ty):
                return SubtreeCheck(
                    SubtreeStatus.INVALID,
                    f"prefix order not preserved: {x} ⊑ {y} is {x.is_prefix_of(y)} "
                    f"but {tx} ⊑ {ty} is {tx.is_prefix_of(ty)}",
                    (a, b),
                )
            if x.lex_less(y) != tx.lex_less(ty):
                return SubtreeCheck(
                    SubtreeStatus.INVALID,
                    f"lexicographic order not preserved for {x}, {y}",
                    (a, b),
                )
    if all(depth is not None for depth in m.level_depths()):
        return SubtreeCheck(SubtreeStatus.VALID_REGULAR)
    return SubtreeCheck(SubtreeStatus.VALID_DYADIC)


# ---------------------------------------------------------------- clopen sets


def _canonical_base(ts: Iterable[Node]) -> frozenset[Node]:
    base = set(ts)
    base = {t for t in base if not any(a in base for a in t.ancestors())}
    changed = True
    while changed:
        changed = False
        for t in sorted(base, key=lambda s: -s.length):
            if t.length == 0 or t not in base:
                continue
            sib = Node(t.length, t.bits ^ 1)
            if sib in base:
                base.discard(t)
                base.discard(sib)
                base.add(t.parent)
                changed = True
    return frozenset(base)


@dataclass(frozen=True)
class ClopenSet:
    """Finite union of basic sets V_t, stored by its sibling-free antichain base."""

    base: frozenset[Node] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "base", _canonical_base(self.base))

    @classmethod
    def whole(cls) -> ClopenSet:
        return cls(frozenset({ROOT}))

    @property
    def depth(self) -> int:
        return max((t.length for t in self.base), default=0)

    def is_empty(self) -> bool:
        return not self.base

    def contains_node(self, s: Node) -> bool:
        """V_s ⊆ self."""
        return any(t.is_prefix_of(s) for t in self.base)

    def leaves(self, n: int) -> set[Node]:
        """The level-n nodes s with V_s ⊆ self (n >= depth)."""
        out = set()
        for t in self.base:
            out.update(t.descendants_at(n))
        return out

    def __or__(self, other):
        return clopen_algebra(self, other, "union")

    def __and__(self, other):
        return clopen_algebra(self, other, "intersect")

    def __invert__(self):
        return clopen_algebra(self, None, "complement_of_first")

    def __str__(self):
        return format_nodes(self.base)


def clopen_normalize(ts: Iterable[Node]) -> ClopenSet:
    return ClopenSet(frozenset(ts))


def clopen_algebra(a: ClopenSet, b: ClopenSet | None, op: str) -> ClopenSet:
    if op == "union":
        return ClopenSet(a.base | b.base)
    if op == "intersect":
        out = set()
        for s in a.base:
            for t in b.base:
                if s.is_prefix_of(t):
                    out.add(t)
                elif t.is_prefix_of(s):
                    out.add(s)
        return ClopenSet(frozenset(out))
    if op == "complement_of_first":
        n = a.depth
        return ClopenSet(frozenset(set(level(n)) - a.leaves(n)))
    raise ValueError(f"unknown clopen operation {op!r}")
