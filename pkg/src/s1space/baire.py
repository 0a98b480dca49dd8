"""Baire-1 elements of the bidual: a finite vector plus constant-coefficient branch tails.

A branch tail (σ, d, a) stands for the weak-star limit of Σ_{k=d}^{n} a·e_{σ|k},
so the element's coordinate at s is ``finite(s) + Σ a_i`` over the tails whose
branch passes through s at a depth >= their start.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable

from .tree import ROOT, Node, downward_closure
from .vectors import TreeVector, norm_sp

MAX_PERIOD = 8


def _primitive_root(w: str) -> str:
    n = len(w)
    for k in range(1, n + 1):
        if n % k == 0 and w[:k] * (n // k) == w:
            return w[:k]
    return w


@dataclass(frozen=True)
class BranchSpec:
    """An eventually periodic point stem⌢period^∞ of the Cantor set.

    Canonical form: the period is primitive and the stem is as short as
    possible, so two specs are equal iff they name the same point.
    """

    stem: Node
    period: str

    def __post_init__(self):
        w = self.period
        if not w or len(w) > MAX_PERIOD or any(ch not in "01" for ch in w):
            raise ValueError(f"period must be a word of length 1..{MAX_PERIOD} over 01, got {w!r}")
        w = _primitive_root(w)
        stem = self.stem
        while stem.length and str(stem)[-1] == w[-1]:
            w = w[-1] + w[:-1]
            stem = stem.parent
        object.__setattr__(self, "stem", stem)
        object.__setattr__(self, "period", w)

    @classmethod
    def parse(cls, stem: str, cont: str) -> BranchSpec:
        return cls(Node.parse(stem), parse_continuation(cont))

    @property
    def continuation(self) -> str:
        if self.period in ("0", "1"):
            return self.period + "*"
        return f"({self.period})*"

    def __str__(self):
        return f"{self.stem} {self.continuation}"

    def __lt__(self, other):
        return (self.stem.rank, self.period) < (other.stem.rank, other.period)

    def bit(self, k: int) -> int:
        if k < self.stem.length:
            return self.stem.bit(k)
        return int(self.period[(k - self.stem.length) % len(self.period)])

    def prefix(self, n: int) -> Node:
        """σ|n."""
        if n <= self.stem.length:
            return self.stem.prefix(n)
        rest = n - self.stem.length
        reps = self.period * (rest // len(self.period) + 1)
        return self.stem.extend(reps[:rest])

    def passes_through(self, s: Node) -> bool:
        return self.prefix(s.length) == s

    def in_clopen(self, base: Iterable[Node]) -> bool:
        return any(self.passes_through(t) for t in base)

    def split_depth(self, other: BranchSpec) -> int:
        """Length of the longest common initial segment of two distinct points."""
        if self == other:
            raise ValueError("identical branches never split")
        bound = max(self.stem.length, other.stem.length) + len(self.period) * len(other.period)
        for k in range(bound + 1):
            if self.bit(k) != other.bit(k):
                return k
        raise AssertionError("distinct canonical branches agree past their joint period")


def parse_continuation(cont: str) -> str:
    if cont in ("0*", "1*"):
        return cont[0]
    if cont.startswith("(") and cont.endswith(")*") and len(cont) > 3:
        w = cont[1:-2]
        if all(ch in "01" for ch in w):
            return w
    raise ValueError(f"bad continuation {cont!r}; expected 0*, 1* or (w)*")


@dataclass(frozen=True)
class BranchTail:
    branch: BranchSpec
    start_depth: int
    coef: float

    def __post_init__(self):
        if self.start_depth < 0:
            raise ValueError("start_depth must be >= 0")
        if self.coef == 0:
            raise ValueError("tail coefficient must be nonzero")

    def covers(self, s: Node) -> bool:
        return s.length >= self.start_depth and self.branch.passes_through(s)


def _merge_tails(finite: TreeVector, tails: Iterable[BranchTail]):
    """Merge tails on the same branch; differences in start depth move into the finite part."""
    groups: dict[BranchSpec, list[BranchTail]] = {}
    for t in tails:
        groups.setdefault(t.branch, []).append(t)
    extra: dict[Node, object] = {}
    merged = []
    for branch in sorted(groups):
        group = groups[branch]
        top = max(t.start_depth for t in group)
        coef = 0
        for t in group:
            coef += t.coef
            for k in range(t.start_depth, top):
                s = branch.prefix(k)
                extra[s] = extra.get(s, 0) + t.coef
        if coef != 0:
            merged.append(BranchTail(branch, top, coef))
    return finite + TreeVector(extra), tuple(merged)


@dataclass(frozen=True)
class BaireOneElement:
    finite_part: TreeVector = field(default_factory=TreeVector)
    tails: tuple[BranchTail, ...] = ()

    def __post_init__(self):
        finite, tails = _merge_tails(self.finite_part, self.tails)
        object.__setattr__(self, "finite_part", finite)
        object.__setattr__(self, "tails", tails)

    __hash__ = None

    @property
    def branches(self) -> list[BranchSpec]:
        return [t.branch for t in self.tails]

    def __add__(self, other: BaireOneElement) -> BaireOneElement:
        return BaireOneElement(self.finite_part + other.finite_part, self.tails + other.tails)

    def __mul__(self, a) -> BaireOneElement:
        if a == 0:
            return BaireOneElement()
        return BaireOneElement(
            self.finite_part * a,
            tuple(BranchTail(t.branch, t.start_depth, a * t.coef) for t in self.tails),
        )

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    @property
    def reduction_depth(self) -> int:
        """D* = 1 + max(finite depth, start depths, pairwise splitting depths)."""
        parts = [self.finite_part.depth]
        parts += [t.start_depth for t in self.tails]
        parts += [a.split_depth(b) for a, b in combinations(self.branches, 2)]
        return 1 + max(parts)

    def validate(self, extra: int = 3) -> None:
        """Partial-sum norms are nondecreasing and constant from D* on."""
        dstar = self.reduction_depth
        prev = -1.0
        for n in range(dstar + extra + 1):
            v = norm_sp(partial_sum(self, n), 1).value
            if v < prev - 1e-9:
                raise ValueError(f"partial-sum norms decrease at n={n}")
            if n >= dstar and abs(v - b1_norm(self)) > 1e-9:
                raise ValueError(f"partial-sum norm has not stabilized at n={n} >= D*")
            prev = v

    def __repr__(self):
        return f"BaireOneElement({self.finite_part!r}, tails={list(self.tails)!r})"


def coordinate(x: BaireOneElement, s: Node):
    return x.finite_part[s] + sum((t.coef for t in x.tails if t.covers(s)), 0)


def partial_sum(x: BaireOneElement, n: int) -> TreeVector:
    """Coordinates at depth <= n as a finite vector."""
    if n < 0:
        raise ValueError("n must be >= 0")
    out = {s: v for s, v in x.finite_part.items() if s.length <= n}
    for t in x.tails:
        for k in range(t.start_depth, n + 1):
            s = t.branch.prefix(k)
            out[s] = out.get(s, 0) + t.coef
    return TreeVector(out)


def b1_norm(x: BaireOneElement) -> float:
    """sup over antichains of Σ|x(s)|, reduced to a finite tree of depth D*.

    Below depth D* each tail's branch is alone in its subtree and carries the
    constant coefficient, so the best antichain there is one node of the branch.
    """
    if not x.tails:
        return norm_sp(x.finite_part, 1).value
    dstar = x.reduction_depth
    leaf_value = {t.branch.prefix(dstar): abs(t.coef) for t in x.tails}
    coords = partial_sum(x, dstar - 1)
    closure = downward_closure(set(coords.support) | set(leaf_value))
    g: dict[Node, object] = {}
    for s in sorted(closure, key=lambda n: (-n.length, n.bits)):
        if s.length == dstar:
            g[s] = leaf_value.get(s, 0)
            continue
        kids = sum((g[c] for c in s.children() if c in g), 0)
        g[s] = max(abs(coords[s]), kids)
    return g[ROOT]


def restrict_to_tails(x: BaireOneElement, antichain: Iterable[Node], m: int) -> BaireOneElement:
    """x|∪_{t∈A} T_t^m, again a representable element."""
    A = list(antichain)
    finite = {
        s: v for s, v in x.finite_part.items()
        if s.length >= m and any(t.is_prefix_of(s) for t in A)
    }
    tails = []
    for tail in x.tails:
        for t in A:
            if tail.branch.passes_through(t):
                start = max(tail.start_depth, m, t.length)
                tails.append(BranchTail(tail.branch, start, tail.coef))
    return BaireOneElement(TreeVector(finite), tuple(tails))


def tail_norm(x: BaireOneElement, t: Node, m: int) -> float:
    """‖x|T_t^m‖ with T_t^m = {s : t ⊑ s, |s| >= m}."""
    if m < 0:
        raise ValueError("m must be >= 0")
    return b1_norm(restrict_to_tails(x, [t], m))


def distance_to_s1(x: BaireOneElement) -> float:
    """inf_{y∈S^1} ‖x - y‖, which for this class is Σ|coef|."""
    return sum((abs(t.coef) for t in x.tails), 0)


def chain_element(branch: BranchSpec, coef: float = 1.0, start: int = 0) -> BaireOneElement:
    """w*-lim Σ_{k>=start} coef·e_{σ|k}."""
    return BaireOneElement(TreeVector(), (BranchTail(branch, start, coef),))
