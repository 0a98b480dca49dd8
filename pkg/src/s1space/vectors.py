"""Finitely supported vectors on the dyadic tree and their S^p norms."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Union

import numpy as np

from .errors import DepthExceeded
from .tree import ROOT, Node, downward_closure, first_comparable_pair, format_nodes

TOL = 1e-9
BRUTE_MAX_DEPTH = 4


class TreeVector:
    """x = Σ x(s) e_s with finite support; zero coordinates are never stored.

    Coordinates may be floats or exact rationals (``fractions.Fraction``);
    arithmetic keeps whatever numeric type it is given.
    """

    __slots__ = ("_coords",)

    def __init__(self, coords: Mapping[Node, object] | Iterable = ()):
        items = coords.items() if isinstance(coords, Mapping) else coords
        self._coords = {s: v for s, v in items if v != 0}

    @classmethod
    def basis(cls, s: Node, value=1.0) -> TreeVector:
        return cls({s: value})

    @classmethod
    def from_literals(cls, mapping: Mapping[str, float]) -> TreeVector:
        return cls({Node.parse(k): v for k, v in mapping.items()})

    @property
    def coords(self) -> dict[Node, object]:
        return dict(self._coords)

    @property
    def support(self) -> frozenset[Node]:
        return frozenset(self._coords)

    @property
    def depth(self) -> int:
        return max((s.length for s in self._coords), default=0)

    def __getitem__(self, s: Node):
        return self._coords.get(s, 0)

    def __contains__(self, s):
        return s in self._coords

    def __iter__(self) -> Iterator[Node]:
        return iter(sorted(self._coords))

    def items(self):
        return sorted(self._coords.items())

    def __len__(self):
        return len(self._coords)

    def __bool__(self):
        return bool(self._coords)

    def __eq__(self, other):
        if not isinstance(other, TreeVector):
            return NotImplemented
        return self._coords == other._coords

    __hash__ = None

    def __add__(self, other: TreeVector) -> TreeVector:
        out = dict(self._coords)
        for s, v in other._coords.items():
            out[s] = out.get(s, 0) + v
        return TreeVector(out)

    def __neg__(self):
        return TreeVector({s: -v for s, v in self._coords.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, a):
        return TreeVector({s: a * v for s, v in self._coords.items()})

    __rmul__ = __mul__

    def map_values(self, f: Callable) -> TreeVector:
        return TreeVector({s: f(v) for s, v in self._coords.items()})

    def __repr__(self):
        body = ", ".join(f"{s}: {v!r}" for s, v in self.items())
        return f"TreeVector({{{body}}})"


def combine(terms: Iterable[tuple[object, TreeVector]]) -> TreeVector:
    """Σ a_i x_i."""
    out: dict[Node, object] = {}
    for a, x in terms:
        for s, v in x._coords.items():
            out[s] = out.get(s, 0) + a * v
    return TreeVector(out)


@dataclass(frozen=True)
class NormCertificate:
    value: float
    p: float
    witness: frozenset[Node]

    def __str__(self):
        return f"{self.value:.12g} witness {format_nodes(self.witness)}"


def _abs_pow(v, p):
    return abs(v) if p == 1 else abs(float(v)) ** p


def norm_sp(x: TreeVector, p: float = 1) -> NormCertificate:
    """Exact S^p norm sup_A (Σ_{s∈A} |x(s)|^p)^{1/p} with a witness antichain.

    Runs g(s) = max(|x(s)|^p, g(s0) + g(s1)) over the downward closure of
    the support; on ties the single node s is preferred.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if not x:
        return NormCertificate(0.0, p, frozenset())
    closure = downward_closure(x.support)
    g: dict[Node, object] = {}
    single: dict[Node, bool] = {}
    for s in sorted(closure, key=lambda n: (-n.length, n.bits)):
        own = _abs_pow(x[s], p)
        kids = sum((g[c] for c in s.children() if c in g), 0)
        if own != 0 and own >= kids:
            g[s], single[s] = own, True
        else:
            g[s], single[s] = kids, False
    witness = set()
    stack = [ROOT]
    while stack:
        s = stack.pop()
        if single[s]:
            witness.add(s)
        else:
            stack.extend(c for c in s.children() if c in g and g[c] != 0)
    top = g[ROOT]
    value = top if p == 1 else float(top) ** (1.0 / p)
    return NormCertificate(value, p, frozenset(witness))


def norm(x: TreeVector, p: float = 1):
    return norm_sp(x, p).value


def brute_norm(x: TreeVector, p: float = 1) -> float:
    """Oracle: enumerate every antichain of the support's downward closure.

    Each entry of the per-node array is the p-sum of one antichain of that
    subtree: {s} alone, or one antichain from each child subtree combined.
    """
    if x.depth > BRUTE_MAX_DEPTH:
        raise DepthExceeded(f"brute_norm needs depth <= {BRUTE_MAX_DEPTH}, got {x.depth}")
    if not x:
        return 0.0
    closure = downward_closure(x.support)

    def sums(s: Node) -> np.ndarray:
        kids = [sums(c) for c in s.children() if c in closure]
        below = np.zeros(1)  # the empty antichain
        for arr in kids:
            below = np.add.outer(below, arr).ravel()
        return np.concatenate(([abs(float(x[s])) ** p], below))

    best = float(sums(ROOT).max())
    return best ** (1.0 / p)


NodeSet = Union[Callable[[Node], bool], Iterable[Node]]


def _as_predicate(D: NodeSet) -> Callable[[Node], bool]:
    if callable(D):
        return D
    members = frozenset(D)
    return members.__contains__


def restrict(x: TreeVector, D: NodeSet) -> TreeVector:
    """x|D: keep coordinates on D, zero elsewhere."""
    keep = _as_predicate(D)
    return TreeVector({s: v for s, v in x.items() if keep(s)})


@dataclass(frozen=True)
class SignedFunctional:
    """Σ_{t∈A} ε_t e_t^* with A an antichain, so its dual S^1 norm is <= 1."""

    terms: Mapping[Node, int]

    def __post_init__(self):
        terms = dict(self.terms)
        if any(v not in (-1, 1) for v in terms.values()):
            raise ValueError("functional signs must be ±1")
        pair = first_comparable_pair(terms)
        if pair is not None:
            raise ValueError(f"functional support is not an antichain: {pair[0]} vs {pair[1]}")
        object.__setattr__(self, "terms", terms)

    @property
    def support(self) -> frozenset[Node]:
        return frozenset(self.terms)

    def __call__(self, x: TreeVector):
        return eval_functional(self, x)

    @classmethod
    def norming(cls, x: TreeVector) -> SignedFunctional:
        """Signs of x on its S^1 witness antichain; attains norm_sp(x, 1)."""
        w = norm_sp(x, 1).witness
        return cls({t: (1 if x[t] > 0 else -1) for t in w})


def eval_functional(f: SignedFunctional, x: TreeVector):
    return sum((sgn * x[t] for t, sgn in f.terms.items()), 0)
