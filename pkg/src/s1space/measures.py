"""Atomic measures on the Cantor set and the measure µ attached to a Baire-1 element."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping

from .baire import BaireOneElement, BranchSpec, coordinate, restrict_to_tails, b1_norm, tail_norm
from .errors import NotSingular, VerificationError
from .tree import ClopenSet, Node, downward_closure

TOL = 1e-9


@dataclass(frozen=True)
class AtomicMeasure:
    """Σ m_i δ_{σ_i} with eventually periodic atoms σ_i; masses may be signed."""

    atoms: Mapping[BranchSpec, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "atoms", {b: m for b, m in self.atoms.items() if m != 0})

    __hash__ = None

    def __eq__(self, other):
        if not isinstance(other, AtomicMeasure):
            return NotImplemented
        return self.atoms == other.atoms

    def items(self):
        return sorted(self.atoms.items())

    @property
    def total_mass(self):
        return sum(self.atoms.values(), 0)

    @property
    def positive(self) -> bool:
        return all(m > 0 for m in self.atoms.values())

    def __add__(self, other: AtomicMeasure) -> AtomicMeasure:
        out = dict(self.atoms)
        for b, m in other.atoms.items():
            out[b] = out.get(b, 0) + m
        return AtomicMeasure(out)

    def __mul__(self, a):
        return AtomicMeasure({b: a * m for b, m in self.atoms.items()})

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def __call__(self, c: ClopenSet):
        return measure_clopen(self, c)


def measure_of(x: BaireOneElement, check: bool = True) -> AtomicMeasure:
    """µ_x = Σ |coef_i| δ_{branch_i}.

    With ``check`` the closed form is compared against the definition
    µ(V_t) = inf_m ‖x|T_t^m‖ at every node t of depth <= D*+1 that lies on,
    or branches off, some tail's branch. All other nodes of that depth carry
    neither atoms nor nonzero coordinates deeper than D*, so both sides are 0
    there without computation.
    """
    mu = AtomicMeasure({t.branch: abs(t.coef) for t in x.tails})
    if check and x.tails:
        dstar = x.reduction_depth
        m = dstar + 1
        nodes = set()
        for t in x.tails:
            for k in range(dstar + 2):
                s = t.branch.prefix(k)
                nodes.add(s)
                if k < dstar + 1:
                    nodes.update(s.children())
        for s in nodes:
            expected = tail_norm(x, s, max(m, s.length))
            got = measure_clopen(mu, ClopenSet(frozenset({s})))
            if abs(expected - got) > TOL:
                raise VerificationError(
                    f"closed-form measure disagrees with definition at V_{s}: {got} vs {expected}"
                )
    return mu


def measure_clopen(m: AtomicMeasure, c: ClopenSet):
    return sum((mass for b, mass in m.atoms.items() if b.in_clopen(c.base)), 0)


def measure_norm(m: AtomicMeasure):
    """sup_B |m(B)| = max(positive mass, negative mass)."""
    pos = sum((v for v in m.atoms.values() if v > 0), 0)
    neg = -sum((v for v in m.atoms.values() if v < 0), 0)
    return max(pos, neg)


def measure_distance(m1: AtomicMeasure, m2: AtomicMeasure):
    return measure_norm(m1 - m2)


def stabilized_restriction_norm(x: BaireOneElement, antichain: Iterable[Node]) -> float:
    """inf_m ‖x|∪_{t∈A} T_t^m‖, attained at m = D*+1 for this class."""
    A = list(antichain)
    m = max([x.reduction_depth + 1] + [t.length for t in A])
    return b1_norm(restrict_to_tails(x, A, m))


def _relevant_nodes(x: BaireOneElement, depth: int) -> set[Node]:
    """Nodes of depth <= ``depth`` with a nonzero coordinate or an atom somewhere below."""
    marks = set(x.finite_part.support)
    for t in x.tails:
        marks.add(t.branch.prefix(depth))
    return {s for s in downward_closure(marks) if s.length <= depth}


def ldom_threshold(x: BaireOneElement, eps: float) -> int:
    """Least n such that every finite antichain A with min level >= n has
    Σ_{s∈A} |x(s)| < µ_x(∪ V_s) + eps.

    For each node, h(s) is the largest value of Σ_{a∈A}(|x(a)| - µ(V_a)) over
    antichains A below s (the empty antichain gives 0). At depth D* and below
    every node lies on at most one branch carrying its own mass, so h = 0.
    The worst antichain with min level >= n is then Σ_{|s|=n} h(s).
    """
    if eps <= 0:
        raise ValueError("eps must be > 0")
    mu = measure_of(x, check=False)
    dstar = x.reduction_depth
    nodes = _relevant_nodes(x, dstar)
    h: dict[Node, float] = {}
    for s in sorted(nodes, key=lambda n: (-n.length, n.bits)):
        if s.length >= dstar:
            h[s] = 0.0
            continue
        own = abs(coordinate(x, s)) - measure_clopen(mu, ClopenSet(frozenset({s})))
        kids = sum((h[c] for c in s.children() if c in h), 0.0)
        h[s] = max(0.0, own, kids)
    for n in range(dstar + 2):
        worst = sum((v for s, v in h.items() if s.length == n), 0.0)
        if worst < eps:
            return n
    return dstar + 1


def singular_separation(ms: list[AtomicMeasure], eps: float) -> list[ClopenSet]:
    """Pairwise disjoint clopen sets O_i with m_i(2^N \\ O_i) < eps.

    Each atom σ of m_i gets V_{σ|k} with k one past its longest common
    prefix with any atom of another measure, so the complement mass is 0.
    """
    if eps <= 0:
        raise ValueError("eps must be > 0")
    for i, m in enumerate(ms):
        if not m.positive:
            raise ValueError(f"measure {i} is not positive")
    for i, j in combinations(range(len(ms)), 2):
        shared = set(ms[i].atoms) & set(ms[j].atoms)
        if shared:
            b = sorted(shared)[0]
            raise NotSingular(f"measures {i} and {j} share the atom {b}")
    out = []
    for i, m in enumerate(ms):
        others = [b for j, mj in enumerate(ms) if j != i for b in mj.atoms]
        base = set()
        for b in m.atoms:
            k = max((b.split_depth(o) + 1 for o in others), default=0)
            base.add(b.prefix(k))
        out.append(ClopenSet(frozenset(base)))
    for a, b in combinations(out, 2):
        if not (a & b).is_empty():
            raise VerificationError("separating sets are not disjoint")
    for m, o in zip(ms, out):
        if m.total_mass - measure_clopen(m, o) >= eps:
            raise VerificationError("separating set misses too much mass")
    return out


def is_singular_family(ms: list[AtomicMeasure]) -> bool:
    return all(
        not (set(ms[i].atoms) & set(ms[j].atoms)) for i, j in combinations(range(len(ms)), 2)
    )
