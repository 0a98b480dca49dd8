"""Maximal antichains with branch assignments dominating a weighted node sum.

Given nonnegative (λ_s), (α_s) on 2^{<=n}, :func:`decompose` produces a
maximal antichain A and branches b_t ∋ t with

    Σ_{|s|<=n} λ_s α_s  <=  Σ_{t∈A} λ_t · Σ_{s∈b_t} α_s.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Mapping

from .errors import DepthExceeded, HypothesisViolated, VerificationError
from .tree import ROOT, Node, format_nodes, is_maximal_antichain, level, nodes_upto

TOL = 1e-9
BRUTE_MAX_DEPTH = 3


@dataclass(frozen=True)
class WeightAssignment:
    lam: Mapping[Node, float]
    alpha: Mapping[Node, float]
    n: int

    def __post_init__(self):
        lam = {s: self.lam.get(s, 0.0) for s in nodes_upto(self.n)}
        alpha = {s: self.alpha.get(s, 0.0) for s in nodes_upto(self.n)}
        for name, w, other in (("lambda", lam, self.lam), ("alpha", alpha, self.alpha)):
            extra = [s for s in other if s.length > self.n]
            if extra:
                raise ValueError(f"{name} has node {extra[0]} beyond depth {self.n}")
            neg = [s for s, v in w.items() if v < 0]
            if neg:
                raise ValueError(f"{name} is negative at {neg[0]}")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "alpha", alpha)

    def lhs(self) -> float:
        return sum(self.lam[s] * self.alpha[s] for s in nodes_upto(self.n))

    def branch_sum(self, branch) -> float:
        return sum(self.alpha[s] for s in branch)


@dataclass(frozen=True)
class DominationCert:
    antichain: frozenset[Node]
    branches: Mapping[Node, tuple[Node, ...]]
    lhs: float
    rhs: float
    n: int

    def problems(self, w: WeightAssignment | None = None) -> list[str]:
        """Every violated invariant, recomputing lhs/rhs from ``w`` when given."""
        out = []
        if not is_maximal_antichain(self.antichain, self.n):
            out.append("antichain is not maximal in 2^{<=n}")
        if set(self.branches) != set(self.antichain):
            out.append("branches are not indexed by the antichain")
        for t, b in self.branches.items():
            if len(b) != self.n + 1 or any(b[k].length != k for k in range(len(b))):
                out.append(f"b_{t} is not a full branch of 2^{{<=n}}")
            elif any(not b[k].is_prefix_of(b[k + 1]) for k in range(self.n)):
                out.append(f"b_{t} is not a chain")
            if t not in b:
                out.append(f"{t} not on b_{t}")
        if w is not None:
            lhs = w.lhs()
            rhs = sum(w.lam[t] * w.branch_sum(self.branches[t]) for t in self.antichain)
            if abs(lhs - self.lhs) > TOL or abs(rhs - self.rhs) > TOL:
                out.append("recorded lhs/rhs differ from the weights")
        if self.lhs > self.rhs + TOL:
            out.append(f"lhs {self.lhs:.12g} exceeds rhs {self.rhs:.12g}")
        return out

    def is_valid(self, w: WeightAssignment | None = None) -> bool:
        return not self.problems(w)

    def to_text(self) -> str:
        lines = [f"antichain {format_nodes(self.antichain)}"]
        for t in sorted(self.antichain):
            lines.append(f"branch {t}: " + " ".join(str(s) for s in self.branches[t]))
        lines.append(f"lhs={self.lhs:.12g} rhs={self.rhs:.12g}")
        return "\n".join(lines) + "\n"


def _best_descent(w: WeightAssignment):
    """M(s) = α_s + max(M(s0), M(s1)) with the maximizing child (ties to 0)."""
    best: dict[Node, float] = {}
    step: dict[Node, Node | None] = {}
    for k in range(w.n, -1, -1):
        for s in level(k):
            if k == w.n:
                best[s], step[s] = w.alpha[s], None
            else:
                c0, c1 = s.children()
                c = c0 if best[c0] >= best[c1] else c1
                best[s], step[s] = w.alpha[s] + best[c], c
    return best, step


def decompose(w: WeightAssignment) -> DominationCert:
    """Case split on F(s) = max(λ_s, F(s0) + F(s1)).

    Where the children carry at least λ_s the certificate is the union of the
    children's certificates; otherwise it is {s} with the α-heaviest descent
    below s. Runs in time linear in the size of 2^{<=n}.
    """
    n = w.n
    F: dict[Node, float] = {}
    for k in range(n, -1, -1):
        for s in level(k):
            if k == n:
                F[s] = w.lam[s]
            else:
                c0, c1 = s.children()
                F[s] = max(w.lam[s], F[c0] + F[c1])
    _, step = _best_descent(w)

    antichain = []
    stack = [ROOT]
    while stack:
        s = stack.pop()
        if s.length == n:
            antichain.append(s)
            continue
        c0, c1 = s.children()
        if F[c0] + F[c1] >= w.lam[s]:
            stack.extend((c1, c0))
        else:
            antichain.append(s)

    branches = {}
    for t in antichain:
        b = list(t.path())
        while step[b[-1]] is not None:
            b.append(step[b[-1]])
        branches[t] = tuple(b)
    rhs = sum(w.lam[t] * w.branch_sum(branches[t]) for t in antichain)
    cert = DominationCert(frozenset(antichain), branches, w.lhs(), rhs, n)
    problems = cert.problems()
    if problems:
        raise VerificationError("decompose produced an invalid certificate: " + "; ".join(problems))
    return cert


def check_branch_hypothesis(w: WeightAssignment, C: float):
    """First full branch whose α-sum exceeds C, or None."""
    for leaf in level(w.n):
        b = leaf.path()
        if w.branch_sum(b) > C + TOL:
            return b
    return None


def dominate_with_c(w: WeightAssignment, C: float) -> frozenset[Node]:
    """Antichain A with Σ λ_s α_s <= C·Σ_{s∈A} λ_s, assuming every branch α-sum is <= C."""
    bad = check_branch_hypothesis(w, C)
    if bad is not None:
        raise HypothesisViolated(
            f"branch {bad[-1]} has alpha-sum {w.branch_sum(bad):.12g} > C={C:.12g}", witness=bad
        )
    cert = decompose(w)
    bound = C * sum(w.lam[t] for t in cert.antichain)
    if cert.lhs > bound + TOL:
        raise VerificationError(f"bound failed: {cert.lhs:.12g} > {bound:.12g}")
    return cert.antichain


def maximal_antichains(n: int, root: Node = ROOT):
    """All maximal antichains of the subtree of 2^{<=n} rooted at ``root``."""
    if root.length == n:
        yield frozenset({root})
        return
    yield frozenset({root})
    c0, c1 = root.children()
    left = list(maximal_antichains(n, c0))
    for b in maximal_antichains(n, c1):
        for a in left:
            yield a | b


def brute_decompose(w: WeightAssignment) -> DominationCert:
    """Oracle: the valid certificate of least rhs over every maximal antichain and branch choice."""
    if w.n > BRUTE_MAX_DEPTH:
        raise DepthExceeded(f"brute_decompose needs n <= {BRUTE_MAX_DEPTH}, got {w.n}")
    lhs = w.lhs()
    best = None
    for A in maximal_antichains(w.n):
        ts = sorted(A)
        choices = [[leaf.path() for leaf in t.descendants_at(w.n)] for t in ts]
        for pick in product(*choices):
            rhs = sum(w.lam[t] * w.branch_sum(b) for t, b in zip(ts, pick))
            if lhs <= rhs + TOL and (best is None or rhs < best[0]):
                best = (rhs, A, dict(zip(ts, pick)))
    if best is None:
        raise VerificationError("no valid certificate exists")
    rhs, A, branches = best
    return DominationCert(frozenset(A), branches, lhs, rhs, w.n)
