"""Finite certificates for tree-indexed families in S^1.

Basis-equivalence constants, explicit projections, sliding-hump block
extraction, nonseparability certificates, regular dense subtrees, and the
operator pipeline that strings them together.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Callable, Iterable, Mapping

import numpy as np
from scipy.optimize import linprog

from .baire import BaireOneElement, BranchSpec, BranchTail, MAX_PERIOD
from .errors import (
    DensityTooLow,
    HorizonExhausted,
    HypothesisFailed,
    InvariantViolation,
    NotBlock,
    NotSingular,
    VerificationError,
    WitnessConflict,
)
from .measures import AtomicMeasure, measure_distance, measure_of
from .tree import ROOT, Node, SubtreeMap, downward_closure, level, nodes_upto, validate_subtree
from .vectors import SignedFunctional, TreeVector, combine, eval_functional, norm, norm_sp, restrict

TOL = 1e-9
EXACT_C_MAX_DEPTH = 10


@dataclass(frozen=True)
class TreeFamily:
    """(y_s)_{|s|<=d}, one finite vector per node of 2^{<=d}."""

    vectors: Mapping[Node, TreeVector]

    def __post_init__(self):
        vecs = dict(self.vectors)
        d = max((s.length for s in vecs), default=0)
        missing = [s for s in nodes_upto(d) if s not in vecs]
        if missing:
            raise ValueError(f"family index set is not 2^{{<={d}}}: {missing[0]} missing")
        object.__setattr__(self, "vectors", vecs)

    __hash__ = None

    @property
    def depth(self) -> int:
        return max(s.length for s in self.vectors)

    def __getitem__(self, s: Node) -> TreeVector:
        return self.vectors[s]

    def __iter__(self):
        return iter(sorted(self.vectors))

    def __len__(self):
        return len(self.vectors)

    @property
    def is_block(self) -> bool:
        """Supports sit in disjoint, increasing windows of natural rank."""
        last = -1
        for s in sorted(self.vectors):
            ranks = [t.rank for t in self.vectors[s].support]
            if not ranks:
                continue
            if min(ranks) <= last:
                return False
            last = max(ranks)
        return True

    def span(self, coefs: Mapping[Node, float]) -> TreeVector:
        return combine((a, self.vectors[s]) for s, a in coefs.items())

    def pull_back(self, tmap: SubtreeMap) -> TreeFamily:
        """(y_{t_s})_s."""
        return TreeFamily({s: self.vectors[t] for s, t in tmap.entries.items()})

    def truncate(self, d: int) -> TreeFamily:
        return TreeFamily({s: v for s, v in self.vectors.items() if s.length <= d})

    @classmethod
    def diagonal(cls, d: int, scale=1.0) -> TreeFamily:
        return cls({s: TreeVector.basis(s, scale) for s in nodes_upto(d)})


@dataclass(frozen=True)
class FamilyCertificate:
    K: float
    c: float
    C: float
    depth: int
    witnesses: Mapping[Node, SignedFunctional]
    exact: bool = True

    def to_text(self) -> str:
        lines = [
            "familycert v1",
            f"K={self.K:.12g} c={self.c:.12g} C={self.C:.12g} depth={self.depth} "
            f"exact={'yes' if self.exact else 'bound'}",
        ]
        for s in sorted(self.witnesses):
            terms = " ".join(
                f"{'+' if e > 0 else '-'}{t}" for t, e in sorted(self.witnesses[s].terms.items())
            )
            lines.append(f"witness {s}: {terms}")
        return "\n".join(lines) + "\n"


def check_witnesses(f: TreeFamily, witnesses: Mapping[Node, SignedFunctional]) -> None:
    """Each A_s inside supp(y_s); A_s ⊥ A_t whenever s ⊥ t."""
    for s in f:
        if s not in witnesses:
            raise WitnessConflict(f"no witness functional for index {s}")
        outside = witnesses[s].support - f[s].support
        if outside:
            raise WitnessConflict(f"witness for {s} leaves supp(y_{s}) at {min(outside)}")
    for s, t in combinations(sorted(f.vectors), 2):
        if s.incomparable(t):
            for a in witnesses[s].support:
                for b in witnesses[t].support:
                    if not a.incomparable(b):
                        raise WitnessConflict(
                            f"witness supports of incomparable indices {s}, {t} meet comparably at {a}, {b}"
                        )


def upper_constant(f: TreeFamily, cap: int = EXACT_C_MAX_DEPTH) -> tuple[float, bool]:
    """C = max over branches and sign patterns of ‖Σ ε_k y_{σ|k}‖.

    The norm is convex in the coefficients, so max over |a_k| <= 1 sits at a
    sign pattern; ε and -ε give the same norm, so ε_0 = +1. Beyond ``cap``
    the triangle-inequality bound is returned and flagged as inexact.
    """
    d = f.depth
    if d > cap:
        best = max(sum(norm(f[s]) for s in leaf.path()) for leaf in level(d))
        return float(best), False
    best = 0.0
    for leaf in level(d):
        path = leaf.path()
        for signs in product((1, -1), repeat=d):
            v = combine(zip((1,) + signs, (f[s] for s in path)))
            best = max(best, float(norm(v)))
    return best, True


def certify_equivalence(
    f: TreeFamily,
    witnesses: Mapping[Node, SignedFunctional] | None = None,
    samples: int = 10,
    seed: int = 0,
) -> FamilyCertificate:
    """Constants with (c/K)‖Σλe‖ <= ‖Σλy‖ <= C‖Σλe‖ for a block family (K = 1)."""
    if not f.is_block:
        raise NotBlock("family supports are not in increasing natural-rank windows")
    if witnesses is None:
        witnesses = {s: SignedFunctional.norming(f[s]) for s in f}
    check_witnesses(f, witnesses)
    c = min(float(eval_functional(witnesses[s], f[s])) for s in f)
    if c <= 0:
        raise WitnessConflict(f"witness values must be positive, got c={c}")
    C, exact = upper_constant(f)
    cert = FamilyCertificate(1.0, c, C, f.depth, dict(witnesses), exact)
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        lam = {s: float(v) for s, v in zip(f, rng.uniform(-1, 1, len(f)))}
        lo, mid, hi = two_sided(cert, f, lam)
        if lo > mid + TOL or mid > hi + TOL:
            raise VerificationError(f"two-sided estimate failed: {lo} <= {mid} <= {hi}")
    return cert


def two_sided(cert: FamilyCertificate, f: TreeFamily, lam: Mapping[Node, float]):
    """((c/K)‖Σλe‖, ‖Σλy‖, C‖Σλe‖)."""
    base = float(norm(TreeVector(lam)))
    mid = float(norm(f.span(lam)))
    return cert.c / cert.K * base, mid, cert.C * base


# ---------------------------------------------------------------- projections


@dataclass(frozen=True)
class ProjectionSpec:
    family: TreeFamily
    functionals: Mapping[Node, SignedFunctional]
    ratios: Mapping[Node, float] = field(default_factory=dict)
    c: float = 0.0
    C: float = 0.0


def _exact_eval(fn: SignedFunctional, x: TreeVector) -> Fraction:
    return sum((e * Fraction(x[t]) for t, e in fn.terms.items()), Fraction(0))


def build_projection(p: ProjectionSpec) -> ProjectionSpec:
    """Validate conditions (a)-(c) and attach the ratios x_s*(y_s) and constants c, C."""
    f, fs = p.family, p.functionals
    if not f.is_block:
        raise NotBlock("projection family must be block")
    for s in f:
        if s not in fs:
            raise InvariantViolation("b", f"no functional for index {s}")
        outside = fs[s].support - f[s].support
        if outside:
            raise InvariantViolation("b", f"functional {s} supported outside supp(y_{s}) at {min(outside)}")
    for s, t in combinations(sorted(f.vectors), 2):
        if s.incomparable(t):
            for a in fs[s].support:
                for b in fs[t].support:
                    if not a.incomparable(b):
                        raise InvariantViolation("c", f"A_{s} and A_{t} meet comparably at {a}, {b}")
    ratios = {s: _exact_eval(fs[s], f[s]) for s in f}
    bad = [s for s, r in ratios.items() if r <= 0]
    if bad:
        raise InvariantViolation("a", f"x_{bad[0]}*(y_{bad[0]}) = {ratios[bad[0]]} is not positive")
    c = min(float(r) for r in ratios.values())
    C, _ = upper_constant(f)
    return ProjectionSpec(f, dict(fs), ratios, c, C)


def apply_projection(p: ProjectionSpec, x: TreeVector, check: bool = True) -> TreeVector:
    """P(x) = Σ_s x_s*(x)/x_s*(y_s) · y_s, in exact rational arithmetic.

    The result has ``Fraction`` coordinates so P(P(x)) == P(x) holds exactly.
    """
    if not p.ratios:
        p = build_projection(p)
    out: dict[Node, Fraction] = {}
    for s in p.family:
        num = _exact_eval(p.functionals[s], x)
        if num == 0:
            continue
        q = num / Fraction(p.ratios[s])
        for t, v in p.family[s].items():
            out[t] = out.get(t, Fraction(0)) + q * Fraction(v)
    px = TreeVector(out)
    if check:
        lhs, rhs = float(norm(px)), p.C / p.c * float(norm(x))
        if lhs > rhs + TOL:
            raise VerificationError(f"‖P(x)‖ = {lhs:.12g} exceeds (C/c)‖x‖ = {rhs:.12g}")
    return px


# ---------------------------------------------------------------- sliding hump


@dataclass(frozen=True)
class BlockifyResult:
    subtree: SubtreeMap
    family: TreeFamily
    error_sum: float


def blockify(
    gen: Callable[[Node], TreeVector],
    delta: float,
    depth: int,
    horizon: int | None = None,
) -> BlockifyResult:
    """Dyadic subtree (t_s) and block family (w_s) with Σ‖x_{t_s} - w_s‖ < delta.

    Indices are taken in natural order with budget delta/2^{rank+2} each. The
    image of s⌢i is searched among descendants of t_s⌢i (level by level,
    lexicographically, down to ``horizon``); a candidate is accepted when its
    mass below the current rank window is under budget, and w_s is the rest.
    """
    if delta <= 0:
        raise ValueError("delta must be > 0")
    if horizon is None:
        horizon = depth + 12
    window = 0
    images: dict[Node, Node] = {}
    blocks: dict[Node, TreeVector] = {}
    for s in nodes_upto(depth):
        budget = delta / 2 ** (s.rank + 2)
        start = ROOT if s.length == 0 else images[s.parent].child(s.bit(s.length - 1))
        best = float("inf")
        found = None
        for lv in range(start.length, horizon + 1):
            for t in start.descendants_at(lv):
                x = gen(t)
                mass = float(norm(restrict(x, lambda u: u.rank < window)))
                if mass < budget:
                    found = (t, x)
                    break
                best = min(best, mass)
            if found:
                break
        if found is None:
            raise HorizonExhausted(s, best, budget)
        t, x = found
        w = restrict(x, lambda u: u.rank >= window)
        images[s], blocks[s] = t, w
        if w:
            window = max(u.rank for u in w.support) + 1
    tmap = SubtreeMap(images)
    err = sum(float(norm(gen(images[s]) - blocks[s])) for s in images)
    return BlockifyResult(tmap, TreeFamily(blocks), err)


# ---------------------------------------------------------------- nonseparability


def row_constant(f: TreeFamily, n: int) -> tuple[float, dict[Node, float]]:
    """min ‖Σ_{|s|=n} λ_s y_s‖ over Σ|λ_s| = 1, with a minimizer.

    For a block family the norm only sees |λ_s|, so this is a linear program
    over the simplex: minimize g(∅) subject to g(u) >= Σ_s λ_s |y_s(u)| and
    g(u) >= g(u0) + g(u1) on the downward closure of the supports.
    """
    idx = list(level(n))
    supp = set()
    for s in idx:
        supp |= f[s].support
    if not supp:
        return 0.0, {idx[0]: 1.0}
    nodes = sorted(downward_closure(supp))
    pos = {u: len(idx) + i for i, u in enumerate(nodes)}
    nvar = len(idx) + len(nodes)
    rows, rhs = [], []
    for u in nodes:
        r = np.zeros(nvar)
        r[pos[u]] = -1.0
        for j, s in enumerate(idx):
            r[j] = abs(float(f[s][u]))
        rows.append(r)
        rhs.append(0.0)
        kids = [c for c in u.children() if c in pos]
        if kids:
            r = np.zeros(nvar)
            r[pos[u]] = -1.0
            for c in kids:
                r[pos[c]] = 1.0
            rows.append(r)
            rhs.append(0.0)
    cost = np.zeros(nvar)
    cost[pos[ROOT]] = 1.0
    eq = np.zeros((1, nvar))
    eq[0, : len(idx)] = 1.0
    res = linprog(cost, A_ub=np.array(rows), b_ub=np.array(rhs), A_eq=eq, b_eq=[1.0],
                  bounds=[(0, None)] * nvar, method="highs")
    if not res.success:
        raise VerificationError(f"row constant LP failed at level {n}: {res.message}")
    lam = {s: float(res.x[j]) for j, s in enumerate(idx) if res.x[j] > 1e-12}
    return float(res.fun), lam


@dataclass(frozen=True)
class ContinuationRule:
    """How the finite family is continued past its last level.

    The index branch of a leaf u is u⌢period^∞. Past the last level the
    family is continued by copies of ‖w_u‖·e_v along v⌢period^∞, where v is
    the heaviest node of w_u's norm witness (ties to the smaller rank), so
    Σ_k w_{σ|k} is a Baire-1 element with one branch tail of coefficient ‖w_u‖.
    """

    period: str = "0"

    def __post_init__(self):
        if not self.period or len(self.period) > MAX_PERIOD or set(self.period) - {"0", "1"}:
            raise ValueError(f"bad continuation period {self.period!r}")

    def anchor(self, w: TreeVector) -> Node:
        wit = norm_sp(w, 1).witness
        return min(wit, key=lambda t: (-abs(float(w[t])), t.rank))

    def element(self, f: TreeFamily, leaf: Node) -> BaireOneElement:
        finite = combine((1, f[s]) for s in leaf.path())
        w = f[leaf]
        v = self.anchor(w)
        tail = BranchTail(BranchSpec(v, self.period), v.length + 1, float(norm(w)))
        return BaireOneElement(finite, (tail,))


@dataclass(frozen=True)
class NonsepCertificate:
    items: tuple[tuple[BranchSpec, AtomicMeasure], ...]
    rho: float
    row_constants: tuple[float, ...]
    min_distance: float

    @property
    def measures(self) -> list[AtomicMeasure]:
        return [m for _, m in self.items]


def nonsep_certificate(
    f: TreeFamily,
    rho: float,
    depth: int | None = None,
    rule: ContinuationRule | None = None,
) -> NonsepCertificate:
    """2^d measures µ_{Σ_k w_{σ|k}}, pairwise singular and pairwise ρ-apart."""
    if rho <= 0:
        raise ValueError("rho must be > 0")
    if not f.is_block:
        raise NotBlock("nonseparability certificate needs a block family")
    d = f.depth if depth is None else depth
    f = f.truncate(d)
    rule = rule or ContinuationRule()
    consts = []
    for n in range(d + 1):
        value, lam = row_constant(f, n)
        consts.append(value)
        if value < rho - TOL:
            pattern = ", ".join(f"{s}:{v:.6g}" for s, v in sorted(lam.items()))
            raise HypothesisFailed(
                f"row {n}: ‖Σλ_s y_s‖ = {value:.12g}·Σ|λ_s| < rho={rho:.12g} at λ = {{{pattern}}}",
                level=n,
                pattern=lam,
            )
    items = []
    for leaf in level(d):
        sigma = BranchSpec(leaf, rule.period)
        items.append((sigma, measure_of(rule.element(f, leaf))))
    ms = [m for _, m in items]
    for (i, a), (j, b) in combinations(enumerate(ms), 2):
        if set(a.atoms) & set(b.atoms):
            raise NotSingular(f"measures for leaves {i} and {j} share an atom")
    dmin = min((float(measure_distance(a, b)) for a, b in combinations(ms, 2)), default=float("inf"))
    if dmin < rho - TOL:
        raise VerificationError(f"measures only {dmin:.12g} apart, below rho={rho:.12g}")
    return NonsepCertificate(tuple(items), rho, tuple(consts), dmin)


# ---------------------------------------------------------------- dense subtrees


def dense_subtree_search(D: Iterable[Node], target_depth: int, N: int | None = None) -> SubtreeMap | None:
    """A regular dyadic subtree (t_s)_{|s|<=d} inside D, or None.

    Level sequences m_0 < ... < m_d in 0..N are tried in lexicographic
    order; for each, g_k(s) says s ∈ D at level m_k has two distinct
    (hence incomparable) descendants at level m_{k+1} with g_{k+1}.
    """
    Dset = set(D)
    if N is None:
        N = max((s.length for s in Dset), default=0)
    d = target_depth
    by_level: dict[int, list[Node]] = {}
    for s in sorted(Dset):
        if s.length <= N:
            by_level.setdefault(s.length, []).append(s)

    def feasible(ms):
        good = [set() for _ in ms]
        good[-1] = set(by_level.get(ms[-1], ()))
        for k in range(len(ms) - 2, -1, -1):
            for s in by_level.get(ms[k], ()):
                hits = 0
                for u in good[k + 1]:
                    if s.is_prefix_of(u):
                        hits += 1
                        if hits == 2:
                            good[k].add(s)
                            break
        return good

    def sequences(k, lo):
        if k == d + 1:
            yield ()
            return
        for m in range(lo, N - (d - k) + 1):
            if m in by_level:
                for rest in sequences(k + 1, m + 1):
                    yield (m,) + rest

    for ms in sequences(0, 0):
        good = feasible(ms)
        if not good[0]:
            continue
        images = {ROOT: min(good[0])}
        for k in range(d):
            for s in level(k):
                t = images[s]
                below = sorted(u for u in good[k + 1] if t.is_prefix_of(u))
                images[s.child(0)], images[s.child(1)] = below[0], below[1]
        tmap = SubtreeMap(images)
        assert validate_subtree(tmap).status.value == "valid_regular"
        return tmap
    return None


# ---------------------------------------------------------------- operator pipeline


@dataclass(frozen=True)
class DensityReport:
    counts: tuple[int, ...]
    densities: tuple[float, ...]
    theta: float

    @property
    def ok(self) -> bool:
        return all(dn >= self.theta - TOL for dn in self.densities)

    def to_text(self) -> str:
        lines = [f"density bound theta={self.theta:.12g}"]
        for n, (c, dn) in enumerate(zip(self.counts, self.densities)):
            lines.append(f"level {n}: count={c} density={dn:.12g}")
        return "\n".join(lines)


@dataclass
class TGReport:
    operator_norms: list[float]
    norm_estimate: float
    rho: float
    dense_set: set[Node]
    density: DensityReport
    subtree: SubtreeMap | None = None
    nonsep: NonsepCertificate | None = None
    searched: bool = False

    def to_text(self) -> str:
        lines = ["tg-demo report"]
        for n, v in enumerate(self.operator_norms):
            lines.append(f"‖T(x_{n})‖ = {v:.12g}")
        lines.append(f"‖T‖ estimate (max_n ‖T(x_n)‖, proxy only) = {self.norm_estimate:.12g}")
        lines.append(f"rho = {self.rho:.12g}")
        lines.append(self.density.to_text())
        if not self.searched:
            pass
        elif self.subtree is None:
            lines.append("failure: no regular subtree")
        else:
            lines.append("regular subtree: " + " ".join(
                f"{s}->{self.subtree[s]}" for s in self.subtree))
        if self.nonsep is not None:
            lines.append(f"measures: {len(self.nonsep.items)} pairwise singular, "
                         f"min pairwise distance {self.nonsep.min_distance:.12g}")
            for sigma, m in self.nonsep.items:
                atoms = " ".join(f"[{b}]:{v:.12g}" for b, v in m.items())
                lines.append(f"  sigma {sigma}: {atoms}")
        return "\n".join(lines) + "\n"


def operator_apply(T: Mapping[Node, TreeVector], x: TreeVector) -> TreeVector:
    return combine((v, T[s]) for s, v in x.items())


def level_average(n: int) -> TreeVector:
    """x_n = 2^{-n} Σ_{|s|=n} e_s."""
    return TreeVector({s: 2.0 ** -n for s in level(n)})


def run_tg_demo(
    T: Mapping[Node, TreeVector],
    rho_guess: float,
    N: int | None = None,
    target_depth: int | None = None,
    rule: ContinuationRule | None = None,
) -> TGReport:
    """Replay the finite steps of the operator argument on e_s ↦ T(e_s), |s| <= N."""
    if N is None:
        N = max(s.length for s in T)
    missing = [s for s in nodes_upto(N) if s not in T]
    if missing:
        raise ValueError(f"operator table lacks T(e_{missing[0]})")
    d = N if target_depth is None else target_depth
    norms, A = [], set()
    counts = []
    for n in range(N + 1):
        y = operator_apply(T, level_average(n))
        norms.append(float(norm(y)))
        fn = SignedFunctional.norming(y)
        An = {s for s in level(n) if float(eval_functional(fn, T[s])) >= rho_guess / 2 - TOL}
        A |= An
        counts.append(len(An))
    est = max(norms)
    if 2 * est - rho_guess <= 0:
        raise ValueError("rho_guess must be below 2·max_n ‖T(x_n)‖")
    theta = rho_guess / (2 * est - rho_guess)
    dens = DensityReport(tuple(counts), tuple(c / 2 ** n for n, c in enumerate(counts)), theta)
    report = TGReport(norms, est, rho_guess, A, dens)
    if not dens.ok:
        raise DensityTooLow(
            f"per-level density {min(dens.densities):.6g} below {theta:.6g}", report=report
        )
    family = TreeFamily({s: T[s] for s in nodes_upto(N)})
    if not family.is_block:
        raise NotBlock("operator images are not a block family; run blockify first")
    tmap = dense_subtree_search(A, d, N)
    report.subtree = tmap
    report.searched = True
    if tmap is not None:
        pulled = family.pull_back(tmap)
        report.nonsep = nonsep_certificate(pulled, rho_guess / 2, d, rule)
    return report


def builtin_operator(name: str, N: int) -> dict[Node, TreeVector]:
    """identity, half (½·identity) or collapse (level n ↦ 2^{-n}·e_{0^n})."""
    if name == "identity":
        return {s: TreeVector.basis(s) for s in nodes_upto(N)}
    if name == "half":
        return {s: TreeVector.basis(s, 0.5) for s in nodes_upto(N)}
    if name == "collapse":
        return {s: TreeVector.basis(Node(s.length, 0), 2.0 ** -s.length) for s in nodes_upto(N)}
    raise ValueError(f"unknown builtin operator {name!r}")
