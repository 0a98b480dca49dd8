from fractions import Fraction
from itertools import combinations, product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from s1space.embedding import (
    ContinuationRule,
    ProjectionSpec,
    TreeFamily,
    apply_projection,
    blockify,
    build_projection,
    builtin_operator,
    certify_equivalence,
    dense_subtree_search,
    nonsep_certificate,
    row_constant,
    run_tg_demo,
    two_sided,
    upper_constant,
)
from s1space.errors import (
    DensityTooLow,
    HorizonExhausted,
    HypothesisFailed,
    InvariantViolation,
    NotBlock,
    WitnessConflict,
)
from s1space.generators import GenConfig, batch, gen_family, gen_vector
from s1space.measures import measure_distance
from s1space.tree import ROOT, Node, SubtreeMap, SubtreeStatus, level, nodes_upto, validate_subtree
from s1space.vectors import SignedFunctional, TreeVector, norm

N = Node.parse
TOL = 1e-9
seeds = st.integers(0, 2**32 - 1)


def family(seed, depth=2, shape="random-blocks"):
    return gen_family(GenConfig(seed=seed, depth=depth, shape=shape))


def norming(f):
    return {s: SignedFunctional.norming(f[s]) for s in f}


# ---- families


def test_block_detection():
    assert TreeFamily.diagonal(2).is_block
    swapped = TreeFamily({ROOT: TreeVector.basis(N("1")), N("0"): TreeVector.basis(N("0")),
                          N("1"): TreeVector.basis(N("00"))})
    assert not swapped.is_block
    with pytest.raises(ValueError):
        TreeFamily({ROOT: TreeVector(), N("0"): TreeVector()})


@given(seeds, st.sampled_from(["diagonal", "chain-blocks", "random-blocks"]), st.integers(0, 3))
def test_generated_families_are_block(seed, shape, depth):
    f = family(seed, depth, shape)
    assert f.is_block and f.depth == depth


# ---- certify_equivalence


def test_certify_examples():
    c = certify_equivalence(TreeFamily.diagonal(2))
    assert (c.K, c.c, c.C) == (1, 1, 1)
    c = certify_equivalence(TreeFamily.diagonal(2, 2.0))
    assert (c.K, c.c, c.C) == (1, 2, 2)
    assert c.exact and c.to_text().startswith("familycert v1\n")


def test_certify_errors():
    bad = TreeFamily({ROOT: TreeVector.basis(N("1")), N("0"): TreeVector.basis(N("0")),
                      N("1"): TreeVector.basis(N("00"))})
    with pytest.raises(NotBlock):
        certify_equivalence(bad)
    f = TreeFamily({ROOT: TreeVector.basis(ROOT), N("0"): TreeVector.basis(N("0")),
                    N("1"): TreeVector({N("1"): 1.0, N("00"): 1.0})})
    # supp(y_1) reaches under 0, so the default witness on y_1 meets y_0 comparably
    wit = norming(f)
    wit[N("1")] = SignedFunctional({N("00"): 1})
    with pytest.raises(WitnessConflict):
        certify_equivalence(f, wit)
    wit[N("1")] = SignedFunctional({N("11"): 1})
    with pytest.raises(WitnessConflict):
        certify_equivalence(f, wit)  # outside supp(y_1)
    wit[N("1")] = SignedFunctional({N("1"): -1})
    with pytest.raises(WitnessConflict):
        certify_equivalence(f, wit)  # c <= 0


def grid_ratio(f, values):
    idx = list(f)
    best = 0.0
    for lam in values:
        base = norm(TreeVector(dict(zip(idx, lam))))
        if base:
            best = max(best, norm(f.span(dict(zip(idx, lam)))) / base)
    return best


@pytest.mark.parametrize("seed", range(4))
def test_upper_constant_grid_oracle(seed):
    f = family(seed, 2, "chain-blocks")
    C, exact = upper_constant(f)
    assert exact
    # max over the sign patterns on each branch, recomputed from scratch
    pats = max(
        norm(f.span({s: e for s, e in zip(leaf.path(), eps)}))
        for leaf in level(2) for eps in product((1, -1), repeat=3)
    )
    assert C == pytest.approx(pats, abs=TOL)
    grid = grid_ratio(f, product((-1, 0, 1), repeat=len(f)))
    rng = np.random.default_rng(seed)
    cont = grid_ratio(f, rng.uniform(-1, 1, (1500, len(f))))
    assert grid == pytest.approx(C, abs=TOL)
    assert cont <= C + TOL


@given(seeds, st.integers(1, 3), st.data())
def test_two_sided_estimate(seed, depth, data):
    f = family(seed, depth)
    cert = certify_equivalence(f, samples=0)
    for _ in range(5):
        lam = {s: data.draw(st.sampled_from([-2, -1, -0.25, 0, 0.5, 1, 3])) for s in f}
        lo, mid, hi = two_sided(cert, f, lam)
        assert lo <= mid + TOL and mid <= hi + TOL


@given(seeds)
def test_pull_back_recertifies_no_worse(seed):
    f = family(seed, 3)
    cert = certify_equivalence(f, samples=0)
    tmap = SubtreeMap({ROOT: N("0"), N("0"): N("000"), N("1"): N("011")})
    assert validate_subtree(tmap).status is SubtreeStatus.VALID_REGULAR
    g = f.pull_back(tmap)
    sub = certify_equivalence(g, samples=0)
    assert sub.c >= cert.c - TOL and sub.C <= cert.C + TOL


# ---- projections


def test_projection_examples():
    f = TreeFamily.diagonal(2)
    p = build_projection(ProjectionSpec(f, {s: SignedFunctional({s: 1}) for s in f}))
    x = gen_vector(GenConfig(seed=3, depth=2, density=1))
    assert apply_projection(p, x) == x
    assert apply_projection(p, TreeVector.basis(N("0101"))) == TreeVector()


def test_projection_conditions():
    f = TreeFamily.diagonal(1)
    fs = {s: SignedFunctional({s: 1}) for s in f}
    with pytest.raises(InvariantViolation) as e:
        build_projection(ProjectionSpec(f, {**fs, ROOT: SignedFunctional({ROOT: -1})}))
    assert e.value.condition == "a"
    with pytest.raises(InvariantViolation) as e:
        build_projection(ProjectionSpec(f, {**fs, ROOT: SignedFunctional({N("11"): 1})}))
    assert e.value.condition == "b"
    g = TreeFamily({ROOT: TreeVector.basis(ROOT), N("0"): TreeVector.basis(N("0")),
                    N("1"): TreeVector.basis(N("00"))})
    gs = {s: SignedFunctional(dict.fromkeys(g[s].support, 1)) for s in g}
    with pytest.raises((InvariantViolation, NotBlock)):
        build_projection(ProjectionSpec(g, gs))


@given(seeds, st.integers(0, 2**31))
def test_projection_laws(seed, xseed):
    f = family(seed, 2)
    p = build_projection(ProjectionSpec(f, norming(f)))
    for s in f:
        assert apply_projection(p, f[s]) == f[s]
    depth = max(u.length for s in f for u in f[s].support)
    x, y = (gen_vector(c) for c in batch(GenConfig(seed=xseed, depth=depth, density=0.6), 2))
    px = apply_projection(p, x)
    assert apply_projection(p, px) == px
    assert norm(px) <= p.C / p.c * norm(x) + TOL
    # exact inputs, so the comparison tests linearity and not float rounding
    x, y = x.map_values(Fraction), y.map_values(Fraction)
    lin = apply_projection(p, x * 2 + y, check=False)
    assert lin == apply_projection(p, x, check=False) * 2 + apply_projection(p, y, check=False)


# ---- blockify


def test_blockify_identity():
    res = blockify(TreeVector.basis, 0.1, 2)
    assert all(res.subtree[s] == s for s in nodes_upto(2))
    assert res.error_sum == 0
    assert all(res.family[s] == TreeVector.basis(s) for s in nodes_upto(2))


def test_blockify_persistent_mass_exhausts_horizon():
    with pytest.raises(HorizonExhausted) as e:
        blockify(lambda s: TreeVector.basis(s) + TreeVector.basis(ROOT, 5.0), 0.1, 2, horizon=8)
    assert e.value.best_mass >= 5 - TOL


def noisy(s):
    return TreeVector.basis(s) + TreeVector.basis(ROOT, 2.0 ** -s.length)


def check_blockify(gen, res, delta):
    assert validate_subtree(res.subtree).valid
    assert res.family.is_block
    err = sum(norm(gen(res.subtree[s]) - res.family[s]) for s in res.subtree)
    assert err == pytest.approx(res.error_sum, abs=TOL) and err < delta


def test_blockify_skips_noisy_levels():
    res = blockify(noisy, 0.1, 2)
    check_blockify(noisy, res, 0.1)
    # index 0 needs 2^{-|t|} below its budget 0.1/2^3, forcing |t| >= 7
    assert res.subtree[ROOT] == ROOT and res.subtree[N("0")].length >= 7


@given(st.integers(0, 2**31), st.sampled_from([0.05, 0.2, 1.0]), st.integers(0, 2))
def test_blockify_output_properties(seed, delta, depth):
    rng = np.random.default_rng(seed)
    weights = rng.uniform(-1, 1, 4)

    def gen(s):
        # a weakly null perturbation of the basis: early-window noise that decays with depth
        noise = {Node.from_rank(j): float(w) * 2.0 ** -s.length for j, w in enumerate(weights)}
        return TreeVector.basis(s, 1.5) + TreeVector(noise)

    res = blockify(gen, delta, depth)
    check_blockify(gen, res, delta)


# ---- nonseparability


def test_nonsep_examples():
    cert = nonsep_certificate(TreeFamily.diagonal(2), 1.0)
    assert len(cert.items) == 4
    for a, b in combinations(cert.measures, 2):
        assert not set(a.atoms) & set(b.atoms)
        assert measure_distance(a, b) == pytest.approx(1.0)
    assert all(m.total_mass == 1 for m in cert.measures)
    rho = 0.3
    cert = nonsep_certificate(TreeFamily.diagonal(2, rho), rho)
    assert all(list(m.atoms.values()) == [pytest.approx(rho)] for m in cert.measures)
    assert cert.min_distance == pytest.approx(rho)


def test_nonsep_zero_row():
    vecs = {s: TreeVector.basis(s) for s in nodes_upto(2)}
    vecs[N("01")] = TreeVector()
    with pytest.raises(HypothesisFailed) as e:
        nonsep_certificate(TreeFamily(vecs), 0.5)
    assert e.value.level == 2 and N("01") in e.value.pattern


def test_row_constant_exact_on_diagonal():
    for n in range(4):
        value, lam = row_constant(TreeFamily.diagonal(3, 2.0), n)
        assert value == pytest.approx(2.0)


@given(seeds, st.integers(0, 2))
def test_row_constant_is_the_minimum(seed, n):
    f = family(seed, 2)
    value, lam = row_constant(f, n)
    idx = list(level(n))
    at_min = norm(f.span(lam)) / sum(abs(v) for v in lam.values())
    assert at_min == pytest.approx(value, abs=1e-7)
    rng = np.random.default_rng(seed)
    for w in rng.dirichlet(np.ones(len(idx)), 200):
        signs = rng.choice([-1, 1], len(idx))
        v = norm(f.span({s: float(a * e) for s, a, e in zip(idx, w, signs)}))
        assert v >= value - 1e-7


@given(seeds, st.sampled_from(["0", "1", "01"]))
def test_nonsep_properties(seed, period):
    f = family(seed, 2)
    rho = min(row_constant(f, n)[0] for n in range(3)) * 0.999
    cert = nonsep_certificate(f, rho, rule=ContinuationRule(period))
    ms = cert.measures
    assert len(ms) == 4
    for a, b in combinations(ms, 2):
        assert not set(a.atoms) & set(b.atoms)
        assert measure_distance(a, b) >= rho - TOL


# ---- dense subtree search


def test_search_examples():
    m = dense_subtree_search(nodes_upto(2), 2)
    assert all(m[s] == s for s in nodes_upto(2))
    assert dense_subtree_search(N("0000").path(), 1) is None
    D = {s for s in nodes_upto(6) if s.length == 0 or s.bit(s.length - 1) == 0}
    m = dense_subtree_search(D, 2, 6)
    assert m is not None and m.images() <= D
    assert validate_subtree(m).status is SubtreeStatus.VALID_REGULAR


@pytest.mark.parametrize("d", range(5))
def test_search_full_tree_uses_identity_levels(d):
    m = dense_subtree_search(nodes_upto(d), d)
    assert m.level_depths() == list(range(d + 1))


def oracle_depth1(D):
    # a root image t and two distinct same-level nodes of D below it
    for t in D:
        for u, v in combinations(sorted(D), 2):
            if u.length == v.length > t.length and t.is_prefix_of(u) and t.is_prefix_of(v):
                return True
    return False


@given(st.sets(st.integers(0, 30).map(Node.from_rank), max_size=12))
def test_search_depth1_exhaustive(D):
    m = dense_subtree_search(D, 1, 4)
    assert (m is not None) == oracle_depth1(D)
    if m is not None:
        assert m.images() <= D and validate_subtree(m).status is SubtreeStatus.VALID_REGULAR


@given(st.sets(st.integers(0, 62).map(Node.from_rank), min_size=10, max_size=40))
def test_search_outputs_regular_inside_D(D):
    m = dense_subtree_search(D, 2, 5)
    if m is not None:
        assert m.images() <= D and validate_subtree(m).status is SubtreeStatus.VALID_REGULAR


# ---- operator pipeline


def test_tg_identity():
    rep = run_tg_demo(builtin_operator("identity", 3), 1.0)
    assert rep.density.densities == (1, 1, 1, 1)
    assert rep.subtree is not None and len(rep.subtree) == 15
    ms = rep.nonsep.measures
    assert len(ms) == 8
    assert all(measure_distance(a, b) >= 1 - TOL for a, b in combinations(ms, 2))


def test_tg_half():
    rep = run_tg_demo(builtin_operator("half", 3), 0.5)
    assert all(d == 1 for d in rep.density.densities)
    assert all(v == pytest.approx(0.5) for m in rep.nonsep.measures for v in m.atoms.values())


def test_tg_collapse_density_too_low():
    with pytest.raises(DensityTooLow) as e:
        run_tg_demo(builtin_operator("collapse", 3), 1.0)
    assert not e.value.report.density.ok
    assert min(e.value.report.density.densities) < e.value.report.density.theta


def test_tg_non_block_images_rejected():
    T = {s: TreeVector.basis(s) for s in nodes_upto(2)}
    T[N("1")] = TreeVector({N("1"): 1.0, N("000"): 1.0})
    with pytest.raises(NotBlock):
        run_tg_demo(T, 1.0)
