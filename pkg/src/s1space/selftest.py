"""Invariant checks bundled with the package, run by ``s1 selftest``.

Each check draws its own seeded instances and raises AssertionError on a
violation. Sizes are kept small so the whole run takes a few seconds.
"""
from __future__ import annotations

import traceback
from itertools import combinations

from .baire import b1_norm, distance_to_s1, partial_sum, tail_norm
from .decomposition import brute_decompose, decompose, dominate_with_c
from .embedding import (
    TreeFamily,
    apply_projection,
    build_projection,
    builtin_operator,
    certify_equivalence,
    dense_subtree_search,
    nonsep_certificate,
    run_tg_demo,
    two_sided,
    ProjectionSpec,
)
from .errors import DensityTooLow
from .formats import parse_b1elem, parse_measure, parse_s1vec, print_b1elem, print_measure, print_s1vec
from .generators import GenConfig, batch, gen_baire, gen_family, gen_vector, gen_weights
from .measures import measure_clopen, measure_distance, measure_of, stabilized_restriction_norm
from .tree import ClopenSet, Node, level, nodes_upto, validate_subtree
from .vectors import SignedFunctional, TreeVector, brute_norm, norm_sp

TOL = 1e-9
CHECKS = []


def check(fn):
    CHECKS.append(fn)
    return fn


@check
def norm_matches_brute_force():
    for cfg in batch(GenConfig(seed=11, depth=4, density=0.6), 60):
        x = gen_vector(cfg)
        for p in (1, 2):
            assert abs(norm_sp(x, p).value - brute_norm(x, p)) <= TOL


@check
def chain_and_antichain_identities():
    for cfg in batch(GenConfig(seed=12, depth=5), 40):
        rng = cfg.rng()
        leaf = Node(5, int(rng.integers(0, 32)))
        chain = TreeVector({s: float(rng.uniform(-3, 3)) for s in leaf.path()})
        assert abs(norm_sp(chain).value - max(abs(v) for _, v in chain.items())) <= TOL
        anti = TreeVector({s: float(rng.uniform(-3, 3)) for s in level(4)})
        assert abs(norm_sp(anti).value - sum(abs(v) for _, v in anti.items())) <= TOL


@check
def clopen_boolean_laws():
    sets = [ClopenSet(frozenset(s for j, s in enumerate(level(2)) if mask >> j & 1))
            for mask in range(16)]
    for a, b in combinations(sets, 2):
        assert ~(a | b) == (~a & ~b)
        assert (a & b) | (a & ~b) == a
        assert (a | ~a) == ClopenSet.whole()


@check
def decompose_certificates_valid():
    for cfg in batch(GenConfig(seed=13, depth=3, lo=0.0, hi=2.0, density=0.8), 40):
        w = gen_weights(cfg)
        cert = decompose(w)
        assert cert.is_valid(w)
        assert cert.rhs >= brute_decompose(w).rhs - TOL


@check
def dominate_bound():
    for cfg in batch(GenConfig(seed=14, depth=4, lo=0.0, hi=1.0), 40):
        w = gen_weights(cfg)
        C = max(w.branch_sum(leaf.path()) for leaf in level(w.n))
        A = dominate_with_c(w, C)
        assert w.lhs() <= C * sum(w.lam[t] for t in A) + TOL


@check
def baire_norm_and_measure_laws():
    for cfg in batch(GenConfig(seed=15, depth=2, max_tails=2), 30):
        x = gen_baire(cfg)
        d = x.reduction_depth
        assert abs(b1_norm(x) - norm_sp(partial_sum(x, d), 1).value) <= TOL
        assert abs(tail_norm(x, Node(0), 0) - b1_norm(x)) <= TOL
        mu = measure_of(x)
        assert abs(mu.total_mass - distance_to_s1(x)) <= TOL
        for s in nodes_upto(2):
            got = measure_clopen(mu, ClopenSet(frozenset({s})))
            assert abs(got - stabilized_restriction_norm(x, [s])) <= TOL


@check
def measure_lipschitz():
    cfgs = batch(GenConfig(seed=16, depth=2, max_tails=2), 40)
    for a, b in zip(cfgs[::2], cfgs[1::2]):
        x, y = gen_baire(a), gen_baire(b)
        lhs = measure_distance(measure_of(x, check=False), measure_of(y, check=False))
        assert lhs <= b1_norm(x - y) + TOL


@check
def equivalence_two_sided():
    for cfg in batch(GenConfig(seed=17, depth=2, shape="random-blocks"), 10):
        f = gen_family(cfg)
        cert = certify_equivalence(f, samples=0)
        rng = cfg.rng()
        for _ in range(10):
            lam = {s: float(rng.uniform(-1, 1)) for s in f}
            lo, mid, hi = two_sided(cert, f, lam)
            assert lo <= mid + TOL and mid <= hi + TOL


@check
def projection_idempotent():
    for cfg in batch(GenConfig(seed=18, depth=2, shape="random-blocks"), 5):
        f = gen_family(cfg)
        p = build_projection(ProjectionSpec(f, {s: SignedFunctional.norming(f[s]) for s in f}))
        for s in f:
            assert apply_projection(p, f[s]) == f[s].map_values(lambda v: v)
        for sub in batch(cfg, 10, depth=f[max(f)].depth, density=0.7):
            x = gen_vector(sub)
            px = apply_projection(p, x)
            assert apply_projection(p, px) == px


@check
def subtree_search_regular():
    for d in range(4):
        m = dense_subtree_search(list(nodes_upto(d)), d)
        assert m is not None and validate_subtree(m).status.value == "valid_regular"
    assert dense_subtree_search(list(Node(4, 0).path()), 1) is None


@check
def nonsep_diagonal():
    cert = nonsep_certificate(TreeFamily.diagonal(2), 1.0)
    assert len(cert.items) == 4 and cert.min_distance >= 1 - TOL


@check
def tg_demo():
    rep = run_tg_demo(builtin_operator("identity", 3), 1.0)
    assert rep.nonsep is not None and len(rep.nonsep.items) == 8
    try:
        run_tg_demo(builtin_operator("collapse", 3), 1.0)
    except DensityTooLow:
        pass
    else:
        raise AssertionError("collapse operator passed the density check")


@check
def formats_round_trip():
    for cfg in batch(GenConfig(seed=19, depth=3), 20):
        x = gen_vector(cfg)
        text = print_s1vec(x)
        assert print_s1vec(parse_s1vec(text)) == text
        e = gen_baire(cfg)
        text = print_b1elem(e)
        assert print_b1elem(parse_b1elem(text)) == text
        m = measure_of(e, check=False)
        text = print_measure(m)
        assert print_measure(parse_measure(text)) == text


def run(verbose=True, out=print) -> tuple[int, int]:
    passed = failed = 0
    for fn in CHECKS:
        try:
            fn()
        except Exception:
            failed += 1
            if verbose:
                out(f"FAIL {fn.__name__}")
                out(traceback.format_exc())
        else:
            passed += 1
            if verbose:
                out(f"pass {fn.__name__}")
    out(f"selftest: {passed} passed, {failed} failed")
    return passed, failed
