from itertools import combinations

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import antichains_within, baire_elements, coefs, nodes, oracle_partial, oracle_tail_norm
from s1space.baire import BaireOneElement, BranchSpec, BranchTail, b1_norm, coordinate, distance_to_s1
from s1space.errors import NotSingular
from s1space.measures import (
    AtomicMeasure,
    is_singular_family,
    ldom_threshold,
    measure_clopen,
    measure_distance,
    measure_norm,
    measure_of,
    singular_separation,
    stabilized_restriction_norm,
)
from s1space.tree import ROOT, ClopenSet, Node, downward_closure, level
from s1space.vectors import TreeVector, norm, restrict

N = Node.parse
B = BranchSpec.parse
TOL = 1e-9
Z, O, TZ = B("e", "0*"), B("e", "1*"), B("1", "0*")


def clopen(*lits):
    return ClopenSet(frozenset(map(N, lits)))


def elem(finite, *tails):
    return BaireOneElement(TreeVector.from_literals(finite), tuple(BranchTail(*t) for t in tails))


def relevant(x, depth):
    """Oracle node set: prefixes of branches and finite support, cut at ``depth``."""
    marks = {s for s in x.finite_part.support if s.length <= depth}
    marks |= {t.branch.prefix(depth) for t in x.tails}
    return downward_closure(marks) | {ROOT}


def oracle_union_norm(x, A):
    m = max([x.reduction_depth + 1] + [t.length for t in A])
    y = oracle_partial(x, m + x.reduction_depth + 3)
    return norm(restrict(y, lambda s: s.length >= m and any(t.is_prefix_of(s) for t in A)))


# ---- examples


def test_measure_of_examples():
    assert measure_of(elem({"0": 3, "1": -1})) == AtomicMeasure({})
    x = elem({}, (Z, 0, 1.0), (TZ, 1, 2.0))
    mu = measure_of(x)
    assert mu == AtomicMeasure({Z: 1.0, TZ: 2.0})
    assert measure_clopen(mu, clopen("0")) == 1 and measure_clopen(mu, clopen("1")) == 2
    assert measure_of(x * -3) == AtomicMeasure({Z: 3.0, TZ: 6.0})


def test_measure_clopen_examples():
    mu = AtomicMeasure({Z: 1.0, TZ: 2.0})
    assert measure_clopen(mu, clopen("11")) == 0
    assert measure_clopen(mu, clopen("1")) == 2
    assert measure_clopen(mu, clopen("e")) == mu.total_mass == 3


def test_measure_norm_examples():
    mu = AtomicMeasure({Z: 1.0, TZ: 2.0})
    assert measure_norm(mu) == 3
    assert measure_distance(AtomicMeasure({Z: 1.0}), AtomicMeasure({TZ: 2.0})) == 2
    assert measure_distance(mu, mu) == 0
    assert AtomicMeasure({Z: 0.0}).atoms == {}


@st.composite
def measures(draw, signed=True):
    specs = draw(st.lists(st.builds(BranchSpec, nodes(3), st.text("01", min_size=1, max_size=2)),
                          max_size=4, unique=True))
    vals = coefs if signed else coefs.map(abs)
    return AtomicMeasure({b: draw(vals) for b in specs})


def oracle_measure_norm(m):
    # sup over Borel sets, realised by subsets of the atom set
    atoms = list(m.items())
    best = 0.0
    for r in range(len(atoms) + 1):
        for sub in combinations(atoms, r):
            best = max(best, abs(sum(v for _, v in sub)))
    return best


@given(measures())
def test_measure_norm_is_sup_over_sets(m):
    assert measure_norm(m) == pytest.approx(oracle_measure_norm(m), abs=TOL)


@given(measures(), measures(), measures())
def test_measure_distance_is_metric(a, b, c):
    assert measure_distance(a, b) == pytest.approx(measure_distance(b, a), abs=TOL)
    assert measure_distance(a, c) <= measure_distance(a, b) + measure_distance(b, c) + TOL


@given(measures(), nodes(3))
def test_measure_clopen_membership(m, t):
    bits = t.word
    expected = sum(v for b, v in m.items() if b.prefix(t.length).word == bits)
    assert measure_clopen(m, ClopenSet(frozenset({t}))) == pytest.approx(expected, abs=TOL)


# ---- measure_of against the definition


@given(baire_elements())
def test_measure_of_matches_definition_at_every_node(x):
    mu = measure_of(x)
    d = x.reduction_depth
    for t in relevant(x, d + 1):
        m = max(d + 1, t.length)
        assert measure_clopen(mu, ClopenSet(frozenset({t}))) == pytest.approx(
            oracle_tail_norm(x, t, m), abs=TOL
        )


@given(baire_elements(), st.sampled_from([-2, -0.5, 0, 1, 3]))
def test_basprop_scaling(x, a):
    lhs, rhs = measure_of(x * a), measure_of(x) * abs(a)
    assert lhs == rhs


@given(baire_elements(), baire_elements())
def test_basprop_subadditive(x, y):
    s, mx, my = measure_of(x + y), measure_of(x), measure_of(y)
    for b, v in s.items():
        assert v <= mx.atoms.get(b, 0) + my.atoms.get(b, 0) + TOL


@given(baire_elements())
def test_basprop_total_mass(x):
    assert measure_of(x).total_mass == distance_to_s1(x)


@given(baire_elements(), baire_elements())
def test_basprop_lipschitz(x, y):
    lhs = measure_distance(measure_of(x), measure_of(y))
    assert lhs <= b1_norm(x - y) + TOL


@given(baire_elements(2, 2))
def test_property_on_every_relevant_antichain(x):
    mu = measure_of(x)
    R = relevant(x, x.reduction_depth + 1)
    for A in antichains_within(R):
        got = measure_clopen(mu, ClopenSet(frozenset(A)))
        assert got == pytest.approx(stabilized_restriction_norm(x, A), abs=TOL)
        assert got == pytest.approx(oracle_union_norm(x, A), abs=TOL)


@given(baire_elements(), st.dictionaries(nodes(3), coefs, max_size=4), st.data())
def test_lequal_invariance(x, finite, data):
    starts = [data.draw(st.integers(0, 6)) for _ in x.tails]
    y = BaireOneElement(
        TreeVector(finite),
        tuple(BranchTail(t.branch, s, t.coef) for t, s in zip(x.tails, starts)),
    )
    assert measure_of(y) == measure_of(x)


# ---- ldom


def test_ldom_examples():
    assert ldom_threshold(elem({}, (Z, 0, 1.0)), 0.5) == 0
    # root mass 2 exceeds µ + eps until the root is excluded
    assert ldom_threshold(elem({"e": 2}, (Z, 1, 1.0)), 0.5) == 1
    # root coordinate 1 + 0 is within µ(V_e) = 1 plus eps, so level 0 already works
    assert ldom_threshold(elem({"e": 1}, (Z, 1, 1.0)), 0.5) == 0
    f = elem({"0": 1, "10": -2})
    assert ldom_threshold(f, 0.5) == f.finite_part.depth + 1


def oracle_ldom(x, eps):
    mu = measure_of(x, check=False)
    d = x.reduction_depth
    R = relevant(x, d + 1)
    chains = antichains_within(R)
    for n in range(d + 2):
        worst = max(
            sum(abs(coordinate(x, s)) for s in A) - measure_clopen(mu, ClopenSet(frozenset(A)))
            for A in chains
            if all(s.length >= n for s in A)
        )
        if worst < eps:
            return n
    return d + 1


@given(baire_elements(2, 2), st.sampled_from([0.1, 0.5, 1.0, 2.0]))
def test_ldom_matches_exhaustive_antichains(x, eps):
    assert ldom_threshold(x, eps) == oracle_ldom(x, eps)


# ---- separation


def test_separation_examples():
    a, b = AtomicMeasure({Z: 1.0}), AtomicMeasure({O: 1.0})
    assert singular_separation([a, b], 0.1) == [clopen("0"), clopen("1")]
    assert singular_separation([a], 0.1) == [ClopenSet.whole()]
    m1 = AtomicMeasure({Z: 1.0, B("e", "(01)*"): 1.0})
    m2 = AtomicMeasure({TZ: 2.0})
    o1, o2 = singular_separation([m1, m2], 0.1)
    assert (o1 & o2).is_empty
    assert measure_clopen(m1, o1) == 2 and measure_clopen(m2, o2) == 2
    with pytest.raises(NotSingular):
        singular_separation([a, AtomicMeasure({Z: 2.0})], 0.1)
    with pytest.raises(ValueError):
        singular_separation([AtomicMeasure({Z: -1.0})], 0.1)


@given(st.lists(measures(signed=False), min_size=1, max_size=4))
def test_separation_properties(ms):
    assume(is_singular_family(ms))
    os_ = singular_separation(ms, 1e-6)
    for i, o in enumerate(os_):
        assert measure_clopen(ms[i], ~o) == 0
        assert measure_clopen(ms[i], o) == pytest.approx(ms[i].total_mass, abs=TOL)
        for j in range(i):
            assert (o & os_[j]).is_empty
            for lf in level(6):
                assert not (o.contains_node(lf) and os_[j].contains_node(lf))
