from itertools import combinations

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from s1space.baire import BaireOneElement, BranchSpec, BranchTail
from s1space.tree import ROOT, Node
from s1space.vectors import TreeVector, norm, restrict

settings.register_profile(
    "default", deadline=None, max_examples=150, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def nodes(max_len=4, min_len=0):
    return st.integers(min_len, max_len).flatmap(
        lambda n: st.integers(0, 2**n - 1).map(lambda b: Node(n, b))
    )


coefs = st.integers(-8, 8).filter(bool).map(lambda k: k / 4)


def vectors(max_len=4, max_size=10):
    return st.dictionaries(nodes(max_len), coefs, max_size=max_size).map(TreeVector)


periods = st.text("01", min_size=1, max_size=3)


@st.composite
def branches(draw, max_stem=3):
    return BranchSpec(draw(nodes(max_stem)), draw(periods))


@st.composite
def baire_elements(draw, max_depth=2, max_tails=2):
    finite = draw(vectors(max_depth, max_size=5))
    specs = draw(st.lists(branches(max_depth), max_size=max_tails, unique=True))
    tails = tuple(BranchTail(b, draw(st.integers(0, max_depth + 1)), draw(coefs)) for b in specs)
    return BaireOneElement(finite, tails)


# ---- independent oracles


def antichain_subsets(nodes_):
    """Every antichain inside a node list, by plain subset enumeration."""
    nodes_ = list(nodes_)
    for r in range(len(nodes_) + 1):
        for sub in combinations(nodes_, r):
            if all(not a.is_prefix_of(b) and not b.is_prefix_of(a) for a, b in combinations(sub, 2)):
                yield sub


def oracle_norm(x, p=1):
    best = 0.0
    for a in antichain_subsets(x.support):
        best = max(best, sum(abs(float(x[t])) ** p for t in a))
    return best ** (1 / p)


def point_bits(b, n):
    """First n bits of stem⌢period^∞, straight from the definition."""
    word = b.stem.word
    while len(word) < n:
        word += b.period
    return word[:n]


def oracle_partial(x, n):
    out = {}
    for s, v in x.finite_part.items():
        if s.length <= n:
            out[s] = out.get(s, 0) + v
    for t in x.tails:
        bits = point_bits(t.branch, n)
        for k in range(t.start_depth, n + 1):
            s = Node.from_word(int(ch) for ch in bits[:k])
            out[s] = out.get(s, 0) + t.coef
    return TreeVector(out)


def oracle_b1(x, extra=3):
    """sup_n of partial-sum norms, taken well past D*."""
    return max(norm(oracle_partial(x, n)) for n in range(x.reduction_depth + extra + 1))


def oracle_tail_norm(x, t, m):
    depth = x.reduction_depth + m + t.length + 3
    y = oracle_partial(x, depth)
    return norm(restrict(y, lambda s: t.is_prefix_of(s) and s.length >= m))


def antichains_within(nodes_):
    """All antichains of a downward-closed node set, by recursion on the root."""
    nodes_ = set(nodes_)

    def below(s):
        # antichains inside the subtree at s, the empty one included
        out = [()]
        for c in s.children():
            if c in nodes_:
                out = [a + b for a in out for b in below(c)]
        return out + [(s,)]

    return below(ROOT) if ROOT in nodes_ else [()]


# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
