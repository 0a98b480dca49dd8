"""Seeded random instances for fuzzing and acceptance runs.

Every draw goes through ``numpy.random.Generator(PCG64(seed))``; the
algorithm name is part of :meth:`GenConfig.header` so a file records how it
was produced.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .baire import BaireOneElement, BranchSpec, BranchTail
from .decomposition import WeightAssignment
from .embedding import TreeFamily
from .tree import Node, nodes_upto
from .vectors import TreeVector

PRNG = "pcg64"
SHAPES = ("diagonal", "chain-blocks", "random-blocks")


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    depth: int = 3
    density: float = 0.5
    lo: float = -1.0
    hi: float = 1.0
    shape: str = "diagonal"
    max_tails: int = 3

    def __post_init__(self):
        if not 0 < self.density <= 1:
            raise ValueError("density must lie in (0, 1]")
        if self.lo > self.hi:
            raise ValueError("coefficient range is empty")
        if self.shape not in SHAPES:
            raise ValueError(f"shape must be one of {SHAPES}")
        if self.depth < 0:
            raise ValueError("depth must be >= 0")

    def rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed))

    def header(self) -> str:
        fields = " ".join(f"{k}={v}" for k, v in asdict(self).items())
        return f"# gen prng={PRNG} {fields}"


def _coef(rng, cfg: GenConfig) -> float:
    while True:
        v = float(rng.uniform(cfg.lo, cfg.hi))
        if v != 0:
            return v


def _vector(rng, cfg: GenConfig) -> TreeVector:
    out = {}
    for s in nodes_upto(cfg.depth):
        if rng.random() < cfg.density:
            out[s] = _coef(rng, cfg)
    return TreeVector(out)


def gen_vector(cfg: GenConfig) -> TreeVector:
    return _vector(cfg.rng(), cfg)


def gen_weights(cfg: GenConfig) -> WeightAssignment:
    """Nonnegative λ, α on 2^{<=depth}; entries are zero with probability 1-density."""
    rng = cfg.rng()
    lo, hi = max(cfg.lo, 0.0), max(cfg.hi, 0.0)
    lam, alpha = {}, {}
    for s in nodes_upto(cfg.depth):
        lam[s] = float(rng.uniform(lo, hi)) if rng.random() < cfg.density else 0.0
        alpha[s] = float(rng.uniform(lo, hi)) if rng.random() < cfg.density else 0.0
    return WeightAssignment(lam, alpha, cfg.depth)


def gen_family(cfg: GenConfig) -> TreeFamily:
    """Families indexed by 2^{<=depth}, enumerated in natural order.

    diagonal: y_s = c_s e_s. chain-blocks: y_s = a e_u + b e_{u0} with
    u = s0...0 at level 2i, where i is the natural rank of s.
    random-blocks: 1-4 consecutive descendants of s at level |s|+2 with
    random coefficients. Both block shapes keep supports below their index,
    so incomparable indices get incomparable supports.
    """
    rng = cfg.rng()
    mag_lo = max(abs(cfg.lo), abs(cfg.hi)) / 4 or 0.25
    mag_hi = max(abs(cfg.lo), abs(cfg.hi)) or 1.0

    def mag():
        return float(rng.uniform(mag_lo, mag_hi)) * (1 if rng.random() < 0.5 else -1)

    vecs = {}
    for i, s in enumerate(nodes_upto(cfg.depth)):
        if cfg.shape == "diagonal":
            vecs[s] = TreeVector({s: abs(mag())})
        elif cfg.shape == "chain-blocks":
            u = s.extend([0] * (2 * i - s.length))
            vecs[s] = TreeVector({u: mag(), u.child(0): mag()})
        else:
            first = s.extend([0, 0])
            width = int(rng.integers(1, 5))
            vecs[s] = TreeVector({Node(first.length, first.bits + j): mag() for j in range(width)})
    return TreeFamily(vecs)


def gen_branch(rng, max_stem: int, max_period: int = 3) -> BranchSpec:
    k = int(rng.integers(0, max_stem + 1))
    stem = Node.from_word(int(b) for b in rng.integers(0, 2, k))
    p = int(rng.integers(1, max_period + 1))
    period = "".join(str(int(b)) for b in rng.integers(0, 2, p))
    return BranchSpec(stem, period)


def gen_baire(cfg: GenConfig) -> BaireOneElement:
    """Finite part like :func:`gen_vector` plus up to ``max_tails`` tails on distinct branches."""
    rng = cfg.rng()
    finite = _vector(rng, cfg)
    ntails = int(rng.integers(0, cfg.max_tails + 1))
    tails = []
    seen = set()
    for _ in range(ntails):
        b = gen_branch(rng, cfg.depth)
        start = int(rng.integers(0, cfg.depth + 1))
        coef = _coef(rng, cfg)
        if b in seen:
            continue
        seen.add(b)
        tails.append(BranchTail(b, start, coef))
    return BaireOneElement(finite, tuple(tails))


def batch(cfg: GenConfig, n: int, **changes) -> list[GenConfig]:
    """n independent configs whose seeds are spawned from ``cfg.seed``."""
    out = []
    for child in np.random.SeedSequence(cfg.seed).spawn(n):
        params = asdict(cfg)
        params.update(changes)
        params["seed"] = int(child.generate_state(1, dtype=np.uint64)[0])
        out.append(GenConfig(**params))
    return out
