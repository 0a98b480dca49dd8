"""Compare norm_sp against the brute-force oracle over a seeded sweep.

Prints one row per (depth, p) with the instance count and the largest
absolute discrepancy seen.
"""

import argparse

from s1space.generators import GenConfig, batch, gen_vector
from s1space.vectors import brute_norm, norm_sp


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--max-depth", type=int, default=4)
    args = ap.parse_args()

    print(f"{'depth':>5} {'p':>4} {'count':>6} {'max |diff|':>12}")
    for depth in range(args.max_depth + 1):
        cfgs = batch(GenConfig(seed=args.seed, depth=depth, density=0.6), args.count)
        xs = [gen_vector(c) for c in cfgs]
        for p in (1.0, 1.5, 2.0):
            diff = max((abs(float(norm_sp(x, p).value) - brute_norm(x, p)) for x in xs), default=0.0)
            print(f"{depth:>5} {p:>4} {len(xs):>6} {diff:>12.3g}")


if __name__ == "__main__":
    main()
