"""Time decompose on random weights for growing tree depth.

The dynamic program touches each node a bounded number of times, so the
per-node column should stay within a small factor as n grows.
"""

import argparse
import time

from s1space.decomposition import decompose
from s1space.generators import GenConfig, gen_weights


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--depths", type=int, nargs="+", default=[6, 8, 10, 12, 14])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    print(f"{'n':>3} {'nodes':>7} {'best s':>9} {'us/node':>8}")
    for n in args.depths:
        w = gen_weights(GenConfig(seed=args.seed, depth=n, lo=0.0, hi=1.0, density=0.7))
        best = float("inf")
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            decompose(w)
            best = min(best, time.perf_counter() - t0)
        size = 2 ** (n + 1) - 1
        print(f"{n:>3} {size:>7} {best:>9.4f} {1e6 * best / size:>8.2f}")


if __name__ == "__main__":
    main()
