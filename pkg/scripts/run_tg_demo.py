"""Run the operator pipeline on the built-in operators and print each report."""

import argparse

from s1space.embedding import builtin_operator, run_tg_demo
from s1space.errors import DensityTooLow


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, default=3)
    ap.add_argument("--rho", type=float, default=0.5)
    ap.add_argument("--ops", nargs="+", default=["identity", "half", "collapse"])
    args = ap.parse_args()

    for name in args.ops:
        print(f"=== {name}")
        try:
            rep = run_tg_demo(builtin_operator(name, args.N), args.rho, N=args.N)
        except DensityTooLow as e:
            print(e.report.to_text(), end="")
            print("density_too_low")
            continue
        print(rep.to_text(), end="")


if __name__ == "__main__":
    main()
