"""``s1``: batch front end.

Exit codes: 0 on success (a failed subtree search is a successful answer),
1 when a mathematical verification fails, 2 on parse or usage errors.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import formats
from .baire import b1_norm, distance_to_s1, parse_continuation
from .decomposition import decompose, dominate_with_c
from .embedding import (
    ContinuationRule,
    ProjectionSpec,
    apply_projection,
    blockify,
    build_projection,
    builtin_operator,
    certify_equivalence,
    dense_subtree_search,
    nonsep_certificate,
    run_tg_demo,
)
from .errors import DensityTooLow, ParseError, S1Error, VerificationError
from .generators import SHAPES, GenConfig, gen_baire, gen_family, gen_vector, gen_weights
from .measures import AtomicMeasure, ldom_threshold, measure_distance, measure_of, singular_separation
from .tree import format_nodes
from .vectors import SignedFunctional, TreeVector, norm_sp, restrict

EXIT_OK, EXIT_VERIFY, EXIT_USAGE = 0, 1, 2


class UsageError(S1Error):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _write(path, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as e:
        raise UsageError(f"cannot write {path}: {e.strerror}") from None


def _measure_input(path: str) -> AtomicMeasure:
    text = _read(path)
    first = next((ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")), "")
    if first == formats.B1ELEM:
        return measure_of(formats.parse_b1elem(text))
    return formats.parse_measure(text)


def _fmt(v) -> str:
    return formats.fmt(v)


# ---------------------------------------------------------------- commands


def cmd_norm(a):
    x = formats.parse_s1vec(_read(a.file))
    cert = norm_sp(x, a.p)
    print(_fmt(cert.value))
    print(f"witness {format_nodes(cert.witness)}")
    if a.cert:
        _write(a.cert, formats.print_node_set(cert.witness))


def cmd_restrict(a):
    x = formats.parse_s1vec(_read(a.file))
    if a.set is not None:
        D = formats.parse_node_set(_read(a.set))
    elif a.min_level is not None:
        k = a.min_level
        D = lambda s: s.length >= k  # noqa: E731
    else:
        raise UsageError("restrict needs --set or --min-level")
    sys.stdout.write(formats.print_s1vec(restrict(x, D)))


def _weights(a):
    return formats.read_weights(_read(a.lam), _read(a.alpha), a.depth)


def cmd_decompose(a):
    w = _weights(a)
    cert = decompose(w)
    text = cert.to_text()
    sys.stdout.write(text)
    if a.cert:
        _write(a.cert, text)
    problems = cert.problems(w)
    if problems:
        raise VerificationError("; ".join(problems))


def cmd_dominate(a):
    w = _weights(a)
    A = dominate_with_c(w, a.C)
    total = sum(w.lam[t] for t in A)
    print(f"antichain {format_nodes(A)}")
    print(f"lhs={_fmt(w.lhs())} bound={_fmt(a.C * total)}")
    if a.cert:
        _write(a.cert, formats.print_node_set(A))


def cmd_measure(a):
    x = formats.parse_b1elem(_read(a.file))
    mu = measure_of(x, check=not a.no_check)
    sys.stdout.write(formats.print_measure(mu))
    if a.verbose:
        print(f"# b1_norm={_fmt(b1_norm(x))} distance_to_s1={_fmt(distance_to_s1(x))} "
              f"D*={x.reduction_depth}")


def cmd_tvdist(a):
    print(_fmt(measure_distance(_measure_input(a.m1), _measure_input(a.m2))))


def cmd_ldom(a):
    x = formats.parse_b1elem(_read(a.file))
    print(ldom_threshold(x, a.eps))


def cmd_separate(a):
    ms = [_measure_input(p) for p in a.measures]
    for i, o in enumerate(singular_separation(ms, a.eps)):
        print(f"O{i + 1} {o}")


def _family(path):
    return formats.read_family_dir(path)


def cmd_certify(a):
    f = _family(a.dir)
    cert = certify_equivalence(f, samples=a.samples, seed=a.seed)
    print(f"K={_fmt(cert.K)} c={_fmt(cert.c)} C={_fmt(cert.C)} depth={cert.depth} "
          f"exact={'yes' if cert.exact else 'bound'}")
    if a.cert:
        _write(a.cert, cert.to_text())


def cmd_project(a):
    f = _family(a.dir)
    x = formats.parse_s1vec(_read(a.x))
    p = build_projection(ProjectionSpec(f, {s: SignedFunctional.norming(f[s]) for s in f}))
    px = apply_projection(p, x)
    sys.stdout.write(formats.print_s1vec(px))
    print(f"# c={_fmt(p.c)} C={_fmt(p.C)} bound C/c={_fmt(p.C / p.c)}")


def cmd_blockify(a):
    f = _family(a.dir)
    horizon = a.horizon if a.horizon is not None else f.depth
    zero = TreeVector()
    res = blockify(lambda s: f.vectors.get(s, zero), a.delta, a.depth, horizon)
    print(f"error_sum={_fmt(res.error_sum)}")
    sys.stdout.write(formats.print_subtree(res.subtree))
    if a.out:
        formats.write_family_dir(res.family, a.out)
        _write(Path(a.out) / "subtree.txt", formats.print_subtree(res.subtree))


def cmd_nonsep(a):
    f = _family(a.dir)
    rule = ContinuationRule(parse_continuation(a.cont))
    cert = nonsep_certificate(f, a.rho, a.depth, rule)
    print(f"row constants: {' '.join(_fmt(v) for v in cert.row_constants)}")
    print(f"min pairwise distance: {_fmt(cert.min_distance)}")
    for sigma, m in cert.items:
        print(f"sigma {sigma}")
        sys.stdout.write(formats.print_measure(m))
    if a.cert:
        d = Path(a.cert)
        d.mkdir(parents=True, exist_ok=True)
        for i, (_, m) in enumerate(cert.items):
            _write(d / f"measure{i}.meas", formats.print_measure(m))


def cmd_subtree(a):
    D = formats.parse_node_set(_read(a.set))
    m = dense_subtree_search(D, a.target_depth, a.max_depth)
    if m is None:
        print("failure: no regular subtree")
        return
    sys.stdout.write(formats.print_subtree(m))
    if a.cert:
        _write(a.cert, formats.print_subtree(m))


def cmd_demo_tg(a):
    if a.operator:
        T = formats.read_operator_dir(a.operator)
    else:
        T = builtin_operator(a.builtin, a.N)
    rule = ContinuationRule(parse_continuation(a.cont))
    try:
        rep = run_tg_demo(T, a.rho, a.N if a.operator is None else None, a.target_depth, rule)
    except DensityTooLow as e:
        if e.report is not None:
            sys.stdout.write(e.report.to_text())
        print("density_too_low")
        raise
    sys.stdout.write(rep.to_text())
    if a.cert_dir:
        d = Path(a.cert_dir)
        d.mkdir(parents=True, exist_ok=True)
        _write(d / "report.txt", rep.to_text())
        _write(d / "dense_set.txt", formats.print_node_set(rep.dense_set))
        if rep.subtree is not None:
            _write(d / "subtree.txt", formats.print_subtree(rep.subtree))
        if rep.nonsep is not None:
            for i, (_, m) in enumerate(rep.nonsep.items):
                _write(d / f"measure{i}.meas", formats.print_measure(m))


def cmd_gen(a):
    cfg = GenConfig(seed=a.seed, depth=a.depth, density=a.density, lo=a.lo, hi=a.hi,
                    shape=a.shape, max_tails=a.max_tails)
    head = cfg.header()
    if a.kind == "vector":
        text = formats.print_s1vec(gen_vector(cfg), head)
    elif a.kind == "baire":
        text = formats.print_b1elem(gen_baire(cfg), head)
    elif a.kind == "family":
        if not a.out:
            raise UsageError("gen family needs --out DIR")
        formats.write_family_dir(gen_family(cfg), a.out, head)
        return
    else:
        if not a.out:
            raise UsageError("gen weights needs --out PREFIX")
        w = gen_weights(cfg)
        _write(f"{a.out}.lam.s1v", formats.print_s1vec(TreeVector(w.lam), head))
        _write(f"{a.out}.alpha.s1v", formats.print_s1vec(TreeVector(w.alpha), head))
        return
    if a.out:
        _write(a.out, text)
    else:
        sys.stdout.write(text)


def cmd_selftest(a):
    from . import selftest

    _, failed = selftest.run(verbose=not a.quiet)
    if failed:
        raise VerificationError(f"{failed} selftest checks failed")


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="s1", description="Finite certificates for the stopping-time space S^1.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("norm", help="exact S^p norm with witness antichain")
    p.add_argument("file")
    p.add_argument("-p", type=float, default=1.0)
    p.add_argument("--cert")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("restrict", help="restrict a vector to a node set")
    p.add_argument("file")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--set")
    g.add_argument("--min-level", type=int)
    p.set_defaults(func=cmd_restrict)

    helps = {"decompose": "antichain/branch domination certificate",
             "dominate": "antichain A with Σλα <= C·Σ_A λ under a branch-sum bound C"}
    for name, func in (("decompose", cmd_decompose), ("dominate", cmd_dominate)):
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("lam")
        p.add_argument("alpha")
        p.add_argument("--depth", type=int, required=True)
        if name == "dominate":
            p.add_argument("-C", type=float, required=True)
        p.add_argument("--cert")
        p.set_defaults(func=func)

    p = sub.add_parser("measure", help="atomic measure of a Baire-1 element")
    p.add_argument("file")
    p.add_argument("--no-check", action="store_true")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("tvdist", help="distance between two measures in the sup-over-Borel-sets norm")
    p.add_argument("m1")
    p.add_argument("m2")
    p.set_defaults(func=cmd_tvdist)

    p = sub.add_parser("ldom", help="level threshold for a Baire-1 element")
    p.add_argument("file")
    p.add_argument("--eps", type=float, required=True)
    p.set_defaults(func=cmd_ldom)

    p = sub.add_parser("separate", help="disjoint clopen sets for singular measures")
    p.add_argument("measures", nargs="+")
    p.add_argument("--eps", type=float, default=1e-6)
    p.set_defaults(func=cmd_separate)

    p = sub.add_parser("certify", help="basis-equivalence constants of a block family")
    p.add_argument("dir")
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cert")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("project", help="apply the projection onto a block family's span")
    p.add_argument("dir")
    p.add_argument("x")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("blockify", help="sliding-hump block extraction")
    p.add_argument("dir")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--horizon", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_blockify)

    p = sub.add_parser("nonsep", help="nonseparability certificate for a block family")
    p.add_argument("dir")
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--depth", type=int)
    p.add_argument("--cont", default="0*")
    p.add_argument("--cert")
    p.set_defaults(func=cmd_nonsep)

    p = sub.add_parser("subtree", help="regular dyadic subtree inside a node set")
    p.add_argument("--set", required=True)
    p.add_argument("--target-depth", type=int, required=True)
    p.add_argument("--max-depth", type=int)
    p.add_argument("--cert")
    p.set_defaults(func=cmd_subtree)

    p = sub.add_parser("demo-tg", help="operator pipeline at desk scale")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--operator")
    g.add_argument("--builtin", choices=("identity", "half", "collapse"))
    p.add_argument("--N", type=int, default=3)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--target-depth", type=int)
    p.add_argument("--cont", default="0*")
    p.add_argument("--cert-dir")
    p.set_defaults(func=cmd_demo_tg)

    p = sub.add_parser("gen", help="seeded random instances")
    p.add_argument("kind", choices=("vector", "family", "baire", "weights"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--lo", type=float, default=-1.0)
    p.add_argument("--hi", type=float, default=1.0)
    p.add_argument("--shape", choices=SHAPES, default="diagonal")
    p.add_argument("--max-tails", type=int, default=3)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("selftest", help="run the bundled invariant checks")
    p.add_argument("-q", "--quiet", action="store_true")
    p.set_defaults(func=cmd_selftest)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        args.func(args)
    except VerificationError as e:
        print(f"verification failed: {e}", file=sys.stderr)
        return EXIT_VERIFY
    except (ParseError, UsageError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, S1Error) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
