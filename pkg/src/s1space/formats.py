"""Text formats: s1vec v1, b1elem v1, atomicmeasure v1, node sets, subtree maps,
domination certificates and family directories.

Blank lines and lines starting with ``#`` are ignored by every parser.
Numbers are printed with 12 significant digits.
"""
from __future__ import annotations

from pathlib import Path
from typing import Iterable, Iterator

from .baire import BaireOneElement, BranchSpec, BranchTail, parse_continuation
from .decomposition import DominationCert, WeightAssignment
from .embedding import TreeFamily
from .errors import ParseError
from .measures import AtomicMeasure
from .tree import Node, SubtreeMap, parse_nodes
from .vectors import TreeVector

S1VEC = "s1vec v1"
B1ELEM = "b1elem v1"
MEASURE = "atomicmeasure v1"
SUBTREE = "subtree v1"
FAMILY_SUFFIX = ".s1v"


def fmt(v) -> str:
    return f"{float(v):.12g}"


def _lines(text: str) -> Iterator[tuple[int, str]]:
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield no, raw


def _tokens(raw: str) -> list[tuple[int, str]]:
    out, col, n = [], 0, len(raw)
    while col < n:
        while col < n and raw[col].isspace():
            col += 1
        start = col
        while col < n and not raw[col].isspace():
            col += 1
        if start < col:
            out.append((start + 1, raw[start:col]))
    return out


def _node(tok, line) -> Node:
    col, text = tok
    try:
        return Node.parse(text)
    except ValueError as e:
        raise ParseError(str(e), line, col) from None


def _number(tok, line) -> float:
    col, text = tok
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"bad number {text!r}", line, col) from None


def _int(tok, line) -> int:
    col, text = tok
    try:
        v = int(text)
    except ValueError:
        raise ParseError(f"bad integer {text!r}", line, col) from None
    if v < 0:
        raise ParseError("expected a nonnegative integer", line, col)
    return v


def _header(lines, expected: str):
    try:
        no, raw = next(lines)
    except StopIteration:
        raise ParseError(f"empty input; expected header {expected!r}", 1, 1) from None
    if raw.strip() != expected:
        raise ParseError(f"expected header {expected!r}, got {raw.strip()!r}", no, 1)


def _arity(toks, n, line, what):
    if len(toks) != n:
        col = toks[n][0] if len(toks) > n else (toks[-1][0] if toks else 1)
        raise ParseError(f"{what} needs {n} fields, got {len(toks)}", line, col)


def _coord_line(toks, no, seen: dict) -> tuple[Node, float]:
    _arity(toks, 2, no, "coordinate line")
    s = _node(toks[0], no)
    if s in seen:
        raise ParseError(f"duplicate node {s} (first on line {seen[s]})", no, toks[0][0])
    seen[s] = no
    return s, _number(toks[1], no)


# ---------------------------------------------------------------- s1vec


def parse_s1vec(text: str) -> TreeVector:
    lines = _lines(text)
    _header(lines, S1VEC)
    seen: dict[Node, int] = {}
    coords = {}
    for no, raw in lines:
        s, v = _coord_line(_tokens(raw), no, seen)
        coords[s] = v
    return TreeVector(coords)


def print_s1vec(x: TreeVector, header: str | None = None) -> str:
    lines = [S1VEC]
    if header:
        lines.append(header)
    lines += [f"{s} {fmt(v)}" for s, v in x.items()]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- b1elem


def _branch(stem_tok, cont_tok, no) -> BranchSpec:
    stem = _node(stem_tok, no)
    try:
        period = parse_continuation(cont_tok[1])
        return BranchSpec(stem, period)
    except ValueError as e:
        raise ParseError(str(e), no, cont_tok[0]) from None


def parse_tail(raw: str, no: int = 1) -> BranchTail:
    toks = _tokens(raw)
    if not toks or toks[0][1] != "tail":
        raise ParseError("expected a tail line", no, toks[0][0] if toks else 1)
    _arity(toks, 5, no, "tail line")
    branch = _branch(toks[1], toks[2], no)
    start = _int(toks[3], no)
    coef = _number(toks[4], no)
    if coef == 0:
        raise ParseError("tail coefficient must be nonzero", no, toks[4][0])
    return BranchTail(branch, start, coef)


def parse_b1elem(text: str) -> BaireOneElement:
    lines = _lines(text)
    _header(lines, B1ELEM)
    seen: dict[Node, int] = {}
    coords = {}
    tails = []
    in_finite = False
    for no, raw in lines:
        toks = _tokens(raw)
        head = toks[0][1]
        if head == "finite" and len(toks) == 1:
            if in_finite or tails:
                raise ParseError("misplaced 'finite' section", no, toks[0][0])
            in_finite = True
        elif head == "tail":
            tails.append(parse_tail(raw, no))
        elif in_finite and not tails:
            s, v = _coord_line(toks, no, seen)
            coords[s] = v
        else:
            raise ParseError(f"unexpected line {raw.strip()!r}", no, toks[0][0])
    return BaireOneElement(TreeVector(coords), tuple(tails))


def print_b1elem(x: BaireOneElement, header: str | None = None) -> str:
    lines = [B1ELEM]
    if header:
        lines.append(header)
    lines.append("finite")
    lines += [f"{s} {fmt(v)}" for s, v in x.finite_part.items()]
    for t in x.tails:
        lines.append(f"tail {t.branch} {t.start_depth} {fmt(t.coef)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- measures


def parse_measure(text: str) -> AtomicMeasure:
    lines = _lines(text)
    _header(lines, MEASURE)
    atoms = {}
    for no, raw in lines:
        toks = _tokens(raw)
        _arity(toks, 3, no, "atom line")
        b = _branch(toks[0], toks[1], no)
        if b in atoms:
            raise ParseError(f"duplicate atom {b}", no, toks[0][0])
        atoms[b] = _number(toks[2], no)
    return AtomicMeasure(atoms)


def print_measure(m: AtomicMeasure) -> str:
    lines = [MEASURE] + [f"{b} {fmt(v)}" for b, v in m.items()]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- node sets and subtrees


def parse_node_set(text: str) -> frozenset[Node]:
    out: dict[Node, int] = {}
    for no, raw in _lines(text):
        toks = _tokens(raw)
        _arity(toks, 1, no, "node-set line")
        s = _node(toks[0], no)
        if s in out:
            raise ParseError(f"duplicate node {s}", no, toks[0][0])
        out[s] = no
    return frozenset(out)


def print_node_set(nodes: Iterable[Node]) -> str:
    return "".join(f"{s}\n" for s in sorted(nodes))


def parse_subtree(text: str) -> SubtreeMap:
    lines = _lines(text)
    _header(lines, SUBTREE)
    seen: dict[Node, int] = {}
    entries = {}
    for no, raw in lines:
        toks = _tokens(raw)
        _arity(toks, 2, no, "subtree line")
        s = _node(toks[0], no)
        if s in seen:
            raise ParseError(f"duplicate index {s}", no, toks[0][0])
        seen[s] = no
        entries[s] = _node(toks[1], no)
    return SubtreeMap(entries)


def print_subtree(m: SubtreeMap) -> str:
    lines = [SUBTREE] + [f"{s} {m[s]}" for s in m]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- certificates


def parse_domination_cert(text: str) -> DominationCert:
    lines = list(_lines(text))
    if not lines:
        raise ParseError("empty certificate", 1, 1)
    no, raw = lines[0]
    if not raw.startswith("antichain "):
        raise ParseError("expected 'antichain {...}'", no, 1)
    try:
        antichain = parse_nodes(raw[len("antichain "):])
    except ValueError as e:
        raise ParseError(str(e), no, len("antichain ") + 1) from None
    branches = {}
    lhs = rhs = None
    for no, raw in lines[1:]:
        if raw.startswith("branch "):
            head, _, rest = raw[len("branch "):].partition(":")
            t = _node((len("branch ") + 1, head.strip()), no)
            branches[t] = tuple(_node(tok, no) for tok in _tokens(rest))
        elif raw.startswith("lhs="):
            toks = _tokens(raw)
            _arity(toks, 2, no, "lhs/rhs line")
            if not toks[1][1].startswith("rhs="):
                raise ParseError("expected rhs=", no, toks[1][0])
            lhs = _number((toks[0][0], toks[0][1][4:]), no)
            rhs = _number((toks[1][0], toks[1][1][4:]), no)
        else:
            raise ParseError(f"unexpected line {raw.strip()!r}", no, 1)
    if lhs is None:
        raise ParseError("missing lhs/rhs line", lines[-1][0], 1)
    n = max((len(b) - 1 for b in branches.values()), default=0)
    return DominationCert(antichain, branches, lhs, rhs, n)


# ---------------------------------------------------------------- family directories


def read_family_dir(path) -> TreeFamily:
    path = Path(path)
    if not path.is_dir():
        raise ParseError(f"{path} is not a directory")
    vecs = {}
    for f in sorted(path.glob("*" + FAMILY_SUFFIX)):
        try:
            s = Node.parse(f.name[: -len(FAMILY_SUFFIX)])
        except ValueError as e:
            raise ParseError(f"{f.name}: {e}") from None
        try:
            vecs[s] = parse_s1vec(f.read_text())
        except ParseError as e:
            raise ParseError(f"{f.name}: {e}") from None
    if not vecs:
        raise ParseError(f"{path} holds no *{FAMILY_SUFFIX} files")
    try:
        return TreeFamily(vecs)
    except ValueError as e:
        raise ParseError(str(e)) from None


def write_family_dir(f: TreeFamily, path, header: str | None = None) -> None:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    for s in f:
        (path / f"{s}{FAMILY_SUFFIX}").write_text(print_s1vec(f[s], header))


def read_operator_dir(path) -> dict[Node, TreeVector]:
    return dict(read_family_dir(path).vectors)


def read_weights(lam_text: str, alpha_text: str, n: int) -> WeightAssignment:
    lam, alpha = parse_s1vec(lam_text), parse_s1vec(alpha_text)
    try:
        return WeightAssignment(lam.coords, alpha.coords, n)
    except ValueError as e:
        raise ParseError(str(e)) from None
