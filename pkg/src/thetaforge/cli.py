"""Command-line frontend.

Subcommands: expand, verify, decompose, cosets, search, solve-exponents.
Every numeric input is exact; rationals are written ``p/q``.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from fractions import Fraction
from typing import List, Optional, Sequence

from . import corpus, lattice
from .decompose import DecompositionError, decompose_full
from .expr import DslError, format_combo, lower_expr, parse_expr
from .theta import Side, ThetaFactor, expand_combo, expand_side

CHECK_ORDER = 30
_RATIONAL = re.compile(r"^[+-]?\d+(/\d+)?$")


class CliError(Exception):
    pass


def exact(text: str) -> Fraction:
    """Parse an integer or ``p/q``; decimals and floats are refused."""
    text = text.strip()
    if not _RATIONAL.match(text):
        raise argparse.ArgumentTypeError(f"not an exact rational: {text!r}")
    try:
        return Fraction(text)
    except ZeroDivisionError:
        raise argparse.ArgumentTypeError(f"zero denominator in {text!r}") from None


def nonneg_order(text: str) -> Fraction:
    v = exact(text)
    if v < 0:
        raise argparse.ArgumentTypeError("order must be nonnegative")
    return v


def int_list(text: str) -> List[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def rat_list(text: str) -> List[Fraction]:
    return [exact(x) for x in text.split(",") if x.strip()]


def matrix_arg(text: str) -> List[List[int]]:
    """``"1,1;-1,1"`` -> ``[[1, 1], [-1, 1]]``; must be square."""
    rows = [r for r in text.split(";")]
    try:
        m = [[int(x) for x in r.replace(" ", "").split(",")] for r in rows]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad matrix {text!r}: entries must be integers") from None
    n = len(m)
    if n == 0 or any(len(r) != n for r in m):
        raise argparse.ArgumentTypeError(f"matrix {text!r} is not square")
    return m


def _fmt(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _fmt_matrix(m) -> str:
    return "[" + "; ".join(", ".join(str(v) for v in row) for row in m) + "]"


def _emit(args, text: str, data) -> None:
    if args.format == "structured":
        print(json.dumps(data, sort_keys=True, indent=2))
    else:
        print(text)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_expand(args) -> int:
    side = lower_expr(parse_expr(args.expr))
    s = expand_side(side, args.order)
    data = {
        "order": _fmt(args.order),
        "terms": [{"qexp": _fmt(qe), "vexp": {k: _fmt(v) for k, v in ve}, "coeff": c}
                  for (qe, ve), c in s.items()],
    }
    _emit(args, str(s), data)
    return 0


def cmd_verify(args) -> int:
    if args.all == bool(args.names):
        raise CliError("give either entry names or --all")
    path = args.corpus
    if args.all:
        reports = corpus.verify_all(args.order, path=path, jobs=args.jobs)
    else:
        entries = [corpus.lookup(n, path) for n in args.names]
        reports = [corpus.verify(e, args.order) for e in entries]
    counts = corpus.summarize(reports)
    if args.format == "structured":
        print(json.dumps([r.as_dict() for r in reports], sort_keys=True, indent=2))
    else:
        for r in reports:
            if r.status == "pass":
                print(r.line())
        disc = [r for r in reports if r.status == "paper-discrepancy"]
        if disc:
            print("\nliteral form fails, corrected form passes:")
            for r in disc:
                print(r.line())
        fails = [r for r in reports if r.status == "fail"]
        if fails:
            print("\nfailures:")
            for r in fails:
                print(r.line())
        print(f"\n{counts['pass']} pass, {counts['paper-discrepancy']} paper-discrepancy, "
              f"{counts['fail']} fail, {counts['total']} total")
    return 1 if counts["fail"] else 0


def _product_factors(side: Side) -> List[ThetaFactor]:
    c = side.combo
    if side.ops or len(c.terms) != 1:
        raise CliError("decompose needs a single product of theta functions")
    t = c.terms[0]
    if t.denominators or t.scale != 1 or t.coeff.sign != 1 or t.coeff.qexp != 0 or t.coeff.vexp:
        raise CliError("decompose needs a bare product with no coefficient")
    if not all(isinstance(f, ThetaFactor) for f in t.factors):
        raise CliError("decompose only accepts f(a,b)-type factors")
    return list(t.factors)


def cmd_decompose(args) -> int:
    side = lower_expr(parse_expr(args.expr))
    factors = _product_factors(side)
    if args.weights is not None:
        got = [f.weight for f in factors]
        if len(args.weights) != len(got) or any(Fraction(w) != Fraction(g) for w, g in zip(args.weights, got)):
            raise CliError("weights " + ",".join(_fmt(w) for w in args.weights)
                           + " disagree with the factor weights " + ",".join(_fmt(g) for g in got))
    d = decompose_full(factors, args.matrix, reps=args.reps)
    direct = expand_side(side, CHECK_ORDER)
    split = expand_combo(d.combo, CHECK_ORDER)
    mm = direct.first_mismatch(split, CHECK_ORDER)
    text = format_combo(d.combo)
    stamp = f"verified to order {CHECK_ORDER}" if mm is None else f"MISMATCH at q^{_fmt(mm[0])}"
    data = {
        "combo": text,
        "reps": [list(r) for r in d.cosets.reps],
        "kind": d.cosets.kind,
        "note": d.note,
        "verified": mm is None,
        "check_order": CHECK_ORDER,
    }
    lines = [text, f"# {d.note}", f"# {stamp}"]
    _emit(args, "\n".join(lines), data)
    return 0 if mm is None else 1


def cmd_cosets(args) -> int:
    B = args.matrix
    d = lattice.det(B)
    if d == 0:
        raise CliError("matrix is singular")
    sd = lattice.smith(B)
    cs = lattice.cosets(B)
    chain = all(sd.sk[i + 1] % sd.sk[i] == 0 for i in range(len(sd.sk) - 1))
    data = {
        "det": d,
        "reps": [list(r) for r in cs.reps],
        "smith_diagonal": sd.sk,
        "determinantal_divisors": sd.dk[1:],
        "U": sd.U,
        "V": sd.V,
        "divisibility_chain": chain,
    }
    text = "\n".join([
        f"det {d}",
        f"{len(cs.reps)} representatives: " + " ".join("(" + ",".join(map(str, r)) + ")" for r in cs.reps),
        "Smith diagonal diag(" + ", ".join(map(str, sd.sk)) + ")"
        + ("  (each divides the next)" if chain else ""),
        f"U {_fmt_matrix(sd.U)}",
        f"V {_fmt_matrix(sd.V)}",
    ])
    _emit(args, text, data)
    return 0


def cmd_search(args) -> int:
    found = lattice.search_orthogonal(args.n, args.l, args.bound, args.max_det)
    rows = []
    for M in found:
        rep = lattice.check_orthogonal(M, args.l)
        rows.append({"matrix": M, "det": lattice.det(M), "diagonal": [_fmt(x) for x in rep.diagonal]})
    text = "\n".join(f"det {r['det']:<4} {_fmt_matrix(r['matrix'])}  diag {','.join(r['diagonal'])}"
                     for r in rows) or "no matrices found"
    _emit(args, text, rows)
    return 0


def cmd_solve(args) -> int:
    sols = lattice.solve_exponent_system(args.targets, args.bound)
    rows = [{"l": list(l), "matrix": M} for l, M in sols]
    text = "\n".join(f"l=({','.join(map(str, r['l']))})  B={_fmt_matrix(r['matrix'])}" for r in rows) \
        or "no solutions"
    _emit(args, text, rows)
    return 0


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "structured"), default="text")
    common.add_argument("--corpus", default=None, help="corpus file or directory (overrides THETAFORGE_CORPUS)")

    p = argparse.ArgumentParser(prog="thetaforge", description="Exact theta-function identity toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("expand", parents=[common], help="expand an expression as a q-series")
    s.add_argument("expr")
    s.add_argument("--order", type=nonneg_order, default=Fraction(20))
    s.set_defaults(func=cmd_expand)

    s = sub.add_parser("verify", parents=[common], help="check corpus identities")
    s.add_argument("names", nargs="*")
    s.add_argument("--all", action="store_true")
    s.add_argument("--order", type=nonneg_order, default=None, help="default: each entry's own hint")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("decompose", parents=[common], help="split a theta product along a lattice")
    s.add_argument("expr")
    s.add_argument("--matrix", type=matrix_arg, required=True)
    s.add_argument("--weights", type=rat_list, default=None)
    s.add_argument("--reps", choices=("theorem", "general"), default=None)
    s.set_defaults(func=cmd_decompose)

    s = sub.add_parser("cosets", parents=[common], help="coset representatives and Smith data")
    s.add_argument("--matrix", type=matrix_arg, required=True)
    s.set_defaults(func=cmd_cosets)

    s = sub.add_parser("search", parents=[common], help="enumerate orthogonal integer matrices")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--l", type=rat_list, required=True)
    s.add_argument("--bound", type=int, required=True)
    s.add_argument("--max-det", type=int, required=True)
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("solve-exponents", parents=[common], help="find (l, B) with prescribed diagonal")
    s.add_argument("--targets", type=int_list, required=True)
    s.add_argument("--bound", type=int, required=True)
    s.set_defaults(func=cmd_solve)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        print("thetaforge: error: --jobs must be at least 1", file=sys.stderr)
        return 2
    if args.command == "search" and len(args.l) != args.n:
        print("thetaforge: error: --l needs exactly n weights", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (CliError, DslError, DecompositionError, KeyError, ValueError) as err:
        msg = err.args[0] if isinstance(err, KeyError) and err.args else err
        print(f"thetaforge: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
