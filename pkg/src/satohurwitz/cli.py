"""Command line driver.

Exit codes: 0 every check passed, 1 some check failed, 2 some check was
inconclusive at the working depth, 3 usage errors, 4 unreadable input files.
"""

from __future__ import annotations

import argparse
import ast
import sys
from pathlib import Path

from .grassmannian import (
    format_point,
    index,
    is_algebra_point,
    is_hurwitz_point,
    parse_point,
    perp,
    polynomial_point,
    vacuum_point,
)
from .krichever import build_point, catalog, parse_cover, perturbed_laurent
from .report import PASS, Report, exit_code
from .series import DepthError

EXIT_USAGE = 3
EXIT_PARSE = 4

CATALOG = ("laurent-n2", "laurent-n3", "hyperelliptic", "perturbed-laurent", "vacuum", "trivial")


class UsageError(Exception):
    pass


class ParseError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- inputs ----------------------------------------------------------------------------

def _read(path):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _parse_file(path, parser):
    text = _read(path)
    try:
        return parser(text)
    except (ValueError, SyntaxError, KeyError) as exc:
        raise ParseError(f"{path}: {exc}") from None


def _ram(text):
    from .walgebra import RamificationData

    try:
        return RamificationData.of(ast.literal_eval(text))
    except (ValueError, SyntaxError, TypeError) as exc:
        raise UsageError(f"--ram: {exc}") from None


def _spec(args):
    if getattr(args, "cover", None):
        return _parse_file(args.cover, parse_cover)
    name = getattr(args, "catalog", None)
    if name in (None, "vacuum", "trivial"):
        return None
    if name == "perturbed-laurent":
        return perturbed_laurent(S=args.depth)
    return next(s for s in catalog() if s.label == name)


def _point(args, which="point"):
    path = getattr(args, which, None)
    if path:
        return _parse_file(path, parse_point)
    if getattr(args, "catalog", None) in ("vacuum", "trivial"):
        ram = _ram(args.ram)
        make = vacuum_point if args.catalog == "vacuum" else polynomial_point
        return make(ram, args.depth, 2 * args.depth).with_label(args.catalog)
    spec = _spec(args)
    if spec is None:
        raise UsageError("give a point with --point, --cover or --catalog")
    return build_point(spec, args.depth)


def _emit(args, text):
    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _config(args):
    keys = ("command", "action", "depth", "time_degree", "order", "catalog", "cover", "point", "variant")
    items = [f"{k}={getattr(args, k)}" for k in keys if getattr(args, k, None) not in (None, False)]
    return "# config: " + " ".join(items)


def _report(args, reports):
    lines = [_config(args)]
    for r in reports:
        lines.append(r.render())
    sys.stdout.write("\n".join(lines) + "\n")
    return exit_code(reports)


class _Status:
    """Adapter giving residue reports the ``status`` used by :func:`exit_code`."""

    def __init__(self, status):
        self.status = status


# -- commands ----------------------------------------------------------------------------------

def cmd_point(args):
    U = _point(args)
    if args.action == "build":
        _emit(args, format_point(U))
        return 0
    rep = Report("point_verify")
    rep.data.update(index=index(U), S=U.S, H=U.H, rows=len(U.rows))
    rep.merge(is_algebra_point(U))
    rep.merge(is_hurwitz_point(U))
    return _report(args, [rep])


def cmd_tau(args):
    from .tau_ba import tau

    U = _point(args)
    res = tau(U, args.time_degree, args.window)
    v = ", ".join(f"{k[0]},{k[1]}:{e}" for k, e in sorted(res.v.items()))
    sys.stdout.write(f"{_config(args)}\n# normalizer {v}\n# window {res.N}\n{res.poly.to_literal()}\n")
    return 0


def cmd_ba(args):
    from .tau_ba import ba, ba_expansion_check
    from .timepoly import format_monomial

    U = _point(args)
    keys = U.ram.keys
    sheet = tuple(int(x) for x in args.sheet.split(",")) if args.sheet else keys[0]
    if sheet not in keys:
        raise UsageError(f"--sheet {args.sheet}: not a component key of {U.ram.header()}")
    psi = ba(U, sheet, args.time_degree)
    lines = [_config(args), f"# psi_{sheet[0]},{sheet[1]} coefficients of u^-1 v psi by time monomial"]
    for mono in psi.time_monomials():
        x = psi.coefficient(mono)
        if x.is_zero():
            continue
        name = format_monomial(mono) or "1"
        lines.append(f"{name}\t" + " | ".join(s.to_literal() for s in x.parts))
    rep = ba_expansion_check(U, args.time_degree, [psi] if args.sheet else None)
    lines.append(rep.render())
    sys.stdout.write("\n".join(lines) + "\n")
    return exit_code([rep])


def cmd_bilinear(args):
    from .hierarchy import bilinear_residue

    U = _point(args)
    U2 = _point(args, "point2") if args.point2 else U
    res = bilinear_residue(U, U2, args.time_degree)
    sys.stdout.write(f"{_config(args)}\n{res.render()}\n")
    return exit_code([_Status(res.status)])


def cmd_ekp(args):
    from .hierarchy import ekp_scan

    B = _point(args)
    res = ekp_scan(B, args.time_degree, args.variant, merge_branches=args.merge_branches,
                   same_times=args.same_times)
    sys.stdout.write(f"{_config(args)}\n{res.render()}\n")
    return exit_code([_Status(res.status)])


def cmd_perp(args):
    U = _point(args)
    P = perp(U)
    if args.out:
        _emit(args, format_point(P))
    ram = U.ram
    rep = Report("perp")
    want = ram.rbar - ram.r * ram.n - index(U)
    rep.data.update(index=index(U), perp_index=index(P), S=P.S, H=P.H)
    if index(P) != want:
        rep.fail(f"index of the complement is {index(P)}, expected {want}")
    if not args.out:
        sys.stdout.write(format_point(P))
    return _report(args, [rep])


def cmd_tangent(args):
    from .tangent import certify_local_transitivity, certify_restriction_injectivity

    U = _point(args)
    if args.action == "transitivity":
        rep = certify_local_transitivity(U, args.order, with_trace=not args.no_trace)
    else:
        rep = certify_restriction_injectivity(U, args.order)
    return _report(args, [rep])


def _pic(args):
    from .picard import build_pic_point, parse_divisor, parse_pic

    if args.pic:
        return _parse_file(args.pic, parse_pic)
    spec = _spec(args)
    if spec is None:
        raise UsageError("give a module point with --pic, --cover or --catalog")
    try:
        divisor = parse_divisor(args.divisor)
    except ValueError as exc:
        raise UsageError(f"--divisor: {exc}") from None
    return build_pic_point(spec, divisor, args.depth)


def cmd_pic(args):
    from .picard import certify_pic_transitivity, check_stabilizer, format_pic, stabilizer, verify_pic_point

    p = _pic(args)
    if args.action == "build":
        rep = verify_pic_point(p)
        if args.out:
            _emit(args, format_pic(p))
        return _report(args, [rep])
    if args.action == "stabilizer":
        rep = check_stabilizer(p)
        if args.out:
            _emit(args, format_point(stabilizer(p.L)))
        return _report(args, [rep])
    rep = certify_pic_transitivity(p, args.order, with_gamma=not args.no_gamma)
    return _report(args, [rep])


def cmd_selftest(args):
    from .acceptance import CHECKS, run_checks

    names = [n.strip() for n in args.only.split(",")] if args.only else None
    unknown = sorted(set(names or ()) - {c.name for c in CHECKS})
    if unknown:
        raise UsageError(f"unknown check(s): {', '.join(unknown)}")
    reports = []
    sys.stdout.write(_config(args) + "\n")
    for check, rep, secs in run_checks(names, S=args.depth_given, D=args.time_degree_given):
        reports.append(rep)
        sys.stdout.write(f"{rep.status:<13}{check.name:<14}{secs:8.1f}s\n")
        if args.verbose or rep.status != PASS:
            sys.stdout.write("\n".join("    " + ln for ln in rep.render().splitlines()) + "\n")
        sys.stdout.flush()
    return exit_code(reports)


# -- parser ------------------------------------------------------------------------------------------

def _common(p, point=True):
    p.add_argument("--depth", "-S", type=int, default=30, help="point depth in levels (default 30)")
    p.add_argument("--time-degree", "-D", type=int, default=3, help="weighted time degree (default 3)")
    p.add_argument("--order", "-K", type=int, default=12, help="vector field order (default 12)")
    if point:
        src = p.add_mutually_exclusive_group()
        src.add_argument("--point", help="point file")
        src.add_argument("--cover", help="cover description file")
        src.add_argument("--catalog", choices=CATALOG, help="built-in cover or reference point")
        p.add_argument("--ram", default="[[1]]", help="partitions for --catalog vacuum/trivial")
    p.add_argument("--out", "-o", help="write the produced file here")


def build_parser():
    parser = _Parser(prog="satohurwitz", description="Exact windowed Sato Grassmannian models of Hurwitz schemes.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("point", help="build or verify a point")
    p.add_argument("action", choices=("build", "verify"))
    _common(p)
    p.set_defaults(func=cmd_point)

    p = sub.add_parser("tau", help="normalized tau function")
    _common(p)
    p.add_argument("--window", type=int, default=None, help="determinant window in levels")
    p.set_defaults(func=cmd_tau)

    p = sub.add_parser("ba", help="Baker-Akhiezer coefficients and the basis check")
    _common(p)
    p.add_argument("--sheet", help="component key 'i,j' (default: all for the check, first for the listing)")
    p.set_defaults(func=cmd_ba)

    p = sub.add_parser("bilinear", help="bilinear identity residues")
    _common(p)
    p.add_argument("--point2", help="second point file (default: the first point)")
    p.set_defaults(func=cmd_bilinear)

    p = sub.add_parser("ekp", help="E-KP residue table")
    _common(p)
    p.add_argument("--variant", choices=("adjoint", "literal"), default="adjoint")
    p.add_argument("--merge-branches", action="store_true", help="one variable z for every branch")
    p.add_argument("--same-times", action="store_true", help="identify the two time sets")
    p.set_defaults(func=cmd_ekp)

    p = sub.add_parser("perp", help="orthogonal complement")
    _common(p)
    p.set_defaults(func=cmd_perp)

    p = sub.add_parser("tangent", help="tangent space certificates")
    p.add_argument("action", choices=("transitivity", "injectivity"))
    _common(p)
    p.add_argument("--no-trace", action="store_true", help="drop the trace conditions (negative control)")
    p.set_defaults(func=cmd_tangent)

    p = sub.add_parser("pic", help="module points over algebra points")
    p.add_argument("action", choices=("build", "stabilizer", "transitivity"))
    _common(p, point=False)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--pic", help="module point file")
    src.add_argument("--cover", help="cover description file")
    src.add_argument("--catalog", choices=CATALOG[:3])
    p.add_argument("--divisor", default="", help="'b:d,...' (Laurent) or 'z0;y0:d,...' (hyperelliptic)")
    p.add_argument("--no-gamma", action="store_true", help="drop the multiplication block (negative control)")
    p.set_defaults(func=cmd_pic)

    p = sub.add_parser("selftest", help="run the acceptance checks")
    p.add_argument("--depth", "-S", type=int, default=None, dest="depth_given")
    p.add_argument("--time-degree", "-D", type=int, default=None, dest="time_degree_given")
    p.add_argument("--only", help="comma separated check names")
    p.add_argument("--verbose", "-v", action="store_true")
    p.set_defaults(func=cmd_selftest)
    return parser


def _validate(args, parser):
    depth = getattr(args, "depth", None) or getattr(args, "depth_given", None)
    if depth is not None and depth < 4:
        parser.error("--depth must be at least 4")
    for name in ("time_degree", "time_degree_given", "order"):
        v = getattr(args, name, None)
        if v is not None and v < 0:
            parser.error(f"--{name.split('_given')[0].replace('_', '-')} must be nonnegative")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate(args, parser)
    try:
        return args.func(args)
    except ParseError as exc:
        sys.stderr.write(f"satohurwitz: parse error: {exc}\n")
        return EXIT_PARSE
    except DepthError as exc:
        # a ValueError subclass, so it must be caught first
        sys.stderr.write(f"satohurwitz: inconclusive at depth: {exc}\n")
        return 2
    except (UsageError, ValueError) as exc:
        sys.stderr.write(f"satohurwitz: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
