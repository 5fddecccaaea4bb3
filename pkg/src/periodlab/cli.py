"""periodlab command line.

Exit codes: 0 success / verified, 1 computed but not verified, 2 usage or domain error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields
from fractions import Fraction
from pathlib import Path

import mpmath

from .continuation import monodromy, transport
from .deligne import c_minus, c_plus, eigenspace_bases, f_infinity, tate_twist
from .errors import PeriodLabError
from .lfunc import determine_sign, j_invariant, l_value
from .mirror import build_S
from .numeric import GUARD_DIGITS, parse_point
from .pf_core import frobenius_mum, load_operator
from .pipeline import VPERP, RunConfig, data_path, format_report, resolve_form, run_verification, waypoints_for
from .recognition import digits_agreement

EXIT_OK, EXIT_NOT_VERIFIED, EXIT_ERROR = 0, 1, 2

logger = logging.getLogger("periodlab")


def _emit(items, fmt):
    if fmt == "kv":
        return "\n".join(f"{k} {v}" for k, v in items) + "\n"
    return "\n".join(f"{k}: {v}" for k, v in items) + "\n"


def _n(x, d):
    return mpmath.nstr(x, d, min_fixed=-5, max_fixed=5)


def _complex(key, z, d):
    z = mpmath.mpc(z)
    return [(f"{key}_re", _n(z.real, d)), (f"{key}_im", _n(z.imag, d))]


def _fmt_frac(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def config_from_args(args) -> RunConfig:
    names = {f.name for f in fields(RunConfig)}
    kwargs = {k: v for k, v in vars(args).items() if k in names and v is not None}
    return RunConfig(**kwargs)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_frobenius(args) -> int:
    op = load_operator(args.operator)
    basis = frobenius_mum(op, args.N)
    for j, fj in enumerate(basis.f):
        sys.stdout.write(f"f{j}: " + " ".join(_fmt_frac(c) for c in fj) + "\n")
    return EXIT_OK


def cmd_continue(args) -> int:
    config = config_from_args(args)
    op = load_operator(config.operator)
    with mpmath.workdps(config.precision + GUARD_DIGITS):
        waypoints = waypoints_for(config, op)
        W = transport(op, None, waypoints, config.precision)
        d = config.precision
        items = [("target", config.target)]
        items += _complex("log_target", W.at.log_value, d)
        for i in range(4):
            for j in range(4):
                items += _complex(f"w{i}_{j}", W[i, j], d)
        items += _complex("det", W.det(), 20)
    sys.stdout.write(_emit(items, config.output))
    return EXIT_OK


def cmd_monodromy(args) -> int:
    config = config_from_args(args)
    op = load_operator(config.operator)
    with mpmath.workdps(config.precision + GUARD_DIGITS):
        approach = [parse_point(p) for p in args.approach.split(",")] if args.approach else None
        res = monodromy(op, parse_point(args.base_point), parse_point(args.center), config.precision, approach)
        items = [("center", args.center), ("base", args.base_point)]
        if res.rationalized:
            items.append(("matrix", ";".join(",".join(_fmt_frac(x) for x in r) for r in res.rational)))
            items.append(("residual", _n(res.residual, 5)))
        else:
            for i in range(4):
                items.append((f"m{i}", " ".join(_n(res.matrix[i, j], 20) for j in range(4))))
            items.append(("matrix", "unrecognized"))
    sys.stdout.write(_emit(items, config.output))
    return EXIT_OK if res.rationalized else EXIT_NOT_VERIFIED


def cmd_deligne(args) -> int:
    config = config_from_args(args)
    op = load_operator(config.operator)
    md = config.mirror_data()
    d = config.precision
    with mpmath.workdps(d + GUARD_DIGITS):
        W = transport(op, None, waypoints_for(config, op), d)
        S = build_S(md)
        F = f_infinity(S, W)
        plus, minus = eigenspace_bases(F)
        cp, cm = c_plus(S, W, plus), c_minus(S, W, minus)
        items = [
            ("f_infinity", ";".join(",".join(_fmt_frac(x) for x in r) for r in F.rational_entries)),
            ("f_infinity_residual", _n(F.residual, 5)),
            ("plus_basis", ";".join(str(v) for v in plus).replace(" ", "")),
            ("minus_basis", ";".join(str(v) for v in minus).replace(" ", "")),
            ("c_plus_re", _n(cp.real, d)),
            ("c_plus_im", _n(cp.imag, 5)),
            ("c_minus_re", _n(cm.real, d)),
            ("c_minus_im", _n(cm.imag, 5)),
            ("c_plus_twisted_re", _n(tate_twist(cp, 2).real, d)),
        ]
    sys.stdout.write(_emit(items, config.output))
    return EXIT_OK


def cmd_lvalue(args) -> int:
    d = args.precision
    with mpmath.workdps(d + GUARD_DIGITS):
        form, source = resolve_form(args.form, d + GUARD_DIGITS, args.offline)
        if not 1 <= args.s <= form.weight - 1:
            raise ValueError(f"s must lie in 1..{form.weight - 1}")
        form.eps = determine_sign(form)
        value = l_value(form, args.s, d)
        items = [("form", form.label), ("source", source), ("sign", form.eps), ("s", args.s), ("value", _n(value, d))]
    sys.stdout.write(_emit(items, args.output))
    return EXIT_OK


def cmd_jcheck(args) -> int:
    d = args.precision
    with mpmath.workdps(d + GUARD_DIGITS):
        tau = mpmath.mpc(mpmath.mpf(1) / 2, mpmath.mpf(args.vperp))
        j = j_invariant(tau, d)
        target = mpmath.mpf(215) ** 3 / 28**3
        digits = digits_agreement(j.real, target, cap=d)
        items = [("j_re", _n(j.real, d)), ("j_im", _n(j.imag, 5)), ("target", "(215/28)^3"), ("digits", digits)]
    sys.stdout.write(_emit(items, args.output))
    return EXIT_OK if digits >= 10 else EXIT_NOT_VERIFIED


def cmd_verify(args) -> int:
    config = config_from_args(args)
    report = run_verification(config)
    sys.stdout.write(format_report(report, config.output))
    return EXIT_OK if report.verified else EXIT_NOT_VERIFIED


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _precision(text: str) -> int:
    value = int(text)
    if value < 30:
        raise argparse.ArgumentTypeError("precision must be at least 30 digits")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=_precision, default=100, help="decimal digits (default 100)")
    common.add_argument("--format", dest="output", choices=("text", "kv"), default="text")
    common.add_argument("--offline", action="store_true", help="never touch the network")
    common.add_argument("-v", "--verbose", action="store_true")

    op_opt = argparse.ArgumentParser(add_help=False)
    op_opt.add_argument("--op", dest="operator", type=Path, default=data_path("aesz34.op"))

    point_opts = argparse.ArgumentParser(add_help=False)
    point_opts.add_argument("--target", default="-1/7")
    point_opts.add_argument("--base", default="-1/50", help="start point inside the disc at 0")
    point_opts.add_argument("--path", type=Path, help="waypoint file overriding the planned path")
    point_opts.add_argument("--clearance", default="1/100")

    mirror_opts = argparse.ArgumentParser(add_help=False)
    mirror_opts.add_argument("--mirror", type=Path)
    mirror_opts.add_argument("--k", type=int, default=1, help="AESZ34 member when --mirror is absent")

    parser = argparse.ArgumentParser(prog="periodlab", description="Periods, Deligne's c+- and L-values for CY3 operators.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("frobenius", parents=[op_opt], help="Frobenius coefficients f0..f3 at 0")
    p.add_argument("-N", type=int, default=10)
    p.set_defaults(func=cmd_frobenius, precision=100, verbose=False)

    p = sub.add_parser("continue", parents=[common, op_opt, point_opts], help="canonical Wronskian at a target")
    p.set_defaults(func=cmd_continue)

    p = sub.add_parser("monodromy", parents=[common, op_opt], help="monodromy around a singular point")
    p.add_argument("--center", default="0")
    p.add_argument("--base", dest="base_point", default="1/100")
    p.add_argument("--approach", help="comma-separated waypoints from inside the disc at 0 to the base")
    p.set_defaults(func=cmd_monodromy)

    p = sub.add_parser("deligne", parents=[common, op_opt, point_opts, mirror_opts], help="F_infinity and c+-")
    p.set_defaults(func=cmd_deligne)

    p = sub.add_parser("lvalue", parents=[common], help="L(f, s) at an integer point")
    p.add_argument("--form", required=True, help="newform label or coefficient file")
    p.add_argument("--s", type=int, required=True)
    p.set_defaults(func=cmd_lvalue)

    p = sub.add_parser("jcheck", parents=[common], help="j(1/2 + i v) against (215/28)^3")
    p.add_argument("--vperp", default=VPERP)
    p.set_defaults(func=cmd_jcheck)

    p = sub.add_parser("verify", parents=[common, op_opt, point_opts, mirror_opts], help="end-to-end check")
    p.add_argument("--vperp", default=VPERP)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except PeriodLabError as exc:
        sys.stderr.write(f"periodlab: error in {exc.stage or args.command}: {exc}\n")
    except (ValueError, ZeroDivisionError, OSError) as exc:
        sys.stderr.write(f"periodlab: error in {args.command}: {exc}\n")
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
