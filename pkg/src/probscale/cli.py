"""Command-line entry point: ``probscale <command> [options]``.

Exit status is 0 on success, 1 when a scientific verdict fails (bound
violated, slope out of tolerance, selftest red) and 2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import _io
from .exponents import (
    EquationSpec,
    Regime,
    as_rational,
    classify,
    exponent_report,
    regularity_level,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _rational(text: str) -> Fraction:
    try:
        return as_rational(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a rational like -5/4, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        _io.write_text(args.out, text)
    else:
        sys.stdout.write(text)


def _spec(args) -> EquationSpec:
    try:
        return EquationSpec.of(args.eq, args.d, args.p, args.kind)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_exponents(args) -> int:
    spec = _spec(args)
    s = args.s
    if args.alpha is not None:
        s = regularity_level(args.alpha, spec.d)
    report = exponent_report(spec, s)
    if args.format == "json":
        doc = {"eq": spec.eq.value, "d": spec.d, "p": spec.p, "kind": spec.nl.label,
               "exponents": {k: {**_io.rational_to_json(v.value), "openEndpoint": v.open_endpoint}
                             for k, v in report.items()}}
        _emit(args, _io.dumps(doc))
    elif args.format == "csv":
        rows = [(k, _io.format_rational(v.value), _io.decimal_string(v.value), v.open_endpoint)
                for k, v in report.items()]
        _emit(args, _io.csv_text(["name", "rational", "decimal", "openEndpoint"], rows))
    else:
        width = max(map(len, report))
        lines = [f"{k.ljust(width)} = {_io.format_rational(v.value)}{'-' if v.open_endpoint else ''}"
                 f"  ({_io.decimal_string(v.value)})" for k, v in report.items()]
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_tables(args) -> int:
    from .tables import EQUATIONS, TABLE_DEGREES, TABLE_DIMS, column_label, render_tables

    ts = render_tables()
    if args.format == "json":
        doc = ts.to_json()
        if args.which:
            doc = {f"table{args.which}": doc[f"table{args.which}"]}
        _emit(args, _io.dumps(doc))
    elif args.format == "csv":
        rows = []
        if args.which in (None, 1):
            rows += [(1, r.eq.value, r.nonlinearity, "s_pr", r.s_pr.text) for r in ts.thresholds]
            rows += [(1, r.eq.value, r.nonlinearity, "s_hhl", r.s_hhl.text) for r in ts.thresholds]
        for idx, values in ((2, ts.beta_hhh), (3, ts.beta_hhl)):
            if args.which in (None, idx):
                rows += [(idx, eq.value, column_label(d, p), "beta", _io.format_rational(values[eq, d, p]))
                         for eq in EQUATIONS for d in TABLE_DIMS for p in TABLE_DEGREES]
        _emit(args, _io.csv_text(["table", "eq", "column", "quantity", "value"], rows))
    else:
        _emit(args, ts.to_text(args.which))
    return EXIT_OK


def cmd_classify(args) -> int:
    spec = _spec(args)
    if (args.s is None) == (args.alpha is None):
        raise UsageError("give exactly one of --s or --alpha")
    s = args.s if args.s is not None else regularity_level(args.alpha, spec.d)
    crit = classify(spec, s, args.regime)
    if args.format == "json":
        _emit(args, _io.dumps({"s": _io.rational_to_json(s), "regime": args.regime,
                               "criticality": str(crit)}))
    elif args.format == "csv":
        _emit(args, _io.csv_text(["s", "regime", "criticality"], [(_io.format_rational(s), args.regime, str(crit))]))
    else:
        _emit(args, f"s = {_io.format_rational(s)} ({_io.decimal_string(s)}): {crit}\n")
    return EXIT_OK


def cmd_counting(args) -> int:
    from .counting import Dispersion, FixedLow, Proportional, scaling_sweep

    if args.family == "low":
        a = tuple(args.a) if args.a else (1,) + (0,) * (args.d - 1)
        family = FixedLow(a)
    else:
        family = Proportional(tuple(float(x) for x in args.a) if args.a else None)
    try:
        sweep = scaling_sweep(Dispersion(args.dispersion), args.d, family, args.Nset, args.samples,
                              args.seed, args.constant, args.margin, args.threads)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.format == "csv":
        _emit(args, sweep.to_csv())
    elif args.format == "json":
        _emit(args, _io.dumps(sweep.to_json()))
    else:
        lines = [f"{r.query.N:>5}  sup={r.sup_count:<8} m*={r.argmax_m:<8} bound={r.paper_bound}  C={r.implied_constant}"
                 for r in sweep.per_n]
        lines.append(f"slope {sweep.slope:.3f} target {sweep.target} (+{sweep.margin})  slope_ok={sweep.slope_ok}  "
                     f"bounds_pass={sweep.bounds.all_pass} impliedC={sweep.bounds.implied_constant}")
        _emit(args, "\n".join(lines) + "\n")
    ok = sweep.bounds.all_pass and sweep.slope_ok is not False
    return EXIT_OK if ok else EXIT_FAIL


def cmd_iterate(args) -> int:
    from .config import ConfigError, load_config

    overrides = {}
    if args.samples is not None:
        overrides["samples"] = args.samples
    if args.seed is not None:
        overrides["seed"] = args.seed
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        raise UsageError(f"config error at {exc}") from None
    result = cfg.run(threads=args.threads)
    if args.format == "csv":
        _emit(args, result.to_csv())
    elif args.format == "json":
        _emit(args, _io.dumps({"config": cfg.to_json(), "summary": result.to_json()}))
    else:
        lines = [f"N={n:<4} median hs-norm {v:.6g}" for n, v in sorted(result.medians.items())]
        lines.append(f"slope {result.fit.slope:.4f}  predicted {_io.format_rational(result.predicted_slope)}"
                     f"  tolerance {result.fit.tolerance}  {result.fit.verdict.value}")
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK if result.passed else EXIT_FAIL


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    checks = run_selftest()
    if args.format == "json":
        _emit(args, _io.dumps({"checks": checks, "passed": all(c.passed for c in checks)}))
    elif args.format == "csv":
        _emit(args, _io.csv_text(["name", "passed", "detail", "seconds"],
                                 [(c.name, c.passed, c.detail, round(c.seconds, 4)) for c in checks]))
    else:
        _emit(args, "".join(f"{'PASS' if c.passed else 'FAIL'}  {c.name:<14} {c.detail}\n" for c in checks))
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="probscale", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats=("text", "json", "csv")):
        p.add_argument("--format", choices=formats, default="text")
        p.add_argument("--out", help="write output to this file instead of stdout")

    def equation(p):
        p.add_argument("--eq", required=True, choices=["heat", "wave", "schrodinger"])
        p.add_argument("-d", type=int, required=True)
        p.add_argument("-p", type=int, required=True)
        p.add_argument("--kind", default="power", help="power, modsq or signs=+-+...")

    p = sub.add_parser("exponents", help="all thresholds and exponents for one equation")
    equation(p)
    p.add_argument("--s", type=_rational, help="regularity for the time exponents (default s_pr)")
    p.add_argument("--alpha", type=_rational, help="alternatively, the noise or data parameter")
    common(p)
    p.set_defaults(func=cmd_exponents)

    p = sub.add_parser("tables", help="the three comparison tables")
    p.add_argument("--which", type=int, choices=[1, 2, 3])
    common(p)
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("classify", help="criticality at a regularity level")
    equation(p)
    p.add_argument("--s", type=_rational)
    p.add_argument("--alpha", type=_rational)
    p.add_argument("--regime", choices=[r.value for r in Regime], default="hhh")
    common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("counting", help="lattice-count scaling sweep with bound verification")
    p.add_argument("--dispersion", required=True,
                   choices=["wave-minus", "wave-plus", "schrodinger-minus", "schrodinger-plus"])
    p.add_argument("-d", type=int, required=True)
    p.add_argument("--family", choices=["low", "proportional"], default="proportional")
    p.add_argument("--a", type=_int_list, help="fixed low vector, or the direction for proportional")
    p.add_argument("--Nset", type=_int_list, default=[8, 16, 32])
    p.add_argument("--samples", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1, help="worker threads, 0 = auto")
    p.add_argument("--constant", type=float, default=1.0)
    p.add_argument("--margin", type=float, default=0.4)
    common(p)
    p.set_defaults(func=cmd_counting)

    p = sub.add_parser("iterate", help="second-iterate scaling experiment from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, default=1, help="worker threads, 0 = auto")
    common(p)
    p.set_defaults(func=cmd_iterate)

    p = sub.add_parser("selftest", help="hermetic quick checks")
    common(p)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) == 0:
        import os

        args.threads = os.cpu_count() or 1
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
