"""Command-line front end.

Exit codes: 0 when every check has its intended outcome, 1 when some check
fails, 2 for usage or configuration errors (bad ranges, missing or malformed
catalog).
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

from . import __version__
from .catalog import CatalogError
from .report import FORMATS, Report, render
from .runners import TOL_FIELD, run_constants, run_fields, run_verify_report

SEED_ENV = "REFKATO_SEED"
DEFAULT_SEED = 42

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _nonneg_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative: {text!r}")
    return v


def _add_output(p: argparse.ArgumentParser, out_required: bool = False):
    p.add_argument("--format", choices=FORMATS, default="json", help="output format (default json)")
    p.add_argument("--out", type=Path, required=out_required, help="write the report here instead of stdout")
    p.add_argument("--timing", action="store_true", help="include wall time (makes output run-dependent)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="refkato", description="Refined Kato constants: tables, identity checks and field sweeps.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="ellipticity and Kato constant tables")
    p.add_argument("--n-max", type=int, default=6, help="largest dimension (real rows; complex rows with --complex)")
    p.add_argument("--complex", action="store_true", help="add the Kähler table for complex dimension up to --n-max")
    p.add_argument("--tol", type=_positive_float, default=1e-10)
    p.add_argument("--seed", type=int, default=None, help=f"sampling seed (default ${SEED_ENV} or {DEFAULT_SEED})")
    _add_output(p)

    p = sub.add_parser("verify", help="run the algebraic identity suites")
    p.add_argument("--n-max", type=int, default=6, help="largest real dimension (default 6, at most 8)")
    p.add_argument("--complex-n-max", type=int, default=3, help="largest complex dimension (default 3, at most 4)")
    p.add_argument("--tol", type=_positive_float, default=None, help="exact-algebra tolerance; other tolerances scale with it")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--perturb", type=_nonneg_float, default=0.0, help="add seeded noise of this size to intertwiners and projections")
    _add_output(p)

    p = sub.add_parser("fields", help="sweep the Kato ratio over the field catalog")
    p.add_argument("--catalog", type=Path, default=None, help="catalog file (default: the bundled one)")
    p.add_argument("--grid", type=int, default=None, help="points per axis, overriding each entry")
    p.add_argument("--box", type=_positive_float, default=None, help="half-width of the sampling box, overriding each entry")
    p.add_argument("--tol", type=_positive_float, default=TOL_FIELD)
    p.add_argument("--seed", type=int, default=None)
    _add_output(p)

    p = sub.add_parser("report", help="run constants, verify and fields with defaults and write one report")
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--catalog", type=Path, default=None)
    _add_output(p, out_required=True)
    return parser


def _run(args) -> Report:
    seed = args.seed if args.seed is not None else default_seed()
    if args.command == "constants":
        return run_constants(args.n_max, args.n_max if args.complex else None, tol=args.tol, seed=seed)
    if args.command == "verify":
        return run_verify_report(args.n_max, args.complex_n_max, tol=args.tol, seed=seed, perturb=args.perturb)
    if args.command == "fields":
        if args.grid is not None and args.grid < 1:
            raise UsageError("--grid must be positive")
        return run_fields(args.catalog, points=args.grid, box=args.box, seed=seed)
    combined = Report("report", {"n_max": args.n_max, "seed": seed, "catalog": str(args.catalog) if args.catalog else "default"})
    combined.extend(run_constants(args.n_max, min(args.n_max, 3), seed=seed))
    combined.extend(run_verify_report(min(args.n_max, 8), min(args.n_max, 3), seed=seed))
    combined.extend(run_fields(args.catalog, seed=seed))
    return combined


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        report = _run(args)
    except FileNotFoundError as exc:
        print(f"refkato: file not found: {exc.filename}", file=sys.stderr)
        return EXIT_USAGE
    except (CatalogError, UsageError, ValueError) as exc:
        print(f"refkato: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.timing:
        report.wall_time = round(time.perf_counter() - start, 3)
    text = render(report, args.format)
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    s = report.summary
    print(f"refkato {args.command}: {s['passed']} passed, {s['failed']} failed", file=sys.stderr)
    for c in report.failures()[:20]:
        print(f"  FAIL {c.name} {c.config} residual={c.residual:.3e} tol={c.tol:.1e}", file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
