"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 infeasible distortion, 3 solver
failure, 4 a verification check (compare / simulate) did not pass.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Iterable, Optional, Sequence

import numpy as np

from . import __version__
from .amended_distortion import ESTIMATORS, distortion_table, simulate_reduction
from .ba_oracle import ba_rate_at_distortion, build_reduced_problem
from .closed_forms import CurveKind, convexified_upper_bound, direct_rdf, evaluate, upper_bound
from .core import (
    DegenerateObservationError,
    DomainError,
    InfeasibleDistortionError,
    LogBase,
    RegimeError,
    SolverError,
    canonicalize,
)
from .gallager_dual import irdf, solve_r_star

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_SOLVER = 3
EXIT_CHECK_FAILED = 4

GENERATOR = f"bsc-irdf {__version__}"

DEFAULT_CURVES = ("irdf", "direct_rdf", "upper_bound", "convexified_upper_bound")
SWEEP_CURVES = tuple(k.value for k in CurveKind) + ("ba_oracle",)

PRESETS = {
    "fig3": dict(alpha=0.25, p=[0.05], grid="0.05:0.5:91", curves=list(DEFAULT_CURVES)),
    "fig4": dict(alpha=0.5, p=[0.0, 0.05, 0.1, 0.2, 0.3, 0.4], grid="0:0.5:101", curves=["irdf"]),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def render(records: Sequence[dict], columns: Sequence[str], fmt: str, summary: Optional[dict] = None) -> str:
    """Serialize records as CSV (with a ``#`` header comment) or JSON."""
    if fmt == "json":
        doc = {"generator": GENERATOR, "columns": list(columns), "records": list(records)}
        if summary is not None:
            doc["summary"] = summary
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# {GENERATOR}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        writer.writerow([_fmt(rec.get(c)) for c in columns])
    if summary is not None:
        buf.write("# " + " ".join(f"{k}={_fmt(v)}" for k, v in summary.items()) + "\n")
    return buf.getvalue()


def read_csv(text: str) -> list[dict]:
    """Parse CSV produced by :func:`render` back into records (floats where possible)."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    out = []
    for row in csv.DictReader(lines):
        rec = {}
        for k, v in row.items():
            if v == "":
                rec[k] = None
            elif v in ("true", "false"):
                rec[k] = v == "true"
            else:
                try:
                    rec[k] = float(v)
                except ValueError:
                    rec[k] = v
        out.append(rec)
    return out


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc}") from exc


def parse_grid(spec: str) -> list[float]:
    """``start:stop:count`` (inclusive endpoints) or a comma-separated list."""
    try:
        if ":" in spec:
            start, stop, count = spec.split(":")
            n = int(count)
            if n < 2:
                raise UsageError(f"grid count must be >= 2, got {n}")
            values = [float(v) for v in np.linspace(float(start), float(stop), n)]
        else:
            values = [float(v) for v in spec.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad grid {spec!r}: {exc}") from exc
    if not values:
        raise UsageError("empty grid")
    if any(not 0.0 <= v <= 1.0 for v in values):
        raise UsageError(f"grid values must lie in [0, 1]: {spec!r}")
    return values


def _float_list(spec: str) -> list[float]:
    try:
        return [float(v) for v in spec.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def interior_grid(alpha: float, p: float, count: int = 20) -> list[float]:
    """``count`` equally spaced distortions strictly inside (p, alpha)."""
    return [p + (alpha - p) * k / (count + 1) for k in range(1, count + 1)]


def _regime(model, D: float) -> str:
    if D >= model.alpha:
        return "zero-rate"
    if D == model.p:
        return "lossless"
    return "interior"


def _safe(fn, *args):
    try:
        return fn(*args)
    except (DomainError, RegimeError):
        return None


def cmd_point(args) -> int:
    base = LogBase.parse(args.base)
    model = canonicalize(args.alpha, args.p)
    D = args.D
    rate = irdf(model, D, base)
    regime = _regime(model, D)
    r_star = solve_r_star(model, D).r_star if regime == "interior" else None
    record = {
        "alpha": args.alpha,
        "p": args.p,
        "D": D,
        "base": base.value,
        "regime": regime,
        "rate": rate,
        "r_star": r_star,
        "bound": _safe(upper_bound, model, D, base),
        "convexified_bound": _safe(convexified_upper_bound, model, D, base),
        "direct_rdf": direct_rdf(model.alpha, D, base),
    }
    _emit(render([record], list(record), args.format), args.out)
    return EXIT_OK


def sweep_records(alpha: float, ps: Iterable[float], grid: Sequence[float], curves: Sequence[str], base: LogBase):
    records = []
    for p in ps:
        model = canonicalize(alpha, p)
        problem = None
        for D in grid:
            rec = {"alpha": alpha, "p": p, "D": D}
            for name in curves:
                if name == "ba_oracle":
                    if problem is None:
                        problem = build_reduced_problem(model)
                    try:
                        rec[name] = ba_rate_at_distortion(problem, D, base=base).rate
                    except DomainError:
                        rec[name] = None
                else:
                    rec[name] = _safe(evaluate, name, model, D, base)
            rec["r_star"] = (
                solve_r_star(model, D).r_star
                if model.informative and model.p < D < model.alpha
                else None
            )
            records.append(rec)
    return records


def cmd_sweep(args) -> int:
    base = LogBase.parse(args.base)
    preset = None
    if args.fig3 and args.fig4:
        raise UsageError("--fig3 and --fig4 are mutually exclusive")
    if args.fig3:
        preset = PRESETS["fig3"]
    elif args.fig4:
        preset = PRESETS["fig4"]

    alpha = args.alpha if args.alpha is not None else (preset or {}).get("alpha")
    ps = args.p if args.p is not None else (preset or {}).get("p")
    grid_spec = args.grid if args.grid is not None else (preset or {}).get("grid")
    curves = args.curves if args.curves is not None else (preset or {}).get("curves", list(DEFAULT_CURVES))
    if alpha is None or ps is None or grid_spec is None:
        raise UsageError("sweep needs --alpha, --p and --grid (or a preset)")
    unknown = [c for c in curves if c not in SWEEP_CURVES]
    if unknown:
        raise UsageError(f"unknown curve(s) {unknown}; choose from {list(SWEEP_CURVES)}")

    grid = parse_grid(grid_spec)
    records = sweep_records(alpha, ps, grid, curves, base)
    columns = ["alpha", "p", "D", *curves, "r_star"]
    _emit(render(records, columns, args.format), args.out)
    return EXIT_OK


def cmd_compare(args) -> int:
    base = LogBase.parse(args.base)
    model = canonicalize(args.alpha, args.p)
    if args.grid is not None:
        grid = parse_grid(args.grid)
    else:
        if not model.informative:
            raise UsageError("p >= alpha leaves no interior distortions; pass --grid explicitly")
        grid = interior_grid(model.alpha, model.p)
    problem = build_reduced_problem(model)

    records = []
    failed = None
    for D in grid:
        rate = irdf(model, D, base)
        ba = ba_rate_at_distortion(problem, D, base=base)
        diff = abs(rate - ba.rate)
        records.append(
            {"alpha": args.alpha, "p": args.p, "D": D, "irdf": rate, "ba_rate": ba.rate,
             "abs_diff": diff, "ba_converged": ba.converged}
        )
        if not ba.converged and failed is None:
            failed = D
    max_diff = max(r["abs_diff"] for r in records)
    status = "solver-failure" if failed is not None else ("ok" if max_diff < args.tol else "mismatch")
    summary = {"base": base.value, "max_abs_diff": max_diff, "tol": args.tol, "status": status}
    columns = ["alpha", "p", "D", "irdf", "ba_rate", "abs_diff", "ba_converged"]
    _emit(render(records, columns, args.format, summary), args.out)
    if failed is not None:
        print(f"Blahut-Arimoto did not converge at D={failed!r}", file=sys.stderr)
        return EXIT_SOLVER
    if max_diff >= args.tol:
        print(f"max discrepancy {max_diff:.3e} >= tol {args.tol:.3e}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_simulate(args) -> int:
    model = canonicalize(args.alpha, args.p)
    res = simulate_reduction(model, args.estimator, args.n, args.seed)
    lo, hi = res.band
    record = {
        "alpha": args.alpha,
        "p": args.p,
        "estimator": args.estimator,
        "n": res.n,
        "seed": res.seed,
        "generator": res.generator,
        "empirical_d": res.empirical_d,
        "empirical_dhat": res.empirical_dhat,
        "analytic": res.analytic,
        "sigma": res.sigma,
        "band_low": lo,
        "band_high": hi,
        "within_band": res.within_band,
    }
    _emit(render([record], list(record), args.format), args.out)
    return EXIT_OK if res.within_band else EXIT_CHECK_FAILED


def cmd_table(args) -> int:
    model = canonicalize(args.alpha, args.p)
    table = distortion_table(model)
    records = [
        {"y": y, "xhat": xh, "dhat": float(table.entries[y, xh])} for y in (0, 1) for xh in (0, 1)
    ]
    _emit(render(records, ["y", "xhat", "dhat"], args.format), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bsc-irdf", description="Indirect rate-distortion of a Bernoulli source seen through a BSC.")
    parser.add_argument("--version", action="version", version=GENERATOR)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, fmt_default="csv"):
        sp.add_argument("--base", choices=["bits", "nats"], default="bits")
        sp.add_argument("--format", choices=["csv", "json"], default=fmt_default)
        sp.add_argument("--out", metavar="PATH", default=None)

    sp = sub.add_parser("point", help="rate at a single distortion")
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--D", type=float, required=True)
    common(sp)
    sp.set_defaults(func=cmd_point)

    sp = sub.add_parser("sweep", help="tabulate curves over a distortion grid")
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--p", type=_float_list, help="one value or a comma-separated list")
    sp.add_argument("--grid", help="start:stop:count or a comma-separated list")
    sp.add_argument("--curves", type=lambda s: [c for c in s.split(",") if c])
    sp.add_argument("--fig3", action="store_true", help="alpha=1/4, p=0.05 with rate, direct RDF and bounds")
    sp.add_argument("--fig4", action="store_true", help="alpha=1/2 for several p")
    common(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("compare", help="dual solver vs Blahut-Arimoto")
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--grid", help="default: 20 points strictly inside (p, alpha)")
    sp.add_argument("--tol", type=float, default=1e-6, help="in units of --base")
    common(sp)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("simulate", help="Monte-Carlo check of the distortion reduction")
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--estimator", choices=sorted(ESTIMATORS), default="identity")
    sp.add_argument("--n", type=int, default=1_000_000)
    sp.add_argument("--seed", type=int, default=0)
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("table", help="print the amended distortion table")
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--p", type=float, required=True)
    common(sp)
    sp.set_defaults(func=cmd_table)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits on --help, --version and usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except InfeasibleDistortionError as exc:
        print(f"bsc-irdf: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SolverError as exc:
        print(f"bsc-irdf: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (UsageError, DomainError, RegimeError, DegenerateObservationError) as exc:
        print(f"bsc-irdf: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
