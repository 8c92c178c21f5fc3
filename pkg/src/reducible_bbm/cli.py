"""Command-line interface: classify, rate, sweep, simulate, validate."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from typing import Any, Optional, Sequence

import numpy as np

from . import checks, mc
from .params import InvalidParameterError, ModelParams, Region, boundary_distance, classify_region
from .ratefn import (
    ProfileGapWarning,
    Regime,
    ThetaOutOfRangeError,
    interior_literal_form,
    optimal_strategy,
    rate,
)
from .simulator import DEFAULT_MAX_POPULATION, SimConfig, simulate_batch
from ._kernel import STATUS_OVERFLOW
from ._rng import derive_seed

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_BOUNDARY = 3
EXIT_UNWRITABLE = 4
EXIT_OVERFLOW = 5

SWEEP_COLUMNS = ("beta", "sigma2", "alpha", "theta", "region", "regime", "A", "u_star",
                 "x0", "beta0", "numeric_check", "abs_gap")
SUITES = ("moments", "levelset", "rates", "consistency")
STREAM_CHUNK = 4096


class UsageError(Exception):
    pass


def _dump(obj: Any, pretty: bool = False) -> str:
    if pretty:
        return json.dumps(obj, indent=2)
    return json.dumps(obj, separators=(",", ":"))


def _emit(obj: Any, args: argparse.Namespace) -> None:
    print(_dump(obj, getattr(args, "pretty", False)))


def _params(args: argparse.Namespace) -> ModelParams:
    for name in ("beta", "sigma2"):
        if getattr(args, name) is None:
            raise UsageError(f"--{name} is required")
    return ModelParams(args.beta, args.sigma2, 1.0 if args.alpha is None else args.alpha)


def _require(args: argparse.Namespace, *names: str) -> None:
    for name in names:
        if getattr(args, name, None) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required")


def _rate_record(p: ModelParams, theta: float) -> dict:
    region = classify_region(p)
    rec: dict = {"beta": p.beta, "sigma2": p.sigma2, "alpha": p.alpha, "theta": theta,
                 "region": region.value}
    if region is Region.BOUNDARY:
        rec.update({k: None for k in SWEEP_COLUMNS[5:]})
        return rec
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ProfileGapWarning)
        res = rate(p, theta)
    rec.update({"regime": res.regime.value, "A": res.A, "u_star": res.u_star, "x0": None,
                "beta0": None, "numeric_check": res.numeric_check, "abs_gap": res.abs_gap})
    if res.regime is Regime.INTERIOR:
        s = optimal_strategy(p, theta)
        rec["x0"] = s.x0
        rec["beta0"] = s.beta0
    return rec


def cmd_classify(args: argparse.Namespace) -> int:
    p = _params(args)
    _emit({"region": classify_region(p).value, "boundary_distance": boundary_distance(p)}, args)
    return EXIT_OK


def cmd_rate(args: argparse.Namespace) -> int:
    p = _params(args)
    _require(args, "theta")
    if not args.theta > 1:
        raise ThetaOutOfRangeError(f"--theta must exceed 1, got {args.theta}")
    if classify_region(p) is Region.BOUNDARY:
        _emit({"error": "boundary", "region": "Boundary", "beta": p.beta, "sigma2": p.sigma2}, args)
        return EXIT_BOUNDARY
    rec = _rate_record(p, args.theta)
    if rec["regime"] == Regime.INTERIOR.value:
        s = optimal_strategy(p, args.theta)
        rec["strategy"] = {"u_star": s.u_star, "x0": s.x0, "beta0": s.beta0,
                           "beta0_positive": s.beta0_positive}
        if classify_region(p) is Region.III:
            literal = interior_literal_form(p, args.theta)
            rec["discrepancy"] = {
                "interior_literal_form": literal,
                "derived_interior": rec["A"],
                "difference": literal - rec["A"],
                "note": "the literal interior expression does not match the profile maximum; A uses the derived form",
            }
    _emit(rec, args)
    return EXIT_OK


def _axis(spec: Optional[Sequence[float]], name: str) -> list[float]:
    if spec is None:
        raise UsageError(f"--{name} START STOP STEPS is required")
    start, stop, steps = spec
    if steps != int(steps) or steps < 1 or start > stop:
        raise UsageError(f"--{name} needs START <= STOP and integer STEPS >= 1")
    steps = int(steps)
    if steps == 1:
        return [float(start)]
    return [float(x) for x in np.linspace(start, stop, steps)]


def _csv_cell(v: Any) -> Any:
    return "" if v is None else v


def cmd_sweep(args: argparse.Namespace) -> int:
    betas = _axis(args.beta_range, "beta-range")
    sigma2s = _axis(args.sigma2_range, "sigma2-range")
    thetas = _axis(args.theta_range, "theta-range")
    _require(args, "output")
    if thetas[0] <= 1:
        raise ThetaOutOfRangeError("every theta in the sweep must exceed 1")
    alpha = 1.0 if args.alpha is None else args.alpha
    rows = [_rate_record(ModelParams(b, s2, alpha), th)
            for b in betas for s2 in sigma2s for th in thetas]
    buf = io.StringIO(newline="")
    if args.format == "csv":
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(SWEEP_COLUMNS)
        for r in rows:
            writer.writerow([_csv_cell(r[c]) for c in SWEEP_COLUMNS])
    else:
        meta = {"meta": {"command": "sweep", "beta_range": list(args.beta_range),
                         "sigma2_range": list(args.sigma2_range),
                         "theta_range": list(args.theta_range), "alpha": alpha}}
        buf.write(_dump(meta) + "\n")
        for r in rows:
            buf.write(_dump({c: r[c] for c in SWEEP_COLUMNS}) + "\n")
    text = buf.getvalue()
    if args.output == "-":
        sys.stdout.write(text)
        return EXIT_OK
    try:
        with open(args.output, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        _emit({"error": "unwritable_output", "path": args.output, "reason": exc.strerror}, args)
        return EXIT_UNWRITABLE
    _emit({"rows": len(rows), "output": args.output, "format": args.format}, args)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    p = _params(args)
    _require(args, "t", "runs", "seed")
    if args.runs < 1:
        raise UsageError("--runs must be at least 1")
    levels = tuple(args.levels or ())
    config = SimConfig(args.t, args.seed, args.max_population, levels)
    out = sys.stdout
    out.write(_dump({"meta": {"command": "simulate", **p.to_dict(), "t": config.t_end,
                              "runs": args.runs, "seed": args.seed, "threshold": args.threshold,
                              "levels": list(levels)}}) + "\n")
    hits = completed = 0
    for start in range(0, args.runs, STREAM_CHUNK):
        n = min(STREAM_CHUNK, args.runs - start)
        batch = simulate_batch(p, config, n, first_run=start, workers=args.workers, allow_overflow=True)
        for i in range(n):
            if batch.status[i] == STATUS_OVERFLOW:
                out.write(_dump({"summary": {"error": "population_overflow", "run": start + i,
                                             "seed": args.seed, "completed": completed,
                                             "max_population": args.max_population}}) + "\n")
                return EXIT_OVERFLOW
            r = batch.result(i)
            out.write(r.to_ndjson(args.seed, start + i) + "\n")
            completed += 1
            if args.threshold is not None and r.m_global >= args.threshold:
                hits += 1
    summary: dict = {"completed": completed}
    if args.threshold is not None:
        lo, hi = mc.wilson_interval(hits, completed)
        summary.update({"threshold": args.threshold, "p_hat": hits / completed, "ci_low": lo,
                        "ci_high": hi, "n_runs": completed, "n_hits": hits})
    out.write(_dump({"summary": summary}) + "\n")
    return EXIT_OK


def _suite_rows(args: argparse.Namespace) -> list[dict]:
    suite = args.suite
    if suite == "consistency":
        seed = 0 if args.seed is None else args.seed
        return [r.to_dict() for r in checks.consistency_suite(seed)]
    _require(args, "seed")
    w = args.workers
    if suite == "moments":
        runs = args.runs or 10_000
        r1 = mc.validate_first_moment_type1(ModelParams(1.0, 1.0, 1.0), 1.0, 0.0, runs, args.seed, workers=w)
        r2 = mc.validate_first_moment_type2(ModelParams(2.0, 0.8, 1.0), 1.0, 0.0, runs,
                                            derive_seed(args.seed, 1), workers=w)
        return [{"check": "moment_type1", **r1.to_dict()}, {"check": "moment_type2", **r2.to_dict()}]
    if suite == "levelset":
        runs = args.runs or 1_000
        r = mc.level_set_rate(1.0, 1.0, 0.5, 8.0, runs, args.seed, workers=w)
        return [{"check": "level_set", **r.to_dict()}]
    runs = args.runs or 100_000
    rows = []
    for j, (p, theta) in enumerate(((ModelParams(1.0, 2.0, 1.0), 1.1), (ModelParams(0.5, 1.5, 1.0), 1.2))):
        target = rate(p, theta).A
        row: dict = {"check": f"rate_slope_beta{p.beta:g}_sigma2{p.sigma2:g}", "target": target}
        try:
            fit = mc.empirical_rate(p, theta, (4.0, 6.0, 8.0), runs, derive_seed(args.seed, j), workers=w)
        except mc.InsufficientHitsError as exc:
            row.update({"pass": False, "error": str(exc)})
        else:
            row.update({"empirical": fit.slope, "stderr": fit.stderr,
                        "pass": abs(fit.slope - target) <= mc.LEVEL_SET_BAND,
                        "points": [list(pt) for pt in fit.points], "n_runs": runs, "seed": args.seed})
        rows.append(row)
    return rows


def cmd_validate(args: argparse.Namespace) -> int:
    rows = _suite_rows(args)
    for row in rows:
        print(_dump(row, args.pretty))
    ok = all(row["pass"] for row in rows)
    print(_dump({"suite": args.suite, "pass": ok, "checks": len(rows),
                 "failed": [r["check"] for r in rows if not r["pass"]]}, args.pretty))
    return EXIT_OK if ok else EXIT_FAILED


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--beta", type=float)
    p.add_argument("--sigma2", type=float)
    p.add_argument("--alpha", type=float)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with default values for any flag")
    common.add_argument("--pretty", action="store_true", default=None, help="indented JSON output")

    parser = _Parser(prog="reducible-bbm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("classify", parents=[common], help="region of (beta, sigma2)")
    _model_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("rate", parents=[common], help="rate A(theta) with diagnostics")
    _model_flags(p)
    p.add_argument("--theta", type=float)
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("sweep", parents=[common], help="rate over a (beta, sigma2, theta) grid")
    for name in ("beta-range", "sigma2-range", "theta-range"):
        p.add_argument(f"--{name}", type=float, nargs=3, metavar=("START", "STOP", "STEPS"))
    p.add_argument("--alpha", type=float)
    p.add_argument("--output", help="output file, '-' for stdout")
    p.add_argument("--format", choices=("csv", "json"))
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", parents=[common], help="NDJSON record per simulated run")
    _model_flags(p)
    p.add_argument("--t", type=float)
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--threshold", type=float)
    p.add_argument("--levels", type=float, nargs="*")
    p.add_argument("--workers", type=int)
    p.add_argument("--max-population", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", parents=[common], help="run a validation suite")
    p.add_argument("--suite", choices=SUITES)
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_validate)
    return parser


_DEFAULTS = {"format": "csv", "workers": 1, "max_population": DEFAULT_MAX_POPULATION, "pretty": False}


def _apply_config(args: argparse.Namespace) -> None:
    """Fill flags left unset from the JSON config file, then from defaults."""
    config: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(config, dict):
            raise UsageError("config file must hold a JSON object")
    for key, value in config.items():
        dest = key.replace("-", "_")
        if dest in ("command", "func", "config"):
            continue
        if not hasattr(args, dest):
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        if getattr(args, dest) is None:
            setattr(args, dest, value)
    for key, value in _DEFAULTS.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, value)
    if getattr(args, "suite", "x") is None:
        raise UsageError("--suite is required")
    if getattr(args, "suite", SUITES[0]) not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args)
        return args.func(args)
    except (UsageError, InvalidParameterError, ThetaOutOfRangeError, ValueError, TypeError) as exc:
        print(f"reducible-bbm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
