"""Command-line front end.

Change points are reported as the last time of the left segment: a point
``b`` means the distribution changes between times ``b`` and ``b + 1``.
Every JSON document written carries ``schema_version``.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from ._accel import default_workers
from .io import FORMATS, ParseError, dumps, ingest, read_points
from .montecarlo import RunReport, run_monte_carlo
from .pipeline import METHODS, DEFAULT_INTERVALS, DetectorConfig, detect
from .scenarios import SCENARIOS, ScenarioSpec, generate
from .segmentation import Segmentation
from .selection import RULES, PenaltyConfig, sse_gain_test, update_merge

SCHEMA_VERSION = 1
CONVENTION = "change point b: last time of the left segment (change occurs at b + 1)"

BENCH_COLUMNS = (
    "rep",
    "K_true",
    "K_hat",
    "abs_error",
    "d_est_true",
    "d_true_est",
    "failed",
    "change_points",
    "wall_time",
)


class UsageError(Exception):
    pass


def _fmt(x) -> str:
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x) if isinstance(x, float) else str(x)


def _write_json(obj, path) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {v}")
    return v


# ---------------------------------------------------------------------------
# detect


def _detector_args(p: argparse.ArgumentParser, default_method: str) -> None:
    p.add_argument("--method", choices=METHODS, default=default_method)
    p.add_argument("--tau", type=float, help="threshold (required for nbs/nwbs)")
    p.add_argument("--tau-grid", type=_float_list, help="comma-separated thresholds for nwbs-auto")
    p.add_argument("--lam", "--lambda", dest="lam", type=float, help="penalty for nwbs-auto")
    p.add_argument("-S", "--intervals", dest="n_intervals", type=_positive_int, default=DEFAULT_INTERVALS)
    p.add_argument("--max-len", type=_positive_int, help="longest random interval (off by default)")
    p.add_argument("--split-mode", choices=("time", "within"), default="time")
    p.add_argument("--rule", choices=RULES, default="adaptive")


def _detector_config(args) -> DetectorConfig:
    return DetectorConfig(
        method=args.method,
        tau=args.tau,
        tau_grid=None if args.tau_grid is None else tuple(args.tau_grid),
        lam=args.lam,
        n_intervals=args.n_intervals,
        max_len=args.max_len,
        split_mode=args.split_mode,
        rule=args.rule,
    )


def cmd_detect(args) -> int:
    config = _detector_config(args)
    data = ingest(args.input, args.format)
    t0 = time.perf_counter()
    det = detect(data, config, np.random.default_rng(args.seed))
    wall = time.perf_counter() - t0
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "detect",
        "convention": CONVENTION,
        "input": {"path": str(args.input), "T": data.T, "n_total": data.n_total},
        "method": config.method,
        "seed": args.seed,
        "parameters": {**config.to_dict(), **det.parameters},
        "change_points": det.change_points,
        "points": [
            {"point": d.point, "value": d.value, "window": list(d.window)}
            for d in det.segmentation.details
        ],
        "wall_time": wall,
    }
    _write_json(report, args.output)
    return 0


# ---------------------------------------------------------------------------
# bench


def bench_csv(report: RunReport) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_COLUMNS)
    for r in report.replicates:
        w.writerow(
            [
                r.index,
                r.K_true,
                r.K_hat,
                r.abs_error,
                _fmt(r.d_est_true),
                _fmt(r.d_true_est),
                int(r.failed),
                " ".join(map(str, r.change_points)),
                repr(r.wall_time),
            ]
        )
    return buf.getvalue()


def bench_json(report: RunReport) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": "bench", "convention": CONVENTION, **report.to_dict()}


def cmd_bench(args) -> int:
    spec = ScenarioSpec(
        scenario=args.scenario,
        T=args.T,
        K=args.K,
        n_policy=args.n_policy,
        n_param=args.n_param,
        seed=args.seed,
    )
    config = _detector_config(args)
    report = run_monte_carlo(spec, config, args.reps, args.seed, args.workers)
    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    Path(f"{prefix}.csv").write_text(bench_csv(report))
    _write_json(bench_json(report), f"{prefix}.json")
    agg = report.aggregates()
    print(
        f"scenario {spec.scenario} T={spec.T} reps={agg['reps']}: "
        f"mean |K-K_hat| = {agg['mean_abs_error']:.3f}, "
        f"median d(C_hat|C) = {agg['median_d_est_true']}, "
        f"median d(C|C_hat) = {agg['median_d_true_est']}"
    )
    return 0


# ---------------------------------------------------------------------------
# generate


def cmd_generate(args) -> int:
    if args.config:
        raw = json.loads(Path(args.config).read_text())
        if not isinstance(raw, dict):
            raise ParseError("scenario config must be a JSON object", None, args.config)
        overrides = {
            k: v
            for k, v in {"scenario": args.scenario, "T": args.T, "seed": args.seed}.items()
            if v is not None
        }
        spec = ScenarioSpec.from_dict({**raw, **overrides})
    else:
        if args.scenario is None:
            raise UsageError("generate needs --scenario or --config")
        spec = ScenarioSpec(
            scenario=args.scenario,
            T=1000 if args.T is None else args.T,
            K=args.K,
            n_policy=args.n_policy,
            n_param=args.n_param,
            seed=0 if args.seed is None else args.seed,
        )
    data, cps = generate(spec)
    fmt = args.format
    if args.output in (None, "-"):
        sys.stdout.write(dumps(data, fmt or "ragged-json"))
    else:
        from .io import emit

        emit(data, args.output, fmt)
    if args.truth:
        _write_json(
            {
                "schema_version": SCHEMA_VERSION,
                "command": "generate",
                "convention": CONVENTION,
                "scenario": spec.to_dict(),
                "change_points": list(cps),
            },
            args.truth,
        )
    return 0


# ---------------------------------------------------------------------------
# merge


def cmd_merge(args) -> int:
    data = ingest(args.data, args.format)
    a, b = read_points(args.a), read_points(args.b)
    lam = args.lam if args.lam is not None else PenaltyConfig.default(data.n_total).lam
    merged = update_merge(data, Segmentation.from_points(a), Segmentation.from_points(b), lam)
    sa, sb = set(a), set(b)
    tests = []
    for eta in sorted(sa ^ sb):
        other = a if eta in sb else b
        left = max((p for p in other if p < eta), default=0)
        right = min((p for p in other if p > eta), default=data.T)
        if 0 < eta < data.T:
            g = sse_gain_test(data, eta, left, right, lam)
            tests.append(
                {"point": eta, "left": left, "right": right, "statistic": g.statistic,
                 "z_hat": g.z_hat, "accepted": g.accepted}
            )
    _write_json(
        {
            "schema_version": SCHEMA_VERSION,
            "command": "merge",
            "convention": CONVENTION,
            "lam": lam,
            "change_points": list(merged.points),
            "tests": tests,
        },
        args.output,
    )
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kscpd",
        description="Nonparametric change point detection with the CUSUM KS statistic. " + CONVENTION + ".",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="detect change points in a data file")
    p.add_argument("input", help="data file (.csv long format or .json ragged arrays)")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--seed", type=int, default=0, help="seed for interval sampling")
    p.add_argument("-o", "--output", help="report path (default stdout)")
    _detector_args(p, "nwbs-auto")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("bench", help="Monte Carlo benchmark on a simulation scenario")
    p.add_argument("--scenario", required=True, choices=SCENARIOS)
    p.add_argument("--T", type=_positive_int, default=1000)
    p.add_argument("--K", type=int)
    p.add_argument("--reps", type=_positive_int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-policy", choices=("const", "poisson"), default="const")
    p.add_argument("--n-param", type=float, default=1)
    p.add_argument("--workers", type=_positive_int, default=None,
                   help="worker processes (default KSCPD_THREADS or 1)")
    p.add_argument("--out", default="bench", help="output prefix for PREFIX.csv and PREFIX.json")
    _detector_args(p, "nwbs-auto")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("generate", help="draw one dataset from a scenario")
    p.add_argument("--scenario", choices=SCENARIOS)
    p.add_argument("--config", help="JSON scenario config (fields of ScenarioSpec)")
    p.add_argument("--T", type=_positive_int)
    p.add_argument("--K", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--n-policy", choices=("const", "poisson"), default="const")
    p.add_argument("--n-param", type=float, default=1)
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("-o", "--output", help="data path (default: ragged JSON on stdout)")
    p.add_argument("--truth", help="write the true change points as JSON here")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("merge", help="merge two change point sets, testing where they disagree")
    p.add_argument("data", help="evaluation data file")
    p.add_argument("a", help="JSON change points (array or report)")
    p.add_argument("b", help="JSON change points (array or report)")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--lam", "--lambda", dest="lam", type=float)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_merge)
    return parser


def _error_json(exc: BaseException) -> str:
    err = {"type": type(exc).__name__, "message": getattr(exc, "reason", None) or str(exc)}
    if isinstance(exc, ParseError):
        err["line"] = exc.line
        err["path"] = exc.path
    return json.dumps({"schema_version": SCHEMA_VERSION, "error": err}, sort_keys=True)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", None) is None and args.command == "bench":
        args.workers = default_workers()
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (ValueError, OSError, IndexError, KeyError, TypeError) as exc:
        print(_error_json(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
