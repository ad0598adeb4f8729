"""Monte Carlo harness: generate, detect and score many replicates."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._accel import default_workers
from .metrics import abs_k_error, extended_median, hausdorff_one_sided
from .pipeline import DetectorConfig, detect
from .scenarios import ScenarioSpec, generate

log = logging.getLogger(__name__)

TIMING_FIELDS = ("wall_time",)


@dataclass(frozen=True)
class Replicate:
    """Score of one generate -> detect cycle.

    ``d_est_true`` is ``d(C_hat | C)`` (how far the worst true point is from
    the estimate), ``d_true_est`` is ``d(C | C_hat)``.
    """

    index: int
    K_true: int
    K_hat: int
    abs_error: int
    d_est_true: float
    d_true_est: float
    wall_time: float
    change_points: tuple[int, ...]
    failed: bool = False

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "K_true": self.K_true,
            "K_hat": self.K_hat,
            "abs_error": self.abs_error,
            "d_est_true": _json_float(self.d_est_true),
            "d_true_est": _json_float(self.d_true_est),
            "wall_time": self.wall_time,
            "change_points": list(self.change_points),
            "failed": self.failed,
        }


def _json_float(x: float):
    # JSON has no infinities; keep them readable and exact
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


@dataclass
class RunReport:
    """Per-replicate scores plus the aggregates derived from them."""

    spec: ScenarioSpec
    config: DetectorConfig
    seed: int
    replicates: list[Replicate] = field(default_factory=list)

    @property
    def reps(self) -> int:
        return len(self.replicates)

    @property
    def mean_abs_error(self) -> float:
        return float(np.mean([r.abs_error for r in self.replicates]))

    @property
    def median_d_est_true(self) -> float:
        return extended_median([r.d_est_true for r in self.replicates])

    @property
    def median_d_true_est(self) -> float:
        return extended_median([r.d_true_est for r in self.replicates])

    @property
    def total_time(self) -> float:
        return float(sum(r.wall_time for r in self.replicates))

    def aggregates(self) -> dict:
        return {
            "reps": self.reps,
            "mean_abs_error": self.mean_abs_error,
            "median_d_est_true": _json_float(self.median_d_est_true),
            "median_d_true_est": _json_float(self.median_d_true_est),
            "failures": sum(r.failed for r in self.replicates),
        }

    def to_dict(self) -> dict:
        return {
            "scenario": self.spec.to_dict(),
            "detector": self.config.to_dict(),
            "seed": self.seed,
            "aggregates": self.aggregates(),
            "total_time": self.total_time,
            "replicates": [r.to_dict() for r in self.replicates],
        }


def replicate_seeds(seed: int, reps: int) -> list[np.random.SeedSequence]:
    """One independent seed sequence per replicate, derived from ``seed`` only."""
    return np.random.SeedSequence(seed).spawn(reps)


def run_replicate(spec: ScenarioSpec, config: DetectorConfig, index: int, ss) -> Replicate:
    data_ss, iv_ss = ss.spawn(2)
    data, cps = generate(spec, np.random.default_rng(data_ss))
    t0 = time.perf_counter()
    failed = False
    try:
        est = tuple(detect(data, config, np.random.default_rng(iv_ss)).change_points)
    except Exception as exc:  # a failing detector scores as an empty estimate
        log.warning("replicate %d: detector failed: %s", index, exc)
        est, failed = (), True
    wall = time.perf_counter() - t0
    return Replicate(
        index=index,
        K_true=len(cps),
        K_hat=len(est),
        abs_error=abs_k_error(len(cps), len(est)),
        d_est_true=hausdorff_one_sided(est, cps),
        d_true_est=hausdorff_one_sided(cps, est),
        wall_time=wall,
        change_points=est,
        failed=failed,
    )


def _job(args):
    return run_replicate(*args)


def run_monte_carlo(
    spec: ScenarioSpec,
    config: DetectorConfig,
    reps: int,
    seed: int,
    workers: int | None = None,
) -> RunReport:
    """Run ``reps`` independent replicates.

    Replicate ``i`` draws its data and its intervals from children of the
    ``i``-th spawned seed sequence, so the report does not depend on
    ``workers`` (default from ``KSCPD_THREADS``).
    """
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    workers = default_workers() if workers is None else int(workers)
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    jobs = [(spec, config, i, ss) for i, ss in enumerate(replicate_seeds(seed, reps))]
    if workers == 1 or reps == 1:
        reps_out = [_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, reps)) as pool:
            reps_out = list(pool.map(_job, jobs, chunksize=max(1, reps // (4 * workers))))
    return RunReport(spec, config, seed, reps_out)
