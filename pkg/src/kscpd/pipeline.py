"""One-call detection: method choice, interval sampling, threshold selection."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .data import Dataset
from .segmentation import Segmentation, nbs, nwbs, sample_intervals
from .selection import RULES, PenaltyConfig, nwbs_auto_trace, split_even_odd

METHODS = ("nbs", "nwbs", "nwbs-auto")
DEFAULT_INTERVALS = 120


@dataclass(frozen=True)
class DetectorConfig:
    """Settings for :func:`detect`.

    ``tau`` is required for ``nbs``/``nwbs``. For ``nwbs-auto`` ``lam`` and
    ``tau_grid`` default to :meth:`PenaltyConfig.default` for the observation
    count of the evaluation half, the sample the penalty is applied to.
    ``max_len`` is on the original time scale.
    """

    method: str = "nwbs-auto"
    tau: float | None = None
    tau_grid: tuple[float, ...] | None = None
    lam: float | None = None
    n_intervals: int = DEFAULT_INTERVALS
    max_len: int | None = None
    split_mode: str = "time"
    rule: str = "adaptive"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.method in ("nbs", "nwbs") and (self.tau is None or not self.tau > 0):
            raise ValueError(f"method {self.method} needs a positive tau")
        if self.rule not in RULES:
            raise ValueError(f"unknown rule {self.rule!r}; choose from {RULES}")
        if self.method != "nbs" and self.n_intervals < 1:
            raise ValueError("n_intervals must be >= 1")
        if self.tau_grid is not None:
            object.__setattr__(self, "tau_grid", tuple(float(t) for t in self.tau_grid))

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["tau_grid"] is not None:
            d["tau_grid"] = list(d["tau_grid"])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> DetectorConfig:
        return cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})


@dataclass
class Detection:
    """Change points on the original time axis plus what produced them."""

    segmentation: Segmentation
    parameters: dict = field(default_factory=dict)

    @property
    def change_points(self) -> list[int]:
        return list(self.segmentation.points)


def penalty_for(n_total: int, config: DetectorConfig) -> PenaltyConfig:
    base = PenaltyConfig.default(n_total)
    return PenaltyConfig(
        base.lam if config.lam is None else config.lam,
        base.tau_grid if config.tau_grid is None else config.tau_grid,
    )


def detect(data: Dataset, config: DetectorConfig, rng=None) -> Detection:
    """Run the configured detector on ``data``.

    ``rng`` (a seed or ``numpy.random.Generator``) drives interval sampling
    and is the only randomness involved.
    """
    rng = np.random.default_rng(rng)
    params: dict = {"method": config.method}
    if config.method == "nbs":
        return Detection(nbs(data, config.tau), {**params, "tau": config.tau})
    if config.method == "nwbs":
        ivs = sample_intervals(data.T, config.n_intervals, config.max_len, rng)
        seg = nwbs(data, ivs, config.tau)
        return Detection(seg, {**params, "tau": config.tau, "n_intervals": len(ivs)})

    pair = split_even_odd(data, config.split_mode)
    pen = penalty_for(pair.evaluate.n_total, config)
    max_len = config.max_len
    if max_len is not None and config.split_mode == "time":
        max_len = max(2, math.ceil(max_len / 2))
    ivs = sample_intervals(pair.detect.T, config.n_intervals, max_len, rng)
    sel = nwbs_auto_trace(pair.evaluate, pair.detect, ivs, pen, config.rule)
    seg = sel.segmentation.mapped(pair.to_original)
    params.update(
        lam=pen.lam,
        tau_grid=list(pen.tau_grid),
        selected_tau=sel.tau,
        n_intervals=len(ivs),
        split_mode=config.split_mode,
        rule=config.rule,
    )
    return Detection(seg, params)
