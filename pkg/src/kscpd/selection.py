"""Threshold selection by sample splitting.

Candidate change points are found on one half of the data (``W``) and
validated on the other (``Y``) by comparing, at the most discriminating
evaluation point ``z``, the sum of squared errors of the indicator
``1{Y <= z}`` around one pooled mean against two segment means plus a
penalty ``lam``. The pooled minus split SSE equals the squared CUSUM KS
value at ``z``, so a candidate survives iff ``D(z)^2 > lam``.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .segmentation import (
    Interval,
    Segmentation,
    nwbs_tree,
    tree_segmentation,
)

log = logging.getLogger(__name__)

DEFAULT_GRID_SIZE = 20
RULES = ("printed", "strict", "adaptive")


@dataclass(frozen=True)
class PenaltyConfig:
    lam: float
    tau_grid: tuple[float, ...]

    def __post_init__(self):
        grid = tuple(float(t) for t in self.tau_grid)
        if not grid:
            raise ValueError("tau grid is empty")
        if any(t <= 0 for t in grid):
            raise ValueError("tau grid must be positive")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("tau grid must be strictly increasing")
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        object.__setattr__(self, "tau_grid", grid)

    @classmethod
    def default(cls, n_total: int, grid_size: int = DEFAULT_GRID_SIZE) -> PenaltyConfig:
        """``lam = 2 log(n) / 3`` and a geometric grid from ``0.1 sqrt(log n)`` to ``sqrt(n)``."""
        logn = math.log(n_total)
        grid = np.geomspace(0.1 * math.sqrt(logn), math.sqrt(n_total), grid_size)
        return cls(2.0 * logn / 3.0, tuple(grid.tolist()))


# ---------------------------------------------------------------------------
# splitting


@dataclass(frozen=True)
class SplitPair:
    """Detection half ``detect`` (W) and evaluation half ``evaluate`` (Y).

    ``mode == "time"`` puts odd times in W and even times in Y, both
    re-indexed from 1; W index ``k`` is original time ``2k - 1``.
    ``mode == "within"`` alternates observations inside every time point and
    keeps the time axis.
    """

    detect: Dataset
    evaluate: Dataset
    mode: str

    def to_original(self, t: int) -> int:
        return 2 * t - 1 if self.mode == "time" else t


def split_even_odd(data: Dataset, mode: str = "time") -> SplitPair:
    if mode == "time":
        if data.T < 4:
            raise ValueError(f"time split needs T >= 4, got T={data.T}")
        samples = [data.at(t) for t in range(1, data.T + 1)]
        return SplitPair(Dataset(samples[0::2]), Dataset(samples[1::2]), mode)
    if mode == "within":
        if data.n_min < 2:
            raise ValueError("within-time split needs at least two observations per time")
        samples = [data.at(t) for t in range(1, data.T + 1)]
        return SplitPair(
            Dataset([x[0::2] for x in samples]), Dataset([x[1::2] for x in samples]), mode
        )
    raise ValueError(f"unknown split mode {mode!r}")


# ---------------------------------------------------------------------------
# the SSE test


@dataclass(frozen=True)
class GainTest:
    accepted: bool
    z_hat: float
    statistic: float
    split_sse: float
    pooled_sse: float
    lam: float

    @property
    def gain(self) -> float:
        return self.pooled_sse - self.split_sse


def _segment_counts(data, left, eta, right):
    if not (0 <= left < eta < right <= data.T):
        raise ValueError(f"need 0 <= left < eta < right <= T, got ({left}, {eta}, {right})")
    lo = data.offsets[left]
    mid = data.offsets[eta]
    hi = data.offsets[right]
    a = np.sort(data.values[lo:mid])
    b = np.sort(data.values[mid:hi])
    grid = np.unique(np.concatenate([a, b]))
    cl = np.searchsorted(a, grid, side="right").astype(np.int64)
    cr = np.searchsorted(b, grid, side="right").astype(np.int64)
    return grid, cl, cr, a.size, b.size


def sse_gain_test(dataY: Dataset, eta: int, left: int, right: int, lam: float) -> GainTest:
    """Test candidate ``eta`` between neighbours ``left`` and ``right``.

    The two segments are times ``left+1..eta`` and ``eta+1..right``. ``z_hat``
    is the smallest window value maximising ``|D(z)|``; the candidate is
    accepted iff ``split_sse + lam < pooled_sse`` at ``z_hat``.
    """
    grid, cl, cr, nl, nr = _segment_counts(dataY, left, eta, right)
    N = nl + nr
    ca = cl + cr
    num = cl * N - ca * nl
    j = int(np.argmax(np.abs(num)))
    kl, kr, ka = int(cl[j]), int(cr[j]), int(ca[j])
    split = kl * (nl - kl) / nl + kr * (nr - kr) / nr
    pooled = ka * (N - ka) / N
    stat = int(num[j]) / math.sqrt(float(nl * nr * N))
    return GainTest(split + lam < pooled, float(grid[j]), stat, split, pooled, lam)


def _bracket(points: Sequence[int], eta: int, T: int):
    left = max((p for p in points if p < eta), default=0)
    right = min((p for p in points if p > eta), default=T)
    return left, right


def update_merge(dataY: Dataset, B1: Segmentation, B2: Segmentation, lam: float) -> Segmentation:
    """Merge two candidate sets, re-testing only the points they disagree on.

    Points in both sets are kept untested. A point in only one set is
    bracketed by its neighbours in the other set (with 0 and ``T`` as
    sentinels) and kept iff it passes :func:`sse_gain_test`.
    """
    p1, p2 = set(B1.points), set(B2.points)
    if p1 == p2:
        raise ValueError("update_merge needs two different sets")
    info = {d.point: d for d in B2.details}
    info.update({d.point: d for d in B1.details})
    keep = [info[p] for p in sorted(p1 & p2)]
    for eta in sorted(p1 ^ p2):
        other = B1.points if eta in p2 else B2.points
        if not 0 < eta < dataY.T:
            log.warning("candidate %d cannot be bracketed inside (0, %d); skipped", eta, dataY.T)
            continue
        left, right = _bracket(other, eta, dataY.T)
        if sse_gain_test(dataY, eta, left, right, lam).accepted:
            keep.append(info[eta])
    return Segmentation(tuple(keep))


# ---------------------------------------------------------------------------
# full tuning walk


def _sup_abs(data, lo, hi, eta):
    grid, cl, cr, nl, nr = _segment_counts(data, lo - 1, eta, hi)
    N = nl + nr
    num = np.abs(cl * N - (cl + cr) * nl)
    return int(num.max()) / math.sqrt(float(nl * nr * N))


def _strict_drop(dataY, intervals, eta, left, right, lam):
    # drop iff lam beats every clipped interval's squared statistic at eta
    best = 0.0
    for a, b in intervals:
        lo, hi = max(left + 1, a), min(right, b)
        if lo <= eta < hi:
            best = max(best, _sup_abs(dataY, lo, hi, eta))
    return lam > best * best


@dataclass
class AutoSelection:
    """Outcome of the tuning walk, in the index space of the split halves."""

    segmentation: Segmentation
    tau: float
    index: int
    candidates: list[Segmentation] = field(default_factory=list)
    tests: list[tuple[int, GainTest | None]] = field(default_factory=list)


def nwbs_auto_trace(
    dataY: Dataset,
    dataW: Dataset,
    intervals: Sequence[Interval],
    config: PenaltyConfig,
    rule: str = "adaptive",
) -> AutoSelection:
    """Run the selection walk and return every intermediate set.

    One candidate set per threshold in ``config.tau_grid`` is computed from
    ``dataW``; the sets are nested and shrink as ``tau`` grows. Starting from
    the smallest ``tau`` the walk moves to the next set while the smallest
    point it would drop fails to justify itself on ``dataY``, and stops as
    soon as it does.

    ``rule`` decides what "fails to justify itself" means:

    * ``printed``: ``split_sse + lam > pooled_sse`` at ``z_hat`` between the
      neighbours in the next set;
    * ``strict``: ``lam`` exceeds the squared statistic at the point over
      every sampled interval clipped to those neighbours;
    * ``adaptive``: ``printed`` when exactly one point is dropped, ``strict``
      when several are (the single-point test is only sound for one).
    """
    if rule not in RULES:
        raise ValueError(f"unknown rule {rule!r}; choose from {RULES}")
    grid = config.tau_grid
    lam = config.lam
    nodes = nwbs_tree(dataW, intervals, grid[0])
    sets = [tree_segmentation(nodes, tau) for tau in grid]
    current, index = sets[0], 0
    tests: list[tuple[int, GainTest | None]] = []
    for m in range(len(grid) - 1):
        nxt = sets[m + 1]
        if nxt.points == current.points:
            current, index = nxt, m + 1
            continue
        dropped = sorted(set(current.points) - set(nxt.points))
        if not dropped:
            current, index = nxt, m + 1
            continue
        eta = dropped[0]
        left, right = _bracket(nxt.points, eta, dataY.T)
        if not left < eta < right:
            # no evaluation data on one side of eta
            tests.append((eta, None))
            current, index = nxt, m + 1
            continue
        test = sse_gain_test(dataY, eta, left, right, lam)
        tests.append((eta, test))
        if rule == "strict" or (rule == "adaptive" and len(dropped) > 1):
            drop = _strict_drop(dataY, intervals, eta, left, right, lam)
        else:
            drop = test.split_sse + lam > test.pooled_sse
        if drop:
            current, index = nxt, m + 1
        else:
            break
    return AutoSelection(current, grid[index], index, sets, tests)


def nwbs_auto(
    dataY: Dataset,
    dataW: Dataset,
    intervals: Sequence[Interval],
    config: PenaltyConfig,
    rule: str = "adaptive",
) -> Segmentation:
    """Wild binary segmentation with the threshold chosen by sample splitting."""
    return nwbs_auto_trace(dataY, dataW, intervals, config, rule).segmentation


__all__ = [
    "AutoSelection",
    "GainTest",
    "PenaltyConfig",
    "SplitPair",
    "nwbs_auto",
    "nwbs_auto_trace",
    "split_even_odd",
    "sse_gain_test",
    "update_merge",
]
