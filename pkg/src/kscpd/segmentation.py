"""Binary and wild binary segmentation driven by the CUSUM KS statistic.

A reported change point ``b`` is the last time of the left segment: the
distribution changes between ``b`` and ``b + 1``.

The two detectors recurse differently on purpose. Binary segmentation splits
``(s, e)`` into ``(s, b - 1)`` and ``(b, e)``; wild binary segmentation into
``(s, b)`` and ``(b + 1, e)``. Both are kept as originally stated.
"""

from __future__ import annotations

from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .data import Dataset
from .kernel import max_cusum, max_cusum_many


class Interval(NamedTuple):
    alpha: int
    beta: int


@dataclass(frozen=True)
class DetectedPoint:
    point: int
    window: tuple[int, int]
    value: float


@dataclass(frozen=True)
class Segmentation:
    """Sorted change points plus the window and statistic that produced each."""

    details: tuple[DetectedPoint, ...] = ()
    points: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        ordered = tuple(sorted(self.details, key=lambda d: d.point))
        pts = tuple(d.point for d in ordered)
        if len(set(pts)) != len(pts):
            raise ValueError(f"duplicate change points in {pts}")
        object.__setattr__(self, "details", ordered)
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_points(cls, points, windows=None, values=None) -> Segmentation:
        points = [int(p) for p in points]
        windows = windows or [(0, 0)] * len(points)
        values = values or [float("nan")] * len(points)
        return cls(tuple(DetectedPoint(p, tuple(w), float(v)) for p, w, v in zip(points, windows, values)))

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[int]:
        return iter(self.points)

    def __contains__(self, t) -> bool:
        return t in self.points

    def mapped(self, fn) -> Segmentation:
        """Same segmentation with every point passed through ``fn``."""
        return Segmentation(
            tuple(DetectedPoint(int(fn(d.point)), d.window, d.value) for d in self.details)
        )


def _resolve_window(data, s, e):
    e = data.T if e is None else e
    if not (0 <= s < e <= data.T):
        raise IndexError(f"window ({s}, {e}) outside 0..{data.T}")
    return s, e


def nbs(data: Dataset, tau: float, s: int = 0, e: int | None = None) -> Segmentation:
    """Nonparametric binary segmentation on ``(s, e)`` with threshold ``tau``.

    ``s = 0`` (the default) lets time 1 be a candidate split.
    """
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    s, e = _resolve_window(data, s, e)
    found = []
    stack = [(s, e)]
    while stack:
        s_, e_ = stack.pop()
        if e_ - s_ <= 2:
            continue
        res = max_cusum(data, s_, e_)
        if res.value <= tau:
            continue
        b = res.argmax_t
        found.append(DetectedPoint(b, (s_, e_), res.value))
        stack.append((b, e_))
        stack.append((s_, b - 1))
    return Segmentation(tuple(found))


def sample_intervals(
    T: int, S: int, max_len: int | None = None, rng=None
) -> list[Interval]:
    """Draw ``S`` intervals with both endpoints uniform on ``{1, ..., T}``.

    Each pair is sorted into ``alpha <= beta``. With ``max_len`` set, pairs
    with ``beta - alpha > max_len`` are redrawn.
    """
    if S < 1:
        raise ValueError(f"S must be >= 1, got {S}")
    if max_len is not None and not (2 <= max_len <= T):
        raise ValueError(f"max_len must lie in [2, {T}], got {max_len}")
    rng = np.random.default_rng(rng)
    out: list[Interval] = []
    while len(out) < S:
        a, b = rng.integers(1, T + 1, size=2)
        lo, hi = (int(a), int(b)) if a <= b else (int(b), int(a))
        if max_len is not None and hi - lo > max_len:
            continue
        out.append(Interval(lo, hi))
    return out


def _as_arrays(intervals):
    arr = np.asarray([tuple(iv) for iv in intervals], dtype=np.int64).reshape(-1, 2)
    if arr.shape[0] == 0:
        raise ValueError("need at least one interval")
    return arr[:, 0], arr[:, 1]


class _WindowCache:
    """Memoised ``max_cusum`` per window for one dataset."""

    def __init__(self, data):
        self.data = data
        self.store: dict[tuple[int, int], object] = {}

    def best(self, s, e, alphas, betas):
        sm = np.maximum(alphas, s)
        em = np.minimum(betas, e)
        live = np.flatnonzero(em - sm >= 2)
        if live.size == 0:
            return None
        keys = list(dict.fromkeys(zip(sm[live].tolist(), em[live].tolist())))
        todo = [k for k in keys if k not in self.store]
        if todo:
            for k, res in zip(todo, max_cusum_many(self.data, todo)):
                self.store[k] = res
        # first maximal m wins; windows with e_m - s_m < 2 score -1
        best_m, best_res = -1, None
        best_val = -1.0
        for m in live.tolist():
            res = self.store[(int(sm[m]), int(em[m]))]
            if res.value > best_val:
                best_val, best_m, best_res = res.value, m, res
        return best_m, best_res


@dataclass(frozen=True)
class TreeNode:
    """One accepted split of the wild binary segmentation recursion.

    ``path_min`` is the smallest statistic along the path from the root, so
    the node survives exactly for thresholds ``tau < path_min``.
    """

    point: int
    value: float
    path_min: float
    window: tuple[int, int]
    interval: int


def nwbs_tree(
    data: Dataset,
    intervals: Sequence[Interval],
    tau: float,
    s: int = 0,
    e: int | None = None,
) -> list[TreeNode]:
    """Run the wild binary segmentation recursion at ``tau`` and keep the tree.

    Which interval wins at a given window does not depend on the threshold,
    only whether the recursion continues does, so the output for any
    ``tau' >= tau`` is ``{node.point : node.path_min > tau'}``.
    """
    s, e = _resolve_window(data, s, e)
    alphas, betas = _as_arrays(intervals)
    cache = _WindowCache(data)
    nodes: list[TreeNode] = []
    stack = [(s, e, np.inf)]
    while stack:
        s_, e_, pmin = stack.pop()
        hit = cache.best(s_, e_, alphas, betas)
        if hit is None:
            continue
        m, res = hit
        if not res.value > tau:
            continue
        b = res.argmax_t
        pm = min(pmin, res.value)
        nodes.append(TreeNode(b, res.value, pm, res.window, m))
        stack.append((b + 1, e_, pm))
        stack.append((s_, b, pm))
    return nodes


def tree_segmentation(nodes: Sequence[TreeNode], tau: float) -> Segmentation:
    """Change points of a ``nwbs_tree`` that survive threshold ``tau``."""
    return Segmentation(
        tuple(DetectedPoint(n.point, n.window, n.value) for n in nodes if n.path_min > tau)
    )


def nwbs(
    data: Dataset,
    intervals: Sequence[Interval],
    tau: float,
    s: int = 0,
    e: int | None = None,
) -> Segmentation:
    """Nonparametric wild binary segmentation over the given random intervals.

    At each window ``(s, e)`` every interval is clipped to ``[s, e]``; clips
    with fewer than two interior splits are skipped, the clip with the largest
    maximal CUSUM (smallest index on ties) is compared with ``tau``.
    """
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    return tree_segmentation(nwbs_tree(data, intervals, tau, s, e), tau)
