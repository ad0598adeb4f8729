"""Accuracy measures for estimated change point sets."""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence


def abs_k_error(true_K: int, est_K: int) -> int:
    return abs(int(true_K) - int(est_K))


def hausdorff_one_sided(inner: Iterable[int], outer: Iterable[int]) -> float:
    """``d(inner | outer) = max_{b in outer} min_{a in inner} |a - b|``.

    An empty ``inner`` gives ``+inf`` (checked first); an empty ``outer``
    otherwise gives ``-inf``, the max over an empty set.
    """
    inner = sorted(inner)
    outer = list(outer)
    if not inner:
        return math.inf
    if not outer:
        return -math.inf
    return float(max(min(abs(a - b) for a in inner) for b in outer))


def extended_median(values: Sequence[float]) -> float:
    """Median with ``-inf < reals < +inf``.

    For an even count the two middle values are averaged unless one of them
    is infinite, in which case the infinite one wins (``+inf`` first), so the
    median is ``+inf`` whenever at least half the values are.
    """
    if not values:
        raise ValueError("median of an empty sequence")
    xs = sorted(values)
    n = len(xs)
    lo, hi = xs[(n - 1) // 2], xs[n // 2]
    if lo == hi:
        return float(lo)
    if hi == math.inf:
        return math.inf
    if lo == -math.inf:
        return -math.inf
    return (lo + hi) / 2.0
