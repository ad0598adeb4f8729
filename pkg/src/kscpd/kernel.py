"""Empirical CDFs and the CUSUM Kolmogorov-Smirnov statistic.

For a window ``(s, e)`` and a split ``t`` the two sides are times ``s..t``
and ``t+1..e``. With ``nl``/``nr`` observations on each side, ``N = nl + nr``,
``cl(z)`` the number of left observations ``<= z`` and ``ca(z)`` the number of
window observations ``<= z``::

    D^t_{s,e}(z) = (cl(z) * N - ca(z) * nl) / sqrt(nl * nr * N)

which is the usual ``sqrt(nl*nr/N) * (F_left(z) - F_right(z))`` rewritten so
the numerator is an exact integer. The supremum over ``z`` is attained at an
observed value, so every scan below only visits the distinct window values.

A window start of ``s = 0`` is accepted wherever a window is: time 0 carries
no observations, so it only widens the candidate range to include ``t = 1``.

Two exact scans are provided:

* ``sweep``: for each candidate ``t`` walk the distinct values once,
  ``O(L * U)`` for ``L`` time points and ``U`` distinct values.
* ``kinetic``: a kinetic segment tree over the value ranks; each leaf holds a
  line in ``nl`` and the tree tracks the leftmost maximiser as ``nl`` grows,
  ``O(n log^2 n)`` amortised. Used for large windows.

Both return bit-identical results (same integer numerators, same single
division, same tie-breaks: smallest ``t`` then smallest ``z``).
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from ._accel import USE_NUMBA, njit
from .data import Dataset

# auto mode switches to the kinetic scan once the sweep's (time points x
# distinct values) cell count exceeds this multiple of n * log2(n)^2
KINETIC_COST_RATIO = 14.0

_MODES = {"auto": 0, "sweep": 1, "kinetic": 2}
_INF = np.iinfo(np.int64).max


@dataclass(frozen=True)
class CusumResult:
    """Maximised CUSUM KS statistic over a window.

    ``argmax_t`` is the last time of the left segment and ``argmax_z`` the
    (smallest) evaluation point attaining the supremum at that split.
    """

    value: float
    argmax_t: int
    argmax_z: float
    window: tuple[int, int]


# ---------------------------------------------------------------------------
# numba kernels


@njit(cache=True)
def _dense_ranks(x):
    order = np.argsort(x, kind="mergesort")
    ranks = np.empty(x.size, dtype=np.int64)
    distinct = np.empty(x.size, dtype=np.float64)
    u = -1
    prev = 0.0
    for j in range(x.size):
        v = x[order[j]]
        if u < 0 or v != prev:
            u += 1
            distinct[u] = v
            prev = v
        ranks[order[j]] = u
    return ranks, distinct[: u + 1]


@njit(cache=True)
def _sweep_scan(ranks, off, k0, k1, n_distinct):
    N = off[off.size - 1]
    ca = np.zeros(n_distinct, dtype=np.int64)
    for i in range(ranks.size):
        ca[ranks[i]] += 1
    for u in range(1, n_distinct):
        ca[u] += ca[u - 1]
    hist = np.zeros(n_distinct, dtype=np.int64)
    best_val = -1.0
    best_k = -1
    best_u = -1
    for k in range(k1 + 1):
        for i in range(off[k], off[k + 1]):
            hist[ranks[i]] += 1
        if k < k0:
            continue
        nl = off[k + 1]
        nr = N - nl
        cl = 0
        m = -1
        mu = 0
        for u in range(n_distinct):
            cl += hist[u]
            d = cl * N - ca[u] * nl
            if d < 0:
                d = -d
            if d > m:
                m = d
                mu = u
        val = m / np.sqrt(float(nl * nr * N))
        if val > best_val:
            best_val = val
            best_k = k
            best_u = mu
    return best_val, best_k, best_u


@njit(cache=True)
def _kst_pull(node, A, B, W, melt, x):
    lc = 2 * node
    rc = lc + 1
    vl = A[lc] + B[lc] * x
    vr = A[rc] + B[rc] * x
    if vl >= vr:
        win = lc
        los = rc
        loser_right = True
    else:
        win = rc
        los = lc
        loser_right = False
    A[node] = A[win]
    B[node] = B[win]
    W[node] = W[win]
    m = min(melt[lc], melt[rc])
    db = B[los] - B[win]
    if db > 0:
        d = A[win] - A[los]
        if loser_right:
            # a right-hand line must be strictly ahead to take over
            xm = d // db + 1
        else:
            xm = -((-d) // db)
        if xm < m:
            m = xm
    melt[node] = m


@njit(cache=True)
def _kst_build(hi_leaf, A, B, W, melt, lazy, slopes, x, st):
    sn, slo, shi, sst = st[0], st[1], st[2], st[3]
    top = 0
    sn[0], slo[0], shi[0], sst[0] = 1, 0, hi_leaf, 0
    while top >= 0:
        node, lo, hi = sn[top], slo[top], shi[top]
        lazy[node] = 0
        if lo == hi:
            A[node] = 0
            B[node] = slopes[lo]
            W[node] = lo
            melt[node] = _INF
            top -= 1
        elif sst[top] == 0:
            sst[top] = 1
            mid = (lo + hi) // 2
            top += 1
            sn[top], slo[top], shi[top], sst[top] = 2 * node, lo, mid, 0
            top += 1
            sn[top], slo[top], shi[top], sst[top] = 2 * node + 1, mid + 1, hi, 0
        else:
            _kst_pull(node, A, B, W, melt, x)
            top -= 1


@njit(cache=True)
def _kst_push(node, A, lazy):
    v = lazy[node]
    if v != 0:
        A[2 * node] += v
        lazy[2 * node] += v
        A[2 * node + 1] += v
        lazy[2 * node + 1] += v
        lazy[node] = 0


@njit(cache=True)
def _kst_add(hi_leaf, ql, v, A, B, W, melt, lazy, x, st):
    # adds v to every intercept with leaf index >= ql
    sn, slo, shi, sst = st[0], st[1], st[2], st[3]
    top = 0
    sn[0], slo[0], shi[0], sst[0] = 1, 0, hi_leaf, 0
    while top >= 0:
        node, lo, hi = sn[top], slo[top], shi[top]
        if sst[top] == 1:
            _kst_pull(node, A, B, W, melt, x)
            top -= 1
        elif hi < ql:
            top -= 1
        elif ql <= lo:
            A[node] += v
            lazy[node] += v
            top -= 1
        else:
            _kst_push(node, A, lazy)
            sst[top] = 1
            mid = (lo + hi) // 2
            top += 1
            sn[top], slo[top], shi[top], sst[top] = 2 * node, lo, mid, 0
            top += 1
            sn[top], slo[top], shi[top], sst[top] = 2 * node + 1, mid + 1, hi, 0


@njit(cache=True)
def _kst_heaten(A, B, W, melt, lazy, x, st):
    sn, sst = st[0], st[3]
    if melt[1] > x:
        return
    top = 0
    sn[0], sst[0] = 1, 0
    while top >= 0:
        node = sn[top]
        if sst[top] == 1:
            _kst_pull(node, A, B, W, melt, x)
            top -= 1
        elif melt[node] > x:
            top -= 1
        else:
            _kst_push(node, A, lazy)
            sst[top] = 1
            top += 1
            sn[top], sst[top] = 2 * node, 0
            top += 1
            sn[top], sst[top] = 2 * node + 1, 0


@njit(cache=True)
def _kinetic_scan(ranks, off, k0, k1, n_distinct):
    N = off[off.size - 1]
    ca = np.zeros(n_distinct, dtype=np.int64)
    for i in range(ranks.size):
        ca[ranks[i]] += 1
    for u in range(1, n_distinct):
        ca[u] += ca[u - 1]
    size = 4 * n_distinct
    # tree 1 maximises f(u) = cl(u)*N - ca(u)*nl, tree 2 maximises -f(u)
    A1 = np.zeros(size, dtype=np.int64)
    B1 = np.zeros(size, dtype=np.int64)
    W1 = np.zeros(size, dtype=np.int64)
    M1 = np.zeros(size, dtype=np.int64)
    L1 = np.zeros(size, dtype=np.int64)
    A2 = np.zeros(size, dtype=np.int64)
    B2 = np.zeros(size, dtype=np.int64)
    W2 = np.zeros(size, dtype=np.int64)
    M2 = np.zeros(size, dtype=np.int64)
    L2 = np.zeros(size, dtype=np.int64)
    hi = n_distinct - 1
    st = np.zeros((4, 256), dtype=np.int64)
    _kst_build(hi, A1, B1, W1, M1, L1, -ca, 0, st)
    _kst_build(hi, A2, B2, W2, M2, L2, ca, 0, st)
    best_val = -1.0
    best_k = -1
    best_u = -1
    x = 0
    for k in range(k1 + 1):
        for i in range(off[k], off[k + 1]):
            r = ranks[i]
            _kst_add(hi, r, N, A1, B1, W1, M1, L1, x, st)
            _kst_add(hi, r, -N, A2, B2, W2, M2, L2, x, st)
        x = off[k + 1]
        _kst_heaten(A1, B1, W1, M1, L1, x, st)
        _kst_heaten(A2, B2, W2, M2, L2, x, st)
        if k < k0:
            continue
        nl = x
        nr = N - nl
        f_max = A1[1] + B1[1] * x
        g_max = A2[1] + B2[1] * x
        if f_max > g_max:
            m = f_max
            mu = W1[1]
        elif g_max > f_max:
            m = g_max
            mu = W2[1]
        else:
            m = f_max
            mu = min(W1[1], W2[1])
        val = m / np.sqrt(float(nl * nr * N))
        if val > best_val:
            best_val = val
            best_k = k
            best_u = mu
    return best_val, best_k, best_u


@njit(cache=True)
def _scan_one(values, offsets, s, e, mode):
    lo = max(s, 1)
    base = offsets[lo - 1]
    off = offsets[lo - 1 : e + 1] - base
    ranks, distinct = _dense_ranks(values[base : offsets[e]])
    k0 = s + 1 - lo
    k1 = e - 1 - lo
    n_distinct = distinct.size
    n = ranks.size
    cells = float(k1 + 1) * n_distinct
    use_kinetic = mode == 2 or (mode == 0 and cells > KINETIC_COST_RATIO * n * np.log2(n) ** 2)
    if use_kinetic and n_distinct > 1:
        val, k, u = _kinetic_scan(ranks, off, k0, k1, n_distinct)
    else:
        val, k, u = _sweep_scan(ranks, off, k0, k1, n_distinct)
    return val, lo + k, distinct[u]


@njit(cache=True)
def _scan_many(values, offsets, starts, ends, mode):
    m = starts.size
    vals = np.empty(m, dtype=np.float64)
    ts = np.empty(m, dtype=np.int64)
    zs = np.empty(m, dtype=np.float64)
    for i in range(m):
        vals[i], ts[i], zs[i] = _scan_one(values, offsets, starts[i], ends[i], mode)
    return vals, ts, zs


# ---------------------------------------------------------------------------
# pure numpy path


def _sweep_scan_numpy(ranks, off, k0, k1, n_distinct):
    N = int(off[-1])
    ca = np.cumsum(np.bincount(ranks, minlength=n_distinct)).astype(np.int64)
    hist = np.zeros(n_distinct, dtype=np.int64)
    best_val, best_k, best_u = -1.0, -1, -1
    for k in range(k1 + 1):
        np.add.at(hist, ranks[off[k] : off[k + 1]], 1)
        if k < k0:
            continue
        nl = int(off[k + 1])
        nr = N - nl
        d = np.abs(np.cumsum(hist) * N - ca * nl)
        u = int(np.argmax(d))
        val = int(d[u]) / math.sqrt(float(nl * nr * N))
        if val > best_val:
            best_val, best_k, best_u = val, k, u
    return best_val, best_k, best_u


def _scan_one_numpy(values, offsets, s, e):
    lo = max(s, 1)
    base = offsets[lo - 1]
    off = offsets[lo - 1 : e + 1] - base
    distinct, ranks = np.unique(values[base : offsets[e]], return_inverse=True)
    val, k, u = _sweep_scan_numpy(ranks.astype(np.int64), off, s + 1 - lo, e - 1 - lo, distinct.size)
    return float(val), int(lo + k), float(distinct[u])


# ---------------------------------------------------------------------------
# public API


def _check_window(data: Dataset, s: int, e: int):
    if not (0 <= s < e <= data.T):
        raise IndexError(f"window ({s}, {e}) outside 0..{data.T}")


def empirical_cdf(data: Dataset, s: int, e: int, z: float) -> float:
    """Fraction of observations at times ``s..e`` that are ``<= z``."""
    obs = data.window(s, e)
    return int(np.count_nonzero(obs <= z)) / obs.size


def _split_counts(data, s, e, t, z):
    lo = max(s, 1)
    left = data.values[data.offsets[lo - 1] : data.offsets[t]]
    right = data.values[data.offsets[t] : data.offsets[e]]
    cl = int(np.count_nonzero(left <= z))
    ca = cl + int(np.count_nonzero(right <= z))
    return cl, ca, left.size, left.size + right.size


def cusum_ks_at(data: Dataset, s: int, e: int, t: int, z: float) -> float:
    """Signed ``D^t_{s,e}(z)``; left side is times ``s..t``, right ``t+1..e``."""
    _check_window(data, s, e)
    if not (max(s, 1) <= t < e):
        raise ValueError(f"split t={t} outside [{max(s, 1)}, {e})")
    cl, ca, nl, N = _split_counts(data, s, e, t, z)
    return (cl * N - ca * nl) / math.sqrt(float(nl * (N - nl) * N))


def max_cusum(data: Dataset, s: int, e: int, method: str = "auto") -> CusumResult | None:
    """Maximise ``sup_z |D^t_{s,e}(z)|`` over ``s < t < e``.

    Returns ``None`` when the window has no interior split (``e - s < 2``).
    ``method`` picks the scan (``auto``, ``sweep``, ``kinetic``); all agree
    exactly. The numpy backend always sweeps.
    """
    _check_window(data, s, e)
    if e - s < 2:
        return None
    if method not in _MODES:
        raise ValueError(f"unknown method {method!r}")
    if USE_NUMBA:
        val, t, z = _scan_one(data.values, data.offsets, s, e, _MODES[method])
        return CusumResult(float(val), int(t), float(z), (s, e))
    val, t, z = _scan_one_numpy(data.values, data.offsets, s, e)
    return CusumResult(val, t, z, (s, e))


def max_cusum_many(
    data: Dataset, windows: Sequence[tuple[int, int]], method: str = "auto"
) -> list[CusumResult | None]:
    """``max_cusum`` over many windows in one call."""
    out: list[CusumResult | None] = [None] * len(windows)
    live = [i for i, (s, e) in enumerate(windows) if e - s >= 2]
    for s, e in windows:
        _check_window(data, s, e)
    if not live:
        return out
    if USE_NUMBA:
        starts = np.array([windows[i][0] for i in live], dtype=np.int64)
        ends = np.array([windows[i][1] for i in live], dtype=np.int64)
        vals, ts, zs = _scan_many(data.values, data.offsets, starts, ends, _MODES[method])
        for j, i in enumerate(live):
            out[i] = CusumResult(float(vals[j]), int(ts[j]), float(zs[j]), tuple(windows[i]))
    else:
        for i in live:
            s, e = windows[i]
            val, t, z = _scan_one_numpy(data.values, data.offsets, s, e)
            out[i] = CusumResult(val, t, z, (s, e))
    return out


# ---------------------------------------------------------------------------
# population version


def _cdf_table(cdfs, grid):
    return np.array([np.asarray(F(grid), dtype=np.float64) for F in cdfs])


def population_cusum(
    weights: Sequence[float], cdfs: Sequence[Callable], s: int, e: int, t: int, z: float
) -> float:
    """Signed population CUSUM ``Delta^t_{s,e}(z)``.

    ``weights[u-1]`` is ``n_u`` and ``cdfs[u-1]`` the CDF at time ``u``. The
    pooled CDF of a stretch is the ``n_u``-weighted mean of its CDFs.
    """
    lo = max(s, 1)
    if not (lo <= t < e <= len(weights)):
        raise ValueError(f"split t={t} invalid for window ({s}, {e})")
    w = np.asarray(weights, dtype=np.float64)
    F = np.array([float(cdfs[u](z)) for u in range(lo - 1, e)])
    k = t - lo + 1
    wl, wr = w[lo - 1 : t], w[t:e]
    nl, nr = wl.sum(), wr.sum()
    fl = np.dot(wl, F[:k]) / nl
    fr = np.dot(wr, F[k:]) / nr
    return math.sqrt(nl * nr / (nl + nr)) * (fl - fr)


def population_max(
    weights: Sequence[float], cdfs: Sequence[Callable], s: int, e: int, grid
) -> CusumResult | None:
    """Maximise ``|Delta^t_{s,e}(z)|`` over ``s < t < e`` and ``z`` in ``grid``.

    The supremum over the real line is only reached when ``grid`` contains
    every point where some CDF jumps or bends its maximiser; for step CDFs
    pass all knots.
    """
    grid = np.unique(np.asarray(grid, dtype=np.float64))
    if grid.size == 0:
        raise ValueError("empty evaluation grid")
    if e - s < 2:
        return None
    lo = max(s, 1)
    w = np.asarray(weights, dtype=np.float64)[lo - 1 : e]
    F = _cdf_table(cdfs[lo - 1 : e], grid)
    cw = np.cumsum(w)
    cwF = np.cumsum(w[:, None] * F, axis=0)
    N = cw[-1]
    best = (-1.0, -1, 0.0)
    for t in range(s + 1, e):
        k = t - lo
        nl = cw[k]
        nr = N - nl
        fl = cwF[k] / nl
        fr = (cwF[-1] - cwF[k]) / nr
        d = np.abs(math.sqrt(nl * nr / N) * (fl - fr))
        j = int(np.argmax(d))
        if d[j] > best[0]:
            best = (float(d[j]), t, float(grid[j]))
    return CusumResult(best[0], best[1], best[2], (s, e))
