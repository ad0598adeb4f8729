"""Ragged univariate time series: ``n_t >= 1`` observations per time point."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np


class Dataset:
    """Immutable ragged series indexed by time ``t = 1, ..., T``.

    Observations are stored flat in time order. ``offsets[t]`` is the number
    of observations at times ``1..t`` (so ``offsets[0] == 0``), which makes
    every ``n_{s:e}`` a difference of two prefix sums.

    Parameters
    ----------
    samples : sequence of sequences of float
        ``samples[t - 1]`` holds the observations at time ``t``.
    """

    __slots__ = ("values", "offsets")

    def __init__(self, samples: Sequence[Sequence[float]]):
        if len(samples) == 0:
            raise ValueError("dataset needs at least one time point")
        counts = np.empty(len(samples), dtype=np.int64)
        chunks = []
        for i, obs in enumerate(samples):
            arr = np.asarray(obs, dtype=np.float64).ravel()
            if arr.size == 0:
                raise ValueError(f"time point {i + 1} has no observations")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"time point {i + 1} has non-finite observations")
            counts[i] = arr.size
            chunks.append(arr)
        offsets = np.zeros(len(samples) + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        values = np.concatenate(chunks)
        values.flags.writeable = False
        offsets.flags.writeable = False
        self.values = values
        self.offsets = offsets

    @classmethod
    def from_flat(cls, values, offsets) -> Dataset:
        """Build from a flat value array and prefix-count offsets."""
        offsets = np.asarray(offsets, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        return cls([values[offsets[i] : offsets[i + 1]] for i in range(len(offsets) - 1)])

    @classmethod
    def from_series(cls, y) -> Dataset:
        """One observation per time point."""
        return cls([[v] for v in np.asarray(y, dtype=np.float64).ravel()])

    @property
    def T(self) -> int:
        return len(self.offsets) - 1

    @property
    def n_total(self) -> int:
        return int(self.offsets[-1])

    @property
    def counts(self) -> np.ndarray:
        return np.diff(self.offsets)

    @property
    def n_min(self) -> int:
        return int(self.counts.min())

    @property
    def n_max(self) -> int:
        return int(self.counts.max())

    def n_between(self, s: int, e: int) -> int:
        """``n_{s:e}``, the number of observations at times ``s..e``."""
        self._check_range(s, e)
        return int(self.offsets[e] - self.offsets[s - 1])

    def at(self, t: int) -> np.ndarray:
        """Observations at time ``t`` (1-based)."""
        self._check_range(t, t)
        return self.values[self.offsets[t - 1] : self.offsets[t]]

    def window(self, s: int, e: int) -> np.ndarray:
        """All observations at times ``s..e`` in time order."""
        self._check_range(s, e)
        return self.values[self.offsets[s - 1] : self.offsets[e]]

    def samples(self) -> list[list[float]]:
        return [self.at(t).tolist() for t in range(1, self.T + 1)]

    def transform(self, fn) -> Dataset:
        """Apply ``fn`` elementwise to every observation."""
        return Dataset.from_flat(fn(np.array(self.values)), self.offsets)

    def _check_range(self, s, e):
        if not (1 <= s <= e <= self.T):
            raise IndexError(f"time range ({s}, {e}) outside 1..{self.T}")

    def __len__(self):
        return self.T

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return np.array_equal(self.offsets, other.offsets) and np.array_equal(
            self.values, other.values
        )

    def __repr__(self):
        return f"Dataset(T={self.T}, n={self.n_total})"
