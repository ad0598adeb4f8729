"""Generative models for the simulation study.

All scenarios split ``1..T`` into ``K + 1`` segments ``A_j = [eta_{j-1}+1, eta_j]``
with evenly spaced change points ``eta_j = floor(j T / (K + 1))``. Odd-numbered
segments use one law, even-numbered segments the other:

* scenario 2: ``theta + eps / sqrt(3)``, ``eps ~ t_3``, ``theta`` 1 on odd
  segments and 0 otherwise, ``K = floor(sqrt(T / (2 log T)))``;
* scenario 3: ``theta + N(0, 1)`` with the same ``theta``, ``K = 5``;
* scenario 4: ``theta * N(0, 1)`` with ``theta`` 0.2 on odd segments and 1
  otherwise, ``K = 5``;
* scenario 5: ``N(0, 1)`` on odd segments, ``t_{2.5}`` rescaled to unit
  variance on even ones, ``K = 2``;
* ``custom``: caller-supplied change points and a two-component normal
  mixture alternating with a standard normal (a stand-in, not scenario 1).

Student-t draws use ``Generator.standard_t``, which divides a standard normal
by ``sqrt(chi2_df / df)`` from the same generator.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .data import Dataset

SCENARIOS = ("2", "3", "4", "5", "custom")


def default_K(scenario: str, T: int) -> int:
    scenario = str(scenario)
    if scenario == "2":
        return int(math.floor(math.sqrt(T / (2.0 * math.log(T)))))
    if scenario in ("3", "4"):
        return 5
    if scenario == "5":
        return 2
    raise ValueError(f"scenario {scenario!r} has no default K")


def evenly_spaced(T: int, K: int) -> list[int]:
    return [(j * T) // (K + 1) for j in range(1, K + 1)]


@dataclass(frozen=True)
class ScenarioSpec:
    """Parameters of one generative model.

    ``n_policy`` is ``"const"`` (every ``n_t = n_param``) or ``"poisson"``
    (``n_t ~ Poisson(n_param)`` clamped below at 1).
    """

    scenario: str = "3"
    T: int = 1000
    K: int | None = None
    change_points: tuple[int, ...] | None = None
    n_policy: str = "const"
    n_param: float = 1
    seed: int | None = None
    mixture: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "scenario", str(self.scenario))
        if self.scenario == "1":
            raise ValueError("scenario 1 is not supported: its densities are only given as figures")
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}; choose from {SCENARIOS}")
        if self.T < 2:
            raise ValueError(f"T must be >= 2, got {self.T}")
        if self.n_policy not in ("const", "poisson"):
            raise ValueError(f"n_policy must be 'const' or 'poisson', got {self.n_policy!r}")
        if self.n_param <= 0 or (self.n_policy == "const" and int(self.n_param) != self.n_param):
            raise ValueError(f"invalid n_param {self.n_param!r} for {self.n_policy} policy")
        if self.change_points is not None:
            cps = tuple(int(c) for c in self.change_points)
            if any(b <= a for a, b in zip(cps, cps[1:])) or (cps and not 0 < cps[0] <= cps[-1] < self.T):
                raise ValueError(f"change points must increase strictly inside (0, T): {cps}")
            object.__setattr__(self, "change_points", cps)
        elif self.scenario == "custom" and self.K is None:
            raise ValueError("custom scenario needs K or change_points")

    @property
    def true_change_points(self) -> tuple[int, ...]:
        if self.change_points is not None:
            return self.change_points
        K = self.K if self.K is not None else default_K(self.scenario, self.T)
        return tuple(evenly_spaced(self.T, K))

    @property
    def spacing(self) -> int:
        """Minimal spacing, boundaries 0 and T included."""
        cps = (0, *self.true_change_points, self.T)
        return min(b - a for a, b in zip(cps, cps[1:]))

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["change_points"] is not None:
            d["change_points"] = list(d["change_points"])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> ScenarioSpec:
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        if known.get("change_points") is not None:
            known["change_points"] = tuple(known["change_points"])
        return cls(**known)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def segment_labels(T: int, change_points) -> np.ndarray:
    """1-based segment number ``j`` of every time ``t`` (``t in A_j``)."""
    t = np.arange(1, T + 1)
    return 1 + np.searchsorted(np.asarray(change_points, dtype=np.int64), t, side="left")


def _draw_counts(spec, rng):
    if spec.n_policy == "const":
        return np.full(spec.T, int(spec.n_param), dtype=np.int64)
    return np.maximum(rng.poisson(spec.n_param, size=spec.T), 1)


def _draw(spec, odd, size, rng):
    sc = spec.scenario
    if sc == "2":
        return (1.0 if odd else 0.0) + rng.standard_t(3, size=size) / math.sqrt(3.0)
    if sc == "3":
        return (1.0 if odd else 0.0) + rng.standard_normal(size)
    if sc == "4":
        return (0.2 if odd else 1.0) * rng.standard_normal(size)
    if sc == "5":
        if odd:
            return rng.standard_normal(size)
        return rng.standard_t(2.5, size=size) / math.sqrt(2.5 / (2.5 - 2.0))
    mix = {"weight": 0.5, "loc": 1.5, "scale": 0.5, **spec.mixture}
    if odd:
        return rng.standard_normal(size)
    comp = rng.random(size) < mix["weight"]
    sign = np.where(comp, -1.0, 1.0)
    return sign * mix["loc"] + mix["scale"] * rng.standard_normal(size)


def generate(spec: ScenarioSpec, rng=None) -> tuple[Dataset, tuple[int, ...]]:
    """Draw one dataset and return it with the true change points."""
    rng = np.random.default_rng(spec.seed if rng is None else rng)
    cps = spec.true_change_points
    counts = _draw_counts(spec, rng)
    labels = segment_labels(spec.T, cps)
    samples = [_draw(spec, labels[i] % 2 == 1, int(counts[i]), rng) for i in range(spec.T)]
    return Dataset(samples), cps
