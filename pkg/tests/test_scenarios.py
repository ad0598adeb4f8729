import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kscpd import ScenarioSpec, generate
from kscpd.scenarios import default_K, evenly_spaced, segment_labels


def test_scenario3_change_points():
    spec = ScenarioSpec("3", 1000)
    assert spec.true_change_points == (166, 333, 500, 666, 833)
    assert spec.spacing == 166


def test_scenario2_K():
    assert default_K("2", 1000) == 8
    assert math.floor(math.sqrt(1000 / (2 * math.log(1000)))) == 8


@pytest.mark.parametrize("sc, K", [("3", 5), ("4", 5), ("5", 2)])
def test_default_K(sc, K):
    assert len(ScenarioSpec(sc, 600).true_change_points) == K


def test_segment_labels_follow_last_index_convention():
    lab = segment_labels(10, [3, 7])
    assert lab.tolist() == [1, 1, 1, 2, 2, 2, 2, 3, 3, 3]


def test_generate_shapes_and_determinism():
    spec = ScenarioSpec("3", 200, n_policy="poisson", n_param=3, seed=5)
    d1, cps = generate(spec)
    d2, _ = generate(spec)
    assert d1 == d2 and d1.T == 200 and cps == spec.true_change_points
    assert d1.n_min >= 1


def test_const_policy():
    d, _ = generate(ScenarioSpec("2", 50, n_param=15), np.random.default_rng(0))
    assert set(d.counts.tolist()) == {15}


def test_scenario3_segment_means():
    d, cps = generate(ScenarioSpec("3", 60000, K=1), np.random.default_rng(1))
    y = d.values
    assert y[: cps[0]].mean() == pytest.approx(1.0, abs=0.02)
    assert y[cps[0] :].mean() == pytest.approx(0.0, abs=0.02)


def test_scenario4_variances():
    d, cps = generate(ScenarioSpec("4", 60000, K=1), np.random.default_rng(2))
    assert d.values[: cps[0]].var() == pytest.approx(0.04, rel=0.03)
    assert d.values[cps[0] :].var() == pytest.approx(1.0, rel=0.03)


def test_scenario5_scaled_t():
    stats = pytest.importorskip("scipy.stats")
    d, cps = generate(ScenarioSpec("5", 300000, K=1), np.random.default_rng(3))
    assert d.values[: cps[0]].var() == pytest.approx(1.0, rel=0.02)
    # t_2.5 has no fourth moment, so compare quantiles rather than the sample variance
    q = np.array([0.1, 0.25, 0.75, 0.9])
    scale = math.sqrt(2.5 / 0.5)
    expected = stats.t.ppf(q, 2.5) / scale
    assert np.quantile(d.values[cps[0] :], q) == pytest.approx(expected, abs=0.01)
    assert stats.t.var(2.5) / scale**2 == pytest.approx(1.0)


def test_scenario2_heavy_tails_scaled():
    d, cps = generate(ScenarioSpec("2", 200000, K=1), np.random.default_rng(4))
    assert np.median(d.values[: cps[0]]) == pytest.approx(1.0, abs=0.02)
    stats = pytest.importorskip("scipy.stats")
    q = np.array([0.1, 0.25, 0.75, 0.9])
    expected = stats.t.ppf(q, 3) / math.sqrt(3)
    assert np.quantile(d.values[cps[0] :], q) == pytest.approx(expected, abs=0.01)


def test_custom_scenario():
    spec = ScenarioSpec("custom", 100, change_points=(30, 60))
    d, cps = generate(spec, np.random.default_rng(0))
    assert cps == (30, 60) and d.T == 100
    with pytest.raises(ValueError):
        ScenarioSpec("custom", 100)


@pytest.mark.parametrize(
    "kw, msg",
    [
        ({"scenario": "1"}, "not supported"),
        ({"scenario": "7"}, "unknown scenario"),
        ({"T": 1}, "T must be"),
        ({"n_policy": "fixed"}, "n_policy"),
        ({"n_param": 0}, "n_param"),
        ({"n_param": 2.5}, "n_param"),
        ({"change_points": (10, 5)}, "increase"),
        ({"change_points": (0, 5)}, "increase"),
    ],
)
def test_spec_validation(kw, msg):
    with pytest.raises(ValueError, match=msg):
        ScenarioSpec(**{"T": 100, **kw})


def test_spec_round_trip():
    spec = ScenarioSpec("custom", 90, change_points=(10, 50), n_policy="poisson", n_param=2.5, seed=9,
                        mixture={"loc": 2.0})
    assert ScenarioSpec.from_dict(spec.to_dict()) == spec


@given(st.integers(2, 5000), st.integers(1, 20))
def test_even_spacing_invariants(T, K):
    cps = evenly_spaced(T, K)
    if K >= T:
        return
    assert all(0 < a < b < T for a, b in zip(cps, cps[1:])) and 0 < cps[0]
    spec = ScenarioSpec("3", T, K=K)
    assert spec.spacing >= 1
