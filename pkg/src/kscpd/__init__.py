"""Offline nonparametric change point detection with the CUSUM KS statistic."""

__version__ = "0.1.0"

from .data import Dataset
from .kernel import CusumResult, cusum_ks_at, empirical_cdf, max_cusum, max_cusum_many
from .metrics import abs_k_error, extended_median, hausdorff_one_sided
from .montecarlo import Replicate, RunReport, run_monte_carlo
from .pipeline import Detection, DetectorConfig, detect
from .scenarios import ScenarioSpec, generate
from .segmentation import Interval, Segmentation, nbs, nwbs, sample_intervals
from .selection import PenaltyConfig, nwbs_auto, split_even_odd, sse_gain_test, update_merge

__all__ = [
    "CusumResult",
    "Dataset",
    "Detection",
    "DetectorConfig",
    "Interval",
    "PenaltyConfig",
    "Replicate",
    "RunReport",
    "ScenarioSpec",
    "Segmentation",
    "abs_k_error",
    "cusum_ks_at",
    "detect",
    "empirical_cdf",
    "extended_median",
    "generate",
    "hausdorff_one_sided",
    "max_cusum",
    "max_cusum_many",
    "nbs",
    "nwbs",
    "nwbs_auto",
    "run_monte_carlo",
    "sample_intervals",
    "split_even_odd",
    "sse_gain_test",
    "update_merge",
]
