"""Code-efficiency evaluation harness with censoring-aware eff@k metrics."""

from .metrics import (
    eff_at_k,
    eff_at_k_bruteforce,
    eff_coefficients,
    pass_at_k,
    speedup_at_1,
)
from .scoring import level_score, sample_score
from .timing import CensoredTime, HarnessConfig, compute_time_limit, hodges_lehmann

__all__ = [
    "CensoredTime",
    "HarnessConfig",
    "compute_time_limit",
    "eff_at_k",
    "eff_at_k_bruteforce",
    "eff_coefficients",
    "hodges_lehmann",
    "level_score",
    "pass_at_k",
    "sample_score",
    "speedup_at_1",
]

__version__ = "0.1.0"
