"""Robust execution-time estimation and time-limit handling.

Execution times are wall-clock seconds. A measurement killed at the
enforced limit is *right-censored*: the true duration is only known to be
at least the recorded value, so censored entries are carried as-is and
never rescaled or averaged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from statistics import median
from typing import Sequence


class TimingError(ValueError):
    pass


@dataclass(frozen=True)
class CensoredTime:
    """A wall-clock duration with a right-censoring flag.

    If ``censored`` is true the run was killed, and ``value`` is the
    enforced limit at kill time (the true duration is >= value).
    """

    value: float
    censored: bool = False

    def __post_init__(self):
        if self.value < 0:
            raise TimingError(f"negative duration: {self.value}")


@dataclass(frozen=True)
class HarnessConfig:
    """Evaluation hyperparameters.

    timeout_factor scales the slowest reference time into the time limit;
    repeats is the number of timed runs per test case; hardness_weights
    weigh levels 1..L in the sample score; hard_kill_margin pads the
    harness-level kill budget beyond the sum of soft limits.
    """

    timeout_factor: float = 2.0
    repeats: int = 6
    hardness_weights: tuple[float, ...] = (3.0, 3.0, 4.0)
    hard_kill_margin: float = 10.0
    reference_ceiling: float = 10.0
    memory_limit_bytes: int = 4 * 1024**3

    def __post_init__(self):
        if self.timeout_factor <= 1:
            raise TimingError(f"timeout_factor must be > 1, got {self.timeout_factor}")
        if self.repeats < 1:
            raise TimingError(f"repeats must be >= 1, got {self.repeats}")
        if any(h <= 0 for h in self.hardness_weights):
            raise TimingError("hardness weights must be positive")
        if self.hard_kill_margin <= 0:
            raise TimingError("hard_kill_margin must be positive")


def hodges_lehmann(samples: Sequence[float]) -> float:
    """Median of all Walsh averages (s_a + s_b) / 2 over index pairs a <= b.

    Robust location estimate for repeated timings: a single outlier moves
    the estimate by a bounded amount (breakdown point ~0.29), unlike the
    mean. The result always lies within [min(samples), max(samples)].
    """
    if not samples:
        raise TimingError("hodges_lehmann needs at least one sample")
    walsh = [
        (samples[a] + samples[b]) / 2.0
        for a in range(len(samples))
        for b in range(a, len(samples))
    ]
    return median(walsh)


def compute_time_limit(reference_times: Sequence[float], timeout_factor: float) -> float:
    """Time limit = timeout_factor * slowest reference time.

    With timeout_factor > 1 the limit strictly exceeds every reference
    time, which the scoring denominator relies on.
    """
    if timeout_factor <= 1:
        raise TimingError(f"timeout_factor must be > 1, got {timeout_factor}")
    if not reference_times:
        raise TimingError("no reference times")
    worst = max(reference_times)
    if min(reference_times) <= 0:
        raise TimingError("non-positive reference time: manifest is not calibrated")
    return timeout_factor * worst


def apply_calibration(
    measurements: Sequence[CensoredTime],
    stored_reference: float,
    fresh_reference: float,
) -> list[CensoredTime]:
    """Rescale measured times by stored_reference / fresh_reference.

    Compensates for the evaluation machine running faster or slower than
    the machine that produced the stored reference timings. Censored
    entries pass through unchanged: a kill at the limit stays a kill
    regardless of machine speed.
    """
    if stored_reference <= 0 or fresh_reference <= 0:
        raise TimingError("calibration references must be positive")
    ratio = stored_reference / fresh_reference
    return [
        m if m.censored else CensoredTime(m.value * ratio, censored=False)
        for m in measurements
    ]
