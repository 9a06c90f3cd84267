"""pass@k, eff@k, and the speedup baseline.

eff@k is the expected maximum efficiency score among k independently
generated samples. Given n >= k scored samples it is estimated exactly by
averaging the subset maximum over all C(n, k) size-k subsets, which
collapses to a fixed linear combination of order statistics:

    eff@k = sum_{r=k}^{n} lambda_r * e_(r),   lambda_r = C(r-1, k-1) / C(n, k)

The coefficients are computed by a downward product recurrence so no
binomial coefficient is ever materialized; this stays stable up to
n = 10^4 and beyond (naive 64-bit binomials overflow near n = 62).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Sequence

from .timing import CensoredTime

BRUTEFORCE_MAX_N = 20


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class CoefficientVector:
    """Order-statistic weights lambda_r for r = k..n (lam[0] is lambda_k)."""

    k: int
    n: int
    lam: tuple[float, ...]


@dataclass(frozen=True)
class ProblemSamples:
    """Scored samples of one problem: efficiency scores plus correctness count."""

    scores: tuple[float, ...]
    num_correct: int

    @property
    def n(self) -> int:
        return len(self.scores)


@dataclass(frozen=True)
class MetricReport:
    """Per-problem and aggregate metrics for the requested k values.

    speedup@1 is reported for comparison only: it overestimates efficiency
    under censoring (a killed run contributes t*/T instead of 0).
    """

    per_problem: dict[str, dict[str, float]]
    aggregate: dict[str, float]
    n_samples: dict[str, int]


def _check_scores(scores: Sequence[float]) -> None:
    if not scores:
        raise MetricError("empty score list")
    for s in scores:
        if not math.isfinite(s) or s < 0:
            raise MetricError(f"scores must be finite and >= 0, got {s!r}")


def eff_coefficients(n: int, k: int) -> CoefficientVector:
    """Weights lambda_r = C(r-1, k-1) / C(n, k) via the stable recurrence.

    lambda_n = k/n and lambda_r = lambda_{r+1} * (1 - (k-1)/r) going down
    to r = k. The weights are non-negative, non-decreasing in r, and sum
    to 1.
    """
    if k < 1 or k > n:
        raise MetricError(f"need 1 <= k <= n, got k={k}, n={n}")
    lam = [0.0] * (n - k + 1)
    lam[-1] = k / n
    for r in range(n - 1, k - 1, -1):
        lam[r - k] = lam[r - k + 1] * (1.0 - (k - 1) / r)
    return CoefficientVector(k=k, n=n, lam=tuple(lam))


def eff_at_k(scores: Sequence[float], k: int) -> float:
    """Exact average of the subset maximum over all size-k subsets.

    Equals the mean for k = 1 and the maximum for k = n. Depends only on
    the multiset of scores. k > n is an error, never clamped.
    """
    _check_scores(scores)
    n = len(scores)
    if k < 1 or k > n:
        raise MetricError(f"need 1 <= k <= n, got k={k}, n={n}")
    order = sorted(scores)
    lam = eff_coefficients(n, k).lam
    # fsum: exactly rounded accumulation; n can reach 10^4
    return math.fsum(l * e for l, e in zip(lam, order[k - 1 :]))


def eff_at_k_bruteforce(scores: Sequence[float], k: int) -> float:
    """Oracle: enumerate all C(n, k) subsets and average their maxima."""
    _check_scores(scores)
    n = len(scores)
    if n > BRUTEFORCE_MAX_N:
        raise MetricError(f"bruteforce limited to n <= {BRUTEFORCE_MAX_N}, got {n}")
    if k < 1 or k > n:
        raise MetricError(f"need 1 <= k <= n, got k={k}, n={n}")
    total = math.fsum(max(sub) for sub in combinations(scores, k))
    return total / math.comb(n, k)


def pass_at_k(n: int, c: int, k: int) -> float:
    """1 - C(n-c, k) / C(n, k), the chance a size-k subset holds a correct sample.

    Computed with the same product recurrence as the eff@k coefficients
    (no factorials).
    """
    if not 0 <= c <= n:
        raise MetricError(f"need 0 <= c <= n, got c={c}, n={n}")
    if k < 1 or k > n:
        raise MetricError(f"need 1 <= k <= n, got k={k}, n={n}")
    if n - c < k:
        return 1.0
    prod = 1.0
    for i in range(k):
        prod *= (n - c - i) / (n - i)
    return 1.0 - prod


def speedup_at_1(
    case_times: Sequence[Sequence[CensoredTime]],
    reference_times: Sequence[Sequence[float]],
    time_limit: float,
    hardness: Sequence[float],
) -> float:
    """Classic speedup baseline: t* / min(t, T) per case, level-averaged.

    Diagnostics only — overestimates efficiency under censoring, since a
    run killed at T contributes t*/T rather than 0.
    """
    if not (len(case_times) == len(reference_times) == len(hardness)):
        raise MetricError(
            f"shape mismatch: {len(case_times)} levels of timings, "
            f"{len(reference_times)} of references, {len(hardness)} weights"
        )
    level_means = []
    for times, refs in zip(case_times, reference_times):
        if len(times) != len(refs):
            raise MetricError("per-level case count mismatch")
        ratios = [ref / min(t.value, time_limit) for t, ref in zip(times, refs)]
        level_means.append(sum(ratios) / len(ratios))
    total_h = sum(hardness)
    return sum(h * m for h, m in zip(hardness, level_means)) / total_h


def aggregate_report(
    per_problem: Mapping[str, ProblemSamples],
    ks: Sequence[int],
    speedups: Mapping[str, float] | None = None,
) -> MetricReport:
    """Per-problem eff@k / pass@k for each k, plus the unweighted mean.

    Every problem must have n >= max(ks); an undersampled problem is an
    error, never silently dropped.
    """
    if not per_problem:
        raise MetricError("no problems to aggregate")
    if not ks:
        raise MetricError("no k values requested")
    for pid, samples in per_problem.items():
        if samples.n < max(ks):
            raise MetricError(
                f"insufficient samples for problem {pid!r}: "
                f"n={samples.n} < k={max(ks)}"
            )
    report: dict[str, dict[str, float]] = {}
    for pid in sorted(per_problem):
        samples = per_problem[pid]
        row: dict[str, float] = {}
        for k in ks:
            row[f"eff@{k}"] = eff_at_k(samples.scores, k)
            row[f"pass@{k}"] = pass_at_k(samples.n, samples.num_correct, k)
        if speedups is not None and pid in speedups:
            row["speedup@1"] = speedups[pid]
        report[pid] = row
    keys = {key for row in report.values() for key in row}
    aggregate = {
        key: sum(row[key] for row in report.values() if key in row)
        / sum(1 for row in report.values() if key in row)
        for key in sorted(keys)
    }
    n_samples = {pid: per_problem[pid].n for pid in report}
    return MetricReport(per_problem=report, aggregate=aggregate, n_samples=n_samples)
