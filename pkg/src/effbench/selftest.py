"""Statistical self-test suites for the estimator stack.

Each suite returns (name, passed, detail). They are deliberately
independent of the estimator internals: the oracle suite re-derives
expected values by exhaustive subset enumeration, and the unbiasedness
and variance-reduction suites check the estimator against analytic
properties of uniform order statistics by Monte Carlo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .metrics import eff_at_k, eff_at_k_bruteforce, eff_coefficients, pass_at_k


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str


def oracle_equivalence(rng: np.random.Generator, trials: int = 1000) -> SuiteResult:
    """eff@k must match exhaustive subset enumeration for all small n, k."""
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(1, 13))
        scores = rng.uniform(0.0, 1.5, size=n).tolist()
        k = int(rng.integers(1, n + 1))
        diff = abs(eff_at_k(scores, k) - eff_at_k_bruteforce(scores, k))
        worst = max(worst, diff)
    return SuiteResult(
        "oracle_equivalence",
        worst <= 1e-10,
        f"max |estimator - bruteforce| = {worst:.3e} over {trials} trials",
    )


def coefficient_sanity() -> SuiteResult:
    """Weights: non-negative, non-decreasing, sum 1; stable at n = 10^4."""
    failures = []
    for n in (3, 10, 100, 1000, 10000):
        for k in (1, 10, 100):
            if k > n:
                continue
            lam = eff_coefficients(n, k).lam
            total = math.fsum(lam)
            if abs(total - 1.0) > 1e-9:
                failures.append(f"sum(lambda)={total!r} for n={n}, k={k}")
            if any(l < 0 or not math.isfinite(l) for l in lam):
                failures.append(f"negative/non-finite weight for n={n}, k={k}")
            if any(a > b for a, b in zip(lam, lam[1:])):
                failures.append(f"weights not monotone for n={n}, k={k}")
    return SuiteResult(
        "coefficient_sanity",
        not failures,
        "; ".join(failures) if failures else "all (n, k) grids clean",
    )


def binary_reduction(rng: np.random.Generator, trials: int = 500) -> SuiteResult:
    """On 0/1 scores the estimator must equal closed-form pass@k."""
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(1, 101))
        c = int(rng.integers(0, n + 1))
        k = int(rng.integers(1, n + 1))
        scores = [1.0] * c + [0.0] * (n - c)
        rng.shuffle(scores)
        worst = max(worst, abs(eff_at_k(scores, k) - pass_at_k(n, c, k)))
    return SuiteResult(
        "binary_reduction",
        worst <= 1e-9,
        f"max |eff@k - pass@k| = {worst:.3e} over {trials} triples",
    )


def unbiasedness(
    rng: np.random.Generator, trials: int = 20000, n: int = 20, k: int = 5
) -> SuiteResult:
    """With Uniform(0,1) scores, E[max of k] = k/(k+1) analytically.

    The Monte Carlo mean of the estimator must land within 3 standard
    errors of that value.
    """
    draws = rng.uniform(0.0, 1.0, size=(trials, n))
    estimates = np.array([eff_at_k(row.tolist(), k) for row in draws])
    target = k / (k + 1)
    mean = float(estimates.mean())
    stderr = float(estimates.std(ddof=1) / math.sqrt(trials))
    ok = abs(mean - target) <= 3 * stderr
    return SuiteResult(
        "unbiasedness",
        ok,
        f"mean={mean:.5f}, target={target:.5f}, |dev|={abs(mean - target):.5f}, "
        f"3*SE={3 * stderr:.5f}",
    )


def variance_reduction(
    rng: np.random.Generator, trials: int = 10000, n: int = 100
) -> SuiteResult:
    """Estimator variance must be <= (k/n) * Var(max of k fresh draws).

    Checked empirically for k in {1, 10} with a 5% tolerance on the
    Monte Carlo noise.
    """
    failures = []
    details = []
    for k in (1, 10):
        draws = rng.uniform(0.0, 1.0, size=(trials, n))
        est = np.array([eff_at_k(row.tolist(), k) for row in draws])
        naive = rng.uniform(0.0, 1.0, size=(trials, k)).max(axis=1)
        var_est = float(est.var(ddof=1))
        var_naive = float(naive.var(ddof=1))
        bound = (k / n) * var_naive * 1.05
        details.append(
            f"k={k}: var={var_est:.2e} vs bound {bound:.2e} "
            f"(std ratio {math.sqrt(var_est / var_naive):.3f})"
        )
        if var_est > bound:
            failures.append(f"k={k}")
    return SuiteResult(
        "variance_reduction",
        not failures,
        "; ".join(details) + ("; FAILED " + ",".join(failures) if failures else ""),
    )


def run_all(seed: int = 0) -> list[SuiteResult]:
    rng = np.random.default_rng(seed)
    return [
        oracle_equivalence(rng),
        coefficient_sanity(),
        binary_reduction(rng),
        unbiasedness(rng),
        variance_reduction(rng),
    ]
