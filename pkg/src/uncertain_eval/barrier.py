"""Noise floor of accuracy metrics and score-distinguishability tests.

Per-pair rating spread puts a non-vanishing floor under accuracy metrics:
even a perfect predictor scores worse than zero RMSE because the ratings it
is judged against are themselves random. For a dataset of N pairs with
spreads sigma_i the floor is approximately Gaussian with

    mean     = sqrt(sum(sigma_i^2) / N)
    variance = sum(sigma_i^4) / (2 * N * sum(sigma_i^2))

Two instruments compare metric scores under this uncertainty:

* ``distinguishability_test`` recentres the floor distribution at the
  midpoint of two observed scores and asks whether both fall inside its 95%
  interval. If they do, a single metric distribution explains both outcomes
  and the difference is not significant.
* ``relation_test`` treats the two scores as independent Gaussian random
  variables and accepts "first below second" only when the opposite
  ordering has probability below 5%.

The instruments differ in stringency: with equal variances the
distinguishability threshold on |s1 - s2| is 2 * 1.959964 * std, while the
relation test flips at 1.644854 * sqrt(2) * std, a factor of about 1.68
lower. Every distinguishable pair therefore also satisfies the relation
test in the ordered direction, but not vice versa.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import InputError
from .feedback import FeedbackDataset

# Exact two-sided 95% normal quantile (1.959964 to six decimals, not 1.96).
Z_TWO_SIDED_95 = float(norm.ppf(0.975))

RELATION_ALPHA = 0.05


@dataclass(frozen=True, slots=True)
class GaussianDistribution:
    mean: float
    variance: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.mean):
            raise InputError(f"mean must be finite, got {self.mean}")
        if not (math.isfinite(self.variance) and self.variance >= 0):
            raise InputError(f"variance must be finite and >= 0, got {self.variance}")

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)


@dataclass(frozen=True, slots=True)
class BarrierDistribution:
    """Gaussian noise floor of an RMSE score over metric-score space.

    ``source_sigma_sums`` retains (sum sigma^2, sum sigma^4) for audit.
    """

    gaussian: GaussianDistribution
    N: int
    source_sigma_sums: tuple[float, float]


@dataclass(frozen=True, slots=True)
class DistinguishabilityResult:
    """Outcome of the shifted-floor test for a pair of scores.

    ``z_gap`` is |s1 - s2| / (2 * std); the verdict is distinguishable
    exactly when z_gap exceeds the two-sided 95% quantile.
    """

    s1: float
    s2: float
    shift_mean: float
    ci_low: float
    ci_high: float
    distinguishable: bool
    z_gap: float


@dataclass(frozen=True, slots=True)
class RelationResult:
    p_opposite: float
    holds: bool


def barrier_distribution(data: FeedbackDataset) -> BarrierDistribution:
    """Noise floor of RMSE for the dataset's per-pair spreads.

    All-zero spreads yield the degenerate Gaussian (0, 0), which downstream
    tests treat as classical point comparison.
    """
    sigmas = data.sigmas()
    n = data.N
    sum_sq = float(np.sum(sigmas**2))
    sum_quad = float(np.sum(sigmas**4))
    mean = math.sqrt(sum_sq / n)
    variance = (sum_quad / sum_sq) / (2.0 * n) if sum_sq > 0 else 0.0
    return BarrierDistribution(
        gaussian=GaussianDistribution(mean=mean, variance=variance),
        N=n,
        source_sigma_sums=(sum_sq, sum_quad),
    )


def confidence_interval(
    g: GaussianDistribution, level: float = 0.95
) -> tuple[float, float]:
    """Two-sided interval ``mean +- z * std`` at the given coverage level."""
    if not (0.0 < level < 1.0):
        raise InputError(f"confidence level must lie in (0, 1), got {level}")
    z = float(norm.ppf(0.5 + level / 2.0))
    margin = z * g.std
    return (g.mean - margin, g.mean + margin)


def distinguishability_test(
    s1: float, s2: float, barrier: BarrierDistribution
) -> DistinguishabilityResult:
    """Shift the noise floor to the score midpoint and test 95% coverage.

    The verdict is computed from the single closed form
    |s1 - s2| > 2 * z * std; the reported interval bounds are derived from
    the same shift and std, so verdict and coverage cannot disagree at
    boundaries. A degenerate floor (std = 0) distinguishes any two unequal
    scores, with an infinite z_gap.
    """
    if not (math.isfinite(s1) and math.isfinite(s2)):
        raise InputError(f"scores must be finite, got s1={s1}, s2={s2}")
    std = barrier.gaussian.std
    shift = 0.5 * (s1 + s2)
    gap = abs(s1 - s2)
    if std == 0.0:
        z_gap = 0.0 if gap == 0.0 else math.inf
    else:
        z_gap = gap / (2.0 * std)
    distinguishable = z_gap > Z_TWO_SIDED_95
    margin = Z_TWO_SIDED_95 * std
    return DistinguishabilityResult(
        s1=s1,
        s2=s2,
        shift_mean=shift,
        ci_low=shift - margin,
        ci_high=shift + margin,
        distinguishable=distinguishable,
        z_gap=z_gap,
    )


def relation_test(
    S1: GaussianDistribution, S2: GaussianDistribution
) -> RelationResult:
    """Accept S1 < S2 when P(S1 >= S2) < 5% for independent Gaussians.

    Independence is assumed; no joint law of the two scores is available.
    Two point masses at the same value give p = 0.5 and a negative verdict.
    """
    variance = S1.variance + S2.variance
    diff = S1.mean - S2.mean
    if variance == 0.0:
        if diff == 0.0:
            p_opposite = 0.5
        else:
            p_opposite = 0.0 if diff < 0 else 1.0
    else:
        p_opposite = float(norm.cdf(diff / math.sqrt(variance)))
    return RelationResult(p_opposite=p_opposite, holds=p_opposite < RELATION_ALPHA)


def distinguishability_report(
    barrier: BarrierDistribution, result: DistinguishabilityResult
) -> dict:
    """JSON-ready report with a stable key order."""
    return {
        "s1": result.s1,
        "s2": result.s2,
        "barrier_mean": barrier.gaussian.mean,
        "barrier_variance": barrier.gaussian.variance,
        "shift_mean": result.shift_mean,
        "ci_low": result.ci_low,
        "ci_high": result.ci_high,
        "distinguishable": result.distinguishable,
        "z_gap": result.z_gap,
    }
