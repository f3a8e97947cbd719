"""Strategies for coping with noisy feedback, and a comparison harness.

Three families are implemented:

* re-rating de-noising: recursively replace repeated ratings that scatter
  more than a threshold apart,
* predictor noise: attach artificial Gaussian uncertainty to predictions so
  the rating-vs-prediction comparison averages the human part out,
* deviation omission: keep only pairs whose deviation a z-test refuses to
  attribute to the pair's rating spread, and score those.

Each strategy reports a before/after score pair and the verdict of the
shifted-floor test under the untreated dataset's floor. The omission
strategy changes the metric's denominator, so its filtered score is
reported but never compared across strategies.
"""

from __future__ import annotations

import enum
import math
import statistics
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.stats import norm

from .barrier import (
    DistinguishabilityResult,
    GaussianDistribution,
    barrier_distribution,
    distinguishability_test,
)
from .errors import InputError
from .feedback import (
    FeedbackDataset,
    FeedbackKey,
    ObservationSet,
    PredictionSet,
    RatingObservation,
    SigmaFallback,
    UncertainFeedback,
    fit_uncertainty,
)
from .metrics import rmse
from .rng import child_rng, validate_seed


class Resampler(enum.Enum):
    REPLACE_WITH_MEDIAN = "median"
    REDRAW_FROM_MODEL = "redraw"


@dataclass(frozen=True, slots=True)
class DenoiseConfig:
    """Threshold-based re-rating replacement.

    A group is treated while its max pairwise distance exceeds
    ``threshold``; each pass removes the value farthest from the group
    median (ties to the lowest trial index) and replaces it per
    ``resampler``. ``seed`` feeds the redraw policy's per-group generators.
    """

    threshold: float
    max_iterations: int = 25
    resampler: Resampler = Resampler.REPLACE_WITH_MEDIAN
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.threshold > 0:
            raise InputError(f"denoise threshold must be > 0, got {self.threshold}")
        if self.max_iterations < 1:
            raise InputError(
                f"max_iterations must be >= 1, got {self.max_iterations}"
            )
        validate_seed(self.seed)


@dataclass(frozen=True, slots=True)
class DenoiseResult:
    """Denoised observations plus the groups that could not be tamed.

    A key lands in ``unconverged_keys`` when the redraw policy exhausted its
    attempts (the median fallback was used for that slot) or when the group
    still exceeds the threshold after the final pass.
    """

    observations: ObservationSet
    unconverged_keys: frozenset[FeedbackKey]


@dataclass(frozen=True, slots=True)
class OmissionConfig:
    alpha: float = 0.05

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha < 1.0):
            raise InputError(f"alpha must lie in (0, 1), got {self.alpha}")


@dataclass(frozen=True, slots=True)
class OmissionResult:
    retained_keys: frozenset[FeedbackKey]
    filtered_rmse: float | None
    retained_fraction: float


@dataclass(frozen=True, slots=True)
class StrategyReport:
    """Before/after scores of one strategy plus the floor-test verdict.

    ``retained_fraction`` is set only for the omission strategy and
    ``mean_deviation_variance`` only for predictor noise; ``verdict`` is
    None when the after-score is unavailable.
    """

    strategy: str
    score_before: float
    score_after: float | None
    retained_fraction: float | None
    verdict: DistinguishabilityResult | None
    mean_deviation_variance: float | None = None

    def to_json_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "score_before": self.score_before,
            "score_after": self.score_after,
            "retained_fraction": self.retained_fraction,
            "distinguishable": (
                self.verdict.distinguishable if self.verdict is not None else None
            ),
            "z_gap": self.verdict.z_gap if self.verdict is not None else None,
            "mean_deviation_variance": self.mean_deviation_variance,
        }


def _spread(values: list[float]) -> float:
    return max(values) - min(values)


def _farthest_index(values: list[float]) -> tuple[int, float]:
    """Index of the value farthest from the group median (ties: first)."""
    med = statistics.median(values)
    best_i, best_d = 0, -1.0
    for i, v in enumerate(values):
        d = abs(v - med)
        if d > best_d:
            best_i, best_d = i, d
    return best_i, med


def denoise_preprocess(
    obs: ObservationSet,
    truth: FeedbackDataset | None,
    cfg: DenoiseConfig,
) -> DenoiseResult:
    """Recursively replace repeated ratings that scatter beyond a threshold.

    Group sizes, keys and trial indices never change, only values. The
    redraw policy resamples the removed slot from the pair's generating
    model N(mu, sigma^2) until the draw sits within ``cfg.threshold`` of
    every retained value; when its attempts run out the slot falls back to
    the median and the group is flagged.
    """
    if cfg.resampler is Resampler.REDRAW_FROM_MODEL and truth is None:
        raise InputError("redraw-from-model resampling needs the generating model")
    model = truth.by_key() if truth is not None else {}

    new_observations: list[RatingObservation] = []
    unconverged: set[FeedbackKey] = set()

    for group_index, (key, group) in enumerate(obs.grouped().items()):
        values = [o.value for o in group]
        rng = None
        if cfg.resampler is Resampler.REDRAW_FROM_MODEL:
            if key not in model:
                raise InputError(
                    f"no generating model for {key.user_id}/{key.item_id}"
                )
            rng = child_rng(cfg.seed, group_index)

        converged = False
        for _ in range(cfg.max_iterations):
            if _spread(values) <= cfg.threshold:
                converged = True
                break
            idx, med = _farthest_index(values)
            if cfg.resampler is Resampler.REPLACE_WITH_MEDIAN:
                values[idx] = med
            else:
                entry = model[key]
                retained = values[:idx] + values[idx + 1 :]
                replacement = None
                for _ in range(cfg.max_iterations):
                    draw = float(rng.normal(entry.mu, entry.sigma))
                    if all(abs(draw - r) <= cfg.threshold for r in retained):
                        replacement = draw
                        break
                if replacement is None:
                    unconverged.add(key)
                    replacement = med
                values[idx] = replacement
        if not converged and _spread(values) > cfg.threshold:
            unconverged.add(key)

        new_observations.extend(
            RatingObservation(key=o.key, trial=o.trial, value=v)
            for o, v in zip(group, values)
        )

    return DenoiseResult(
        observations=ObservationSet(
            scale=obs.scale, observations=tuple(new_observations)
        ),
        unconverged_keys=frozenset(unconverged),
    )


def predictor_noise_deviation(
    fb: UncertainFeedback, prediction: float, tau: float
) -> GaussianDistribution:
    """Law of the rating-minus-prediction deviation with prediction noise.

    A rating N(mu, sigma^2) compared against an independent noisy
    prediction N(pi, tau^2) deviates as N(mu - pi, sigma^2 + tau^2).
    """
    if not math.isfinite(prediction):
        raise InputError(f"prediction must be finite, got {prediction}")
    if not (math.isfinite(tau) and tau >= 0):
        raise InputError(f"tau must be finite and >= 0, got {tau}")
    return GaussianDistribution(
        mean=fb.mu - prediction, variance=fb.sigma**2 + tau**2
    )


def omit_insignificant(
    data: FeedbackDataset,
    predictions: PredictionSet,
    point_ratings: Mapping[FeedbackKey, float],
    cfg: OmissionConfig = OmissionConfig(),
) -> OmissionResult:
    """Keep only deviations the pair's spread cannot explain.

    Per pair, d = rating - prediction is z-tested two-sided against
    N(0, sigma^2); pairs with p < alpha are retained and scored. Pairs with
    sigma = 0 are retained for any nonzero deviation (p = 0). With nothing
    retained the filtered score is None, never 0.
    """
    if not point_ratings:
        raise InputError("no point ratings to test")
    by_key = data.by_key()
    keys = sorted(point_ratings)
    d = np.empty(len(keys), dtype=float)
    sigma = np.empty(len(keys), dtype=float)
    for i, key in enumerate(keys):
        entry = by_key.get(key)
        if entry is None:
            raise InputError(f"no feedback entry for {key.user_id}/{key.item_id}")
        d[i] = point_ratings[key] - predictions[key]
        sigma[i] = entry.sigma

    p = np.ones(len(keys), dtype=float)
    positive = sigma > 0
    p[positive] = 2.0 * norm.sf(np.abs(d[positive]) / sigma[positive])
    p[~positive] = np.where(d[~positive] != 0.0, 0.0, 1.0)

    retained = p < cfg.alpha
    if retained.any():
        filtered = float(np.sqrt(np.mean(d[retained] ** 2)))
    else:
        filtered = None
    return OmissionResult(
        retained_keys=frozenset(k for k, keep in zip(keys, retained) if keep),
        filtered_rmse=filtered,
        retained_fraction=float(np.mean(retained)),
    )


def _expected_rmse(d: np.ndarray, sigma: np.ndarray, tau: float) -> float:
    # sqrt of the expected squared metric; exact for the Gaussian deviation law
    return float(np.sqrt(np.mean(d * d + sigma * sigma) + tau * tau))


def run_strategy_comparison(
    predictions: PredictionSet,
    *,
    observations: ObservationSet | None = None,
    data: FeedbackDataset | None = None,
    truth: FeedbackDataset | None = None,
    denoise: DenoiseConfig | None = None,
    predictor_tau: float | None = None,
    omission: OmissionConfig | None = None,
    fallback: SigmaFallback = SigmaFallback.pooled(),
) -> list[StrategyReport]:
    """Run the requested strategies and score each against the floor test.

    ``data`` defaults to a fit of ``observations``; the de-noising strategy
    additionally needs the raw observations. Before-scores are point RMSE
    over the dataset's central tendencies, except for predictor noise where
    before/after are the expected metric at tau = 0 and tau, so that the
    tau = 0 limit is an exact identity.
    """
    if denoise is None and predictor_tau is None and omission is None:
        raise InputError("no strategy requested")
    if data is None:
        if observations is None:
            raise InputError("need observations or a fitted dataset")
        data = fit_uncertainty(observations, fallback)

    floor = barrier_distribution(data)
    point_ratings = {e.key: e.mu for e in data.entries}
    score_point = rmse(predictions, point_ratings)

    reports: list[StrategyReport] = []

    if denoise is not None:
        if observations is None:
            raise InputError("de-noising needs raw repeated-trial observations")
        result = denoise_preprocess(observations, truth, denoise)
        refit = fit_uncertainty(result.observations, fallback)
        score_after = rmse(predictions, {e.key: e.mu for e in refit.entries})
        reports.append(
            StrategyReport(
                strategy="denoise",
                score_before=score_point,
                score_after=score_after,
                retained_fraction=None,
                verdict=distinguishability_test(score_point, score_after, floor),
            )
        )

    if predictor_tau is not None:
        if not (math.isfinite(predictor_tau) and predictor_tau >= 0):
            raise InputError(f"tau must be finite and >= 0, got {predictor_tau}")
        entries = data.sorted_entries()
        d = np.asarray([e.mu - predictions[e.key] for e in entries], dtype=float)
        sigma = np.asarray([e.sigma for e in entries], dtype=float)
        before = _expected_rmse(d, sigma, 0.0)
        after = _expected_rmse(d, sigma, predictor_tau)
        reports.append(
            StrategyReport(
                strategy="predictor_noise",
                score_before=before,
                score_after=after,
                retained_fraction=None,
                verdict=distinguishability_test(before, after, floor),
                mean_deviation_variance=float(
                    np.mean(sigma * sigma) + predictor_tau**2
                ),
            )
        )

    if omission is not None:
        result = omit_insignificant(data, predictions, point_ratings, omission)
        verdict = (
            distinguishability_test(score_point, result.filtered_rmse, floor)
            if result.filtered_rmse is not None
            else None
        )
        reports.append(
            StrategyReport(
                strategy="omission",
                score_before=score_point,
                score_after=result.filtered_rmse,
                retained_fraction=result.retained_fraction,
                verdict=verdict,
            )
        )

    return reports
