"""Synthetic populations of uncertain users for desk-scale experiments.

Ground truth (per-pair mu, sigma) is known here by construction, which
enables oracle checks that are impossible on real data: drawn trials can be
re-fitted and compared against the generating parameters.

All outputs are pure functions of (spec, seed); population parameters and
trial draws use distinct child streams of the same seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import InputError
from .feedback import (
    FeedbackDataset,
    FeedbackKey,
    ObservationSet,
    PredictionSet,
    RatingObservation,
    RatingScale,
    UncertainFeedback,
    fit_uncertainty,
)
from .rng import child_rng, validate_seed

# Stream keys so population parameters and trial draws never share bits.
_POPULATION_STREAM = 0
_TRIAL_STREAM = 1


@dataclass(frozen=True, slots=True)
class PopulationSpec:
    """Parameters of a synthetic population.

    Central tendencies are uniform over the rating scale and spreads
    uniform over [sigma_lo, sigma_hi]. Predictions are derived from the
    truth as mu plus a uniform bias from [bias_lo, bias_hi] (zero by
    default, i.e. perfect predictions).
    """

    n_users: int
    n_items: int
    scale: RatingScale
    sigma_lo: float
    sigma_hi: float
    density: float = 1.0
    seed: int = 0
    bias_lo: float = 0.0
    bias_hi: float = 0.0

    def __post_init__(self) -> None:
        if self.n_users < 1:
            raise InputError(f"n_users must be >= 1, got {self.n_users}")
        if self.n_items < 1:
            raise InputError(f"n_items must be >= 1, got {self.n_items}")
        if not (
            math.isfinite(self.sigma_lo)
            and math.isfinite(self.sigma_hi)
            and 0 <= self.sigma_lo <= self.sigma_hi
        ):
            raise InputError(
                f"sigma prior needs 0 <= sigma_lo <= sigma_hi, got "
                f"[{self.sigma_lo}, {self.sigma_hi}]"
            )
        if not 0 < self.density <= 1:
            raise InputError(f"density must lie in (0, 1], got {self.density}")
        if not (
            math.isfinite(self.bias_lo)
            and math.isfinite(self.bias_hi)
            and self.bias_lo <= self.bias_hi
        ):
            raise InputError(
                f"bias prior needs bias_lo <= bias_hi, got "
                f"[{self.bias_lo}, {self.bias_hi}]"
            )
        validate_seed(self.seed)


@dataclass(frozen=True, slots=True)
class GroundTruth:
    """Generating per-pair parameters plus the derived predictions."""

    dataset: FeedbackDataset
    predictions: PredictionSet | None


@dataclass(frozen=True, slots=True)
class HistogramBin:
    bin_lo: float
    bin_hi: float
    count: int


@dataclass(frozen=True, slots=True)
class FitRoundtripResult:
    max_relative_error: float
    tolerance: float
    passed: bool


def _pair_ids(n: int, prefix: str) -> list[str]:
    width = len(str(n))
    return [f"{prefix}{i + 1:0{width}d}" for i in range(n)]


def generate_population(spec: PopulationSpec) -> GroundTruth:
    """Draw a population of ceil(density * n_users * n_items) pairs."""
    total = spec.n_users * spec.n_items
    n_pairs = math.ceil(spec.density * total)
    if n_pairs < 1:
        raise InputError("population spec yields zero pairs")

    rng = child_rng(spec.seed, _POPULATION_STREAM)
    if n_pairs == total:
        chosen = np.arange(total)
    else:
        chosen = np.sort(rng.choice(total, size=n_pairs, replace=False))
    mu = rng.uniform(spec.scale.min_value, spec.scale.max_value, n_pairs)
    sigma = rng.uniform(spec.sigma_lo, spec.sigma_hi, n_pairs)
    bias = rng.uniform(spec.bias_lo, spec.bias_hi, n_pairs)

    users = _pair_ids(spec.n_users, "u")
    items = _pair_ids(spec.n_items, "i")
    keys = [
        FeedbackKey(user_id=users[idx // spec.n_items], item_id=items[idx % spec.n_items])
        for idx in chosen
    ]
    entries = tuple(
        UncertainFeedback(key=k, mu=float(m), sigma=float(s))
        for k, m, s in zip(keys, mu, sigma)
    )
    predictions = PredictionSet(
        {k: float(m + b) for k, m, b in zip(keys, mu, bias)}
    )
    return GroundTruth(
        dataset=FeedbackDataset(scale=spec.scale, entries=entries),
        predictions=predictions,
    )


def draw_trials(
    truth: GroundTruth, k: int, discretise: bool = False, seed: int = 0
) -> ObservationSet:
    """Draw k trials per pair from each pair's N(mu, sigma^2).

    With ``discretise`` the draws are rounded to the nearest scale step and
    clamped into the scale; this biases moments near the scale edges and is
    therefore opt-in. Continuous draws are left untouched, including the
    occasional value outside the nominal range.
    """
    if k < 1:
        raise InputError(f"trials per pair must be >= 1, got {k}")
    validate_seed(seed)
    scale = truth.dataset.scale
    if discretise and scale.discrete_step is None:
        raise InputError("discretise requires a scale with a discrete_step")

    entries = truth.dataset.sorted_entries()
    rng = child_rng(seed, _TRIAL_STREAM)
    mu = np.asarray([e.mu for e in entries], dtype=float)
    sigma = np.asarray([e.sigma for e in entries], dtype=float)
    values = mu[:, None] + sigma[:, None] * rng.standard_normal((len(entries), k))
    if discretise:
        step = scale.discrete_step
        values = scale.min_value + np.round((values - scale.min_value) / step) * step
        values = np.clip(values, scale.min_value, scale.max_value)

    observations = tuple(
        RatingObservation(key=e.key, trial=t, value=float(values[i, t]))
        for i, e in enumerate(entries)
        for t in range(k)
    )
    return ObservationSet(scale=scale, observations=observations)


def histogram(values: Iterable[float], bin_width: float) -> list[HistogramBin]:
    """Contiguous fixed-width bins covering the observed range.

    Bins are [lo, lo + width) anchored at the minimum; the bin count is
    floor(span / width) + 1 so the maximum always falls inside the last
    bin, and counts sum to the number of values.
    """
    if not (math.isfinite(bin_width) and bin_width > 0):
        raise InputError(f"bin width must be positive, got {bin_width}")
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise InputError("cannot build a histogram from zero observations")
    if not np.all(np.isfinite(arr)):
        raise InputError("histogram values must be finite")

    lo = float(np.min(arr))
    hi = float(np.max(arr))
    n_bins = int(math.floor((hi - lo) / bin_width)) + 1
    idx = np.floor((arr - lo) / bin_width).astype(int)
    idx = np.clip(idx, 0, n_bins - 1)
    counts = np.bincount(idx, minlength=n_bins)
    return [
        HistogramBin(
            bin_lo=lo + i * bin_width,
            bin_hi=lo + (i + 1) * bin_width,
            count=int(counts[i]),
        )
        for i in range(n_bins)
    ]


def fit_roundtrip_check(
    spec: PopulationSpec, k: int, tolerance: float = 0.02
) -> FitRoundtripResult:
    """Generate, draw continuous trials, re-fit: worst relative sigma error.

    Only pairs with a true sigma of at least 0.1 enter the comparison; with
    nothing above that floor the error is defined as 0. Small k gives large
    errors, which are reported, not asserted.
    """
    if k < 2:
        raise InputError(f"roundtrip check needs k >= 2 trials, got {k}")
    truth = generate_population(spec)
    obs = draw_trials(truth, k=k, discretise=False, seed=spec.seed)
    fitted = fit_uncertainty(obs)

    true_by_key = truth.dataset.by_key()
    worst = 0.0
    for entry in fitted.entries:
        sigma_true = true_by_key[entry.key].sigma
        if sigma_true >= 0.1:
            worst = max(worst, abs(entry.sigma - sigma_true) / sigma_true)
    return FitRoundtripResult(
        max_relative_error=worst, tolerance=tolerance, passed=worst < tolerance
    )
