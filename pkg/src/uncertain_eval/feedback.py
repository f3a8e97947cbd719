"""Probabilistic model of user feedback.

Repeated responses of one user to one item scatter around a central
tendency. We model the response for each (user, item) pair as a Gaussian
with mean ``mu`` and standard deviation ``sigma``; ``sigma`` is the pair's
intrinsic rating spread and the quantity every downstream computation
consumes. This module holds the domain types and the estimator that fits
(mu, sigma) from repeated-trial observations.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np

from .errors import InputError, UnavailableError


@dataclass(frozen=True, slots=True)
class RatingScale:
    """Bounded rating axis; ``discrete_step`` absent means continuous."""

    min_value: float
    max_value: float
    discrete_step: float | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.min_value) and math.isfinite(self.max_value)):
            raise InputError("rating scale bounds must be finite")
        if not self.min_value < self.max_value:
            raise InputError(
                f"rating scale needs min_value < max_value, got "
                f"[{self.min_value}, {self.max_value}]"
            )
        if self.discrete_step is not None:
            if not (math.isfinite(self.discrete_step) and self.discrete_step > 0):
                raise InputError("discrete_step must be positive")
            steps = (self.max_value - self.min_value) / self.discrete_step
            if abs(steps - round(steps)) > 1e-9:
                raise InputError(
                    "scale span must be an integer multiple of discrete_step"
                )

    @property
    def span(self) -> float:
        return self.max_value - self.min_value

    def contains(self, value: float) -> bool:
        return self.min_value <= value <= self.max_value


@dataclass(frozen=True, order=True, slots=True)
class FeedbackKey:
    """Identity of one (user, item) pair."""

    user_id: str
    item_id: str


@dataclass(frozen=True, slots=True)
class RatingObservation:
    """One trial of a repeated feedback task."""

    key: FeedbackKey
    trial: int
    value: float

    def __post_init__(self) -> None:
        if self.trial < 0:
            raise InputError(f"trial index must be non-negative, got {self.trial}")
        if not math.isfinite(self.value):
            raise InputError(f"rating value must be finite, got {self.value}")


@dataclass(frozen=True, slots=True)
class ObservationSet:
    """Raw repeated-trial ratings plus the scale they were collected on.

    The scale records the nominal instrument range. Continuous synthetic
    draws are intentionally not clamped to it (clamping is opt-in at
    simulation time), so values slightly outside the range are legal here.
    """

    scale: RatingScale
    observations: tuple[RatingObservation, ...]

    def __post_init__(self) -> None:
        seen: set[tuple[FeedbackKey, int]] = set()
        for obs in self.observations:
            slot = (obs.key, obs.trial)
            if slot in seen:
                raise InputError(
                    f"duplicate observation for {obs.key.user_id}/{obs.key.item_id} "
                    f"trial {obs.trial}"
                )
            seen.add(slot)

    def __len__(self) -> int:
        return len(self.observations)

    def grouped(self) -> dict[FeedbackKey, tuple[RatingObservation, ...]]:
        """Observations per pair, keys and trials in canonical order."""
        buckets: dict[FeedbackKey, list[RatingObservation]] = {}
        for obs in self.observations:
            buckets.setdefault(obs.key, []).append(obs)
        return {
            key: tuple(sorted(buckets[key], key=lambda o: o.trial))
            for key in sorted(buckets)
        }

    def values_for(self, key: FeedbackKey) -> np.ndarray:
        values = [o.value for o in self.observations if o.key == key]
        return np.asarray(values, dtype=float)


@dataclass(frozen=True, slots=True)
class UncertainFeedback:
    """Gaussian response model of one pair: value ~ N(mu, sigma^2).

    ``n_trials`` records how many trials the parameters were fitted from;
    it is None for externally supplied parameters (e.g. loaded from CSV,
    which does not persist trial counts).
    """

    key: FeedbackKey
    mu: float
    sigma: float
    n_trials: int | None = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.mu):
            raise InputError(f"mu must be finite, got {self.mu}")
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise InputError(f"sigma must be finite and >= 0, got {self.sigma}")


@dataclass(frozen=True, slots=True)
class FeedbackDataset:
    """Collection of per-pair response models with unique keys."""

    scale: RatingScale
    entries: tuple[UncertainFeedback, ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise InputError("feedback dataset must contain at least one entry")
        keys = {e.key for e in self.entries}
        if len(keys) != len(self.entries):
            raise InputError("feedback dataset keys must be unique")

    @property
    def N(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[UncertainFeedback]:
        return iter(self.entries)

    def sorted_entries(self) -> tuple[UncertainFeedback, ...]:
        return tuple(sorted(self.entries, key=lambda e: e.key))

    def by_key(self) -> dict[FeedbackKey, UncertainFeedback]:
        return {e.key: e for e in self.entries}

    def sigmas(self) -> np.ndarray:
        return np.asarray([e.sigma for e in self.entries], dtype=float)

    def mus(self) -> np.ndarray:
        return np.asarray([e.mu for e in self.entries], dtype=float)


@dataclass(frozen=True, slots=True)
class PredictionSet:
    """Model-based prediction per pair."""

    entries: Mapping[FeedbackKey, float]

    def __post_init__(self) -> None:
        for key, value in self.entries.items():
            if not math.isfinite(value):
                raise InputError(
                    f"prediction for {key.user_id}/{key.item_id} must be finite"
                )

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, key: FeedbackKey) -> bool:
        return key in self.entries

    def __getitem__(self, key: FeedbackKey) -> float:
        try:
            return self.entries[key]
        except KeyError:
            raise InputError(
                f"missing prediction for {key.user_id}/{key.item_id}"
            ) from None


class SigmaFallbackPolicy(enum.Enum):
    ZERO = "zero"
    POOLED = "pooled"
    FIXED = "fixed"


@dataclass(frozen=True, slots=True)
class SigmaFallback:
    """Spread assigned to pairs with a single trial.

    ``zero`` claims certainty, ``pooled`` borrows the pooled spread of the
    multi-trial pairs (the default), ``fixed`` uses a constant.
    """

    policy: SigmaFallbackPolicy = SigmaFallbackPolicy.POOLED
    value: float | None = None

    def __post_init__(self) -> None:
        if self.policy is SigmaFallbackPolicy.FIXED:
            if self.value is None or not (
                math.isfinite(self.value) and self.value >= 0
            ):
                raise InputError("fixed sigma fallback needs a value >= 0")
        elif self.value is not None:
            raise InputError(f"fallback policy {self.policy.value!r} takes no value")

    @classmethod
    def zero(cls) -> "SigmaFallback":
        return cls(SigmaFallbackPolicy.ZERO)

    @classmethod
    def pooled(cls) -> "SigmaFallback":
        return cls(SigmaFallbackPolicy.POOLED)

    @classmethod
    def fixed(cls, value: float) -> "SigmaFallback":
        return cls(SigmaFallbackPolicy.FIXED, value)

    @classmethod
    def parse(cls, text: str) -> "SigmaFallback":
        """Parse ``zero`` | ``pooled`` | ``fixed:V`` (CLI flag syntax)."""
        if text == "zero":
            return cls.zero()
        if text == "pooled":
            return cls.pooled()
        if text.startswith("fixed:"):
            try:
                return cls.fixed(float(text.split(":", 1)[1]))
            except ValueError as exc:
                raise InputError(f"bad fixed fallback value in {text!r}") from exc
        raise InputError(
            f"unknown sigma fallback {text!r}; expected zero, pooled or fixed:V"
        )


def fit_uncertainty(
    obs: ObservationSet, fallback: SigmaFallback = SigmaFallback.pooled()
) -> FeedbackDataset:
    """Estimate (mu, sigma) per pair from repeated trials.

    mu is the sample mean and sigma the sample standard deviation with the
    n-1 correction. Pairs observed only once receive sigma from ``fallback``;
    the pooled policy fails when the data contains no multi-trial pair to
    pool from.
    """
    if not obs.observations:
        raise InputError("cannot fit an empty observation set")

    groups = obs.grouped()
    stats: list[tuple[FeedbackKey, float, float | None, int]] = []
    multi_sigma_sq: list[float] = []
    for key, group in groups.items():
        values = np.asarray([o.value for o in group], dtype=float)
        mu = float(np.mean(values))
        if len(values) >= 2:
            sigma = float(np.std(values, ddof=1))
            multi_sigma_sq.append(sigma * sigma)
            stats.append((key, mu, sigma, len(values)))
        else:
            stats.append((key, mu, None, 1))

    fallback_sigma: float | None = None
    if any(sigma is None for _, _, sigma, _ in stats):
        if fallback.policy is SigmaFallbackPolicy.ZERO:
            fallback_sigma = 0.0
        elif fallback.policy is SigmaFallbackPolicy.FIXED:
            fallback_sigma = float(fallback.value)  # type: ignore[arg-type]
        else:
            if not multi_sigma_sq:
                raise UnavailableError(
                    "pooled sigma fallback needs at least one pair with >= 2 trials"
                )
            fallback_sigma = math.sqrt(float(np.mean(multi_sigma_sq)))

    entries = tuple(
        UncertainFeedback(
            key=key,
            mu=mu,
            sigma=sigma if sigma is not None else fallback_sigma,  # type: ignore[arg-type]
            n_trials=n,
        )
        for key, mu, sigma, n in stats
    )
    return FeedbackDataset(scale=obs.scale, entries=entries)


def pooled_sigma(data: FeedbackDataset) -> float:
    """Root mean square of sigma over entries fitted from >= 2 trials."""
    pooled = [e.sigma * e.sigma for e in data.entries if (e.n_trials or 0) >= 2]
    if not pooled:
        raise UnavailableError(
            "pooled sigma is unavailable: no entries fitted from >= 2 trials"
        )
    return math.sqrt(float(np.mean(pooled)))
