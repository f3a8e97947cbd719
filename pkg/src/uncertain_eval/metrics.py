"""RMSE as a point score and as a Monte Carlo random variable.

Monte Carlo sampling is partitioned into fixed chunks of 1024 samples;
chunk i draws from a child generator derived from (seed, i) and chunks are
assembled in index order. Results are therefore bit-identical for a given
seed regardless of how many worker threads run the chunks. The environment
variable ``UNCERTAIN_EVAL_THREADS`` caps the worker count (0 or unset =
auto).

Sampled ratings are deliberately not clamped to the rating scale here:
the noise-floor algebra assumes unbounded Gaussians, and clamping would
bias the variance comparison. Clamping exists only in the simulation
module's discretised output.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .barrier import barrier_distribution
from .errors import InputError
from .feedback import FeedbackDataset, FeedbackKey, PredictionSet
from .rng import child_rng, validate_seed

CHUNK_SIZE = 1024

# Bound on elements per draw block, to keep per-thread memory modest.
_MAX_BLOCK_ELEMENTS = 4_000_000

MIN_SAMPLE_COUNT = 100


@dataclass(frozen=True, slots=True)
class McConfig:
    """Monte Carlo settings; ``predictor_tau`` adds Gaussian prediction noise."""

    sample_count: int
    seed: int
    predictor_tau: float | None = None

    def __post_init__(self) -> None:
        if self.sample_count < MIN_SAMPLE_COUNT:
            raise InputError(
                f"sample_count must be >= {MIN_SAMPLE_COUNT}, got {self.sample_count}"
            )
        validate_seed(self.seed)
        if self.predictor_tau is not None and not (
            math.isfinite(self.predictor_tau) and self.predictor_tau >= 0
        ):
            raise InputError(
                f"predictor_tau must be finite and >= 0, got {self.predictor_tau}"
            )


@dataclass(frozen=True)
class MetricScoreDistribution:
    """Empirical distribution of a metric score from Monte Carlo."""

    samples: np.ndarray
    mean: float
    variance: float
    sample_count: int
    seed: int

    @classmethod
    def from_samples(cls, samples: np.ndarray, seed: int) -> "MetricScoreDistribution":
        if samples.size < 2:
            raise InputError("a score distribution needs at least 2 samples")
        samples = np.asarray(samples, dtype=float)
        samples.flags.writeable = False
        return cls(
            samples=samples,
            mean=float(np.mean(samples)),
            variance=float(np.var(samples, ddof=1)),
            sample_count=int(samples.size),
            seed=seed,
        )


def resolve_thread_count() -> int:
    """Worker cap from ``UNCERTAIN_EVAL_THREADS``; 0 or unset means auto."""
    raw = os.environ.get("UNCERTAIN_EVAL_THREADS", "").strip()
    if not raw:
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise InputError(
            f"UNCERTAIN_EVAL_THREADS must be an integer, got {raw!r}"
        ) from None
    if value < 0:
        raise InputError(f"UNCERTAIN_EVAL_THREADS must be >= 0, got {value}")
    return value if value > 0 else (os.cpu_count() or 1)


def rmse(predictions: PredictionSet, ratings: Mapping[FeedbackKey, float]) -> float:
    """Root mean squared deviation between ratings and their predictions."""
    if not ratings:
        raise InputError("cannot compute RMSE over an empty rating set")
    total = 0.0
    for key in sorted(ratings):
        d = ratings[key] - predictions[key]
        total += d * d
    return math.sqrt(total / len(ratings))


def _aligned_arrays(
    data: FeedbackDataset, predictions: PredictionSet
) -> tuple[list[FeedbackKey], np.ndarray, np.ndarray, np.ndarray]:
    entries = data.sorted_entries()
    keys = [e.key for e in entries]
    mu = np.asarray([e.mu for e in entries], dtype=float)
    sigma = np.asarray([e.sigma for e in entries], dtype=float)
    pi = np.asarray([predictions[k] for k in keys], dtype=float)
    return keys, mu, sigma, pi


def _sample_chunk(
    chunk_index: int,
    n_samples: int,
    base: np.ndarray,
    sigma: np.ndarray,
    tau: float | None,
    seed: int,
) -> np.ndarray:
    rng = child_rng(seed, chunk_index)
    n_pairs = base.size
    out = np.empty(n_samples, dtype=float)
    max_rows = max(1, _MAX_BLOCK_ELEMENTS // max(n_pairs, 1))
    pos = 0
    while pos < n_samples:
        rows = min(max_rows, n_samples - pos)
        dev = base[None, :] + sigma[None, :] * rng.standard_normal((rows, n_pairs))
        if tau is not None:
            dev = dev - tau * rng.standard_normal((rows, n_pairs))
        out[pos : pos + rows] = np.sqrt(np.mean(dev * dev, axis=1))
        pos += rows
    return out


def rmse_distribution(
    data: FeedbackDataset, predictions: PredictionSet, cfg: McConfig
) -> MetricScoreDistribution:
    """Distribution of RMSE under per-pair rating spread.

    Each Monte Carlo sample draws one rating per pair from N(mu, sigma^2)
    (and, with ``predictor_tau`` set, one prediction per pair from
    N(pi, tau^2)), then scores the rating-minus-prediction deviations.
    """
    _, mu, sigma, pi = _aligned_arrays(data, predictions)
    base = mu - pi

    n_chunks = -(-cfg.sample_count // CHUNK_SIZE)
    sizes = [
        min(CHUNK_SIZE, cfg.sample_count - i * CHUNK_SIZE) for i in range(n_chunks)
    ]

    def run(i: int) -> np.ndarray:
        return _sample_chunk(i, sizes[i], base, sigma, cfg.predictor_tau, cfg.seed)

    workers = min(resolve_thread_count(), n_chunks)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(run, range(n_chunks)))
    else:
        chunks = [run(i) for i in range(n_chunks)]

    return MetricScoreDistribution.from_samples(np.concatenate(chunks), cfg.seed)


def variance_match_check(data: FeedbackDataset, cfg: McConfig) -> float:
    """Relative gap between the Monte Carlo metric variance and the floor.

    Predictions are pinned to mu internally, so the sampled deviations are
    pure rating noise. Returns |Var_MC - Var_floor| / Var_floor; the match
    only becomes tight for large datasets, small ones simply report a large
    value.
    """
    floor = barrier_distribution(data).gaussian.variance
    if floor == 0.0:
        raise InputError("variance match is undefined for an all-zero-sigma dataset")
    predictions = PredictionSet({e.key: e.mu for e in data.entries})
    mc = rmse_distribution(data, predictions, cfg)
    return abs(mc.variance - floor) / floor
