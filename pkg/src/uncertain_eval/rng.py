"""Deterministic derivation of child random generators.

Every stochastic operation in the package derives its generator from a user
seed plus an integer key path (chunk index, pair index, group index, ...).
Results therefore depend only on (seed, key), never on scheduling, thread
count, or call order.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError

_SEED_MAX = 2**64


def validate_seed(seed: int, name: str = "seed") -> int:
    if not isinstance(seed, (int, np.integer)):
        raise InputError(f"{name} must be an integer, got {type(seed).__name__}")
    if not 0 <= int(seed) < _SEED_MAX:
        raise InputError(f"{name} must be a 64-bit unsigned integer, got {seed}")
    return int(seed)


def child_rng(seed: int, *key: int) -> np.random.Generator:
    """Generator for the stream identified by ``(seed, key...)``."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))
