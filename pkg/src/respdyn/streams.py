"""Deterministic random stream derivation.

Every Monte Carlo trial gets its own generator derived from
(base_seed, K, trial index) through a splitmix-style integer mix, so trials
are independent, order-free, and replayable from a single 64-bit value.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def trial_seed(base_seed: int, K: int, index: int) -> int:
    """64-bit mix of (base_seed, K, index); collision-free in practice."""
    h = _splitmix64(base_seed & _MASK64)
    h = _splitmix64(h ^ _splitmix64(K & _MASK64))
    return _splitmix64(h ^ _splitmix64(index & _MASK64))


def stream_from_seed(seed: int) -> np.random.Generator:
    """Counter-based generator for a single 64-bit seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def trial_stream(base_seed: int, K: int, index: int) -> np.random.Generator:
    return stream_from_seed(trial_seed(base_seed, K, index))
