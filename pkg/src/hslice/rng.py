"""Seed handling shared by every randomized routine.

All randomness flows from a single 64-bit master seed.  Independent streams
are derived by tagging the seed with a purpose label and a counter, so a
trial's draws depend only on ``(seed, purpose, index)`` and never on how the
trials were split across workers.
"""

from __future__ import annotations

import zlib

import numpy as np

MAX_SEED = 2**64 - 1


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def _tag(purpose: str) -> int:
    return zlib.crc32(purpose.encode("utf-8"))


def stream(seed: int, purpose: str, index: int = 0) -> np.random.Generator:
    """Generator for stream ``index`` of ``purpose`` under master ``seed``."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=(_tag(purpose), int(index)))
    return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator, an integer seed, or None (fresh entropy)."""
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        return np.random.default_rng()
    return stream(int(rng), "default")
