"""Seed-derived random streams.

Every stage draws from its own PCG64 stream keyed by (seed, stage, index), so
chunks and blocks can be produced in any order and still merge to the same
result.
"""
from __future__ import annotations

import numpy as np

STREAM_MODULATION = 1
STREAM_CHANNEL = 2
STREAM_SIFT = 3
STREAM_BOB_BITS = 4
STREAM_ADAPTATION = 5
STREAM_VERIFY = 6
STREAM_PRIVACY = 7
STREAM_BLOCK = 8
STREAM_CONSTRUCTION = 9

MASK64 = (1 << 64) - 1


def derive_rng(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed) & MASK64, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *key: int) -> int:
    """64-bit child seed, for handing to components that take a plain integer."""
    ss = np.random.SeedSequence(entropy=int(seed) & MASK64, spawn_key=tuple(int(k) for k in key))
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return (int(hi) << 32) | int(lo)
