"""Coherent-state Gaussian channel simulator and sifting bookkeeping.

Loss and detection are collapsed into the linear model
``bob = sqrt(eta*t) * x_phi + z`` with z centered Gaussian of variance
``1 + v_el + eta*t*xi``; shot-noise frames carry no signal.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.stats import norm

from .errors import DomainError
from .frames import (
    FRAME_DTYPE,
    PHI_Q,
    ROLE_KEY,
    ROLE_PARAM_EST,
    ROLE_SHOT_NOISE,
)
from .model import ProtocolParams
from .randomness import STREAM_CHANNEL, STREAM_MODULATION, STREAM_SIFT, derive_rng

LOG = logging.getLogger("cvqkd.simulator")

CHUNK_SIZE = 1 << 18
# uniform-draw equivalents per pulse: two symbols, role, quadrature, noise
DRAWS_PER_PULSE = 5


@dataclass(frozen=True)
class ModulationGrid:
    """Truncated, discretized Gaussian modulation."""

    truncation: float = 7.0
    bits: int = 8

    def __post_init__(self) -> None:
        if self.truncation < 5:
            raise DomainError(f"truncation must be >= 5 standard deviations (got {self.truncation})")
        if self.bits < 4:
            raise DomainError(f"quantization needs at least 4 bits (got {self.bits})")

    @property
    def levels(self) -> int:
        return 1 << self.bits

    def step(self, v_a: float) -> float:
        return 2.0 * self.truncation * math.sqrt(v_a) / (self.levels - 1)


@dataclass(frozen=True)
class Fractions:
    """Share of pulses used for shot-noise estimation and of signal frames disclosed for PE."""

    shot_noise: float = 0.5
    param_est: float = 0.5

    def __post_init__(self) -> None:
        for name in ("shot_noise", "param_est"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise DomainError(f"{name} fraction must lie in [0, 1] (got {value})")

    @property
    def key(self) -> float:
        return (1.0 - self.shot_noise) * (1.0 - self.param_est)


@dataclass
class SiftResult:
    """Frames after role assignment, with Alice's record reduced to the measured quadrature."""

    frames: np.ndarray
    alice_x: np.ndarray
    disclosed_phi: np.ndarray

    def _mask(self, role: int) -> np.ndarray:
        return self.frames["role"] == role

    @property
    def key_index(self) -> np.ndarray:
        return np.flatnonzero(self._mask(ROLE_KEY))

    @property
    def pe_index(self) -> np.ndarray:
        return np.flatnonzero(self._mask(ROLE_PARAM_EST))

    @property
    def shot_noise_index(self) -> np.ndarray:
        return np.flatnonzero(self._mask(ROLE_SHOT_NOISE))

    def key_pairs(self) -> Tuple[np.ndarray, np.ndarray]:
        idx = self.key_index
        return self.alice_x[idx], self.frames["bob_value"][idx]

    def pe_pairs(self) -> Tuple[np.ndarray, np.ndarray]:
        idx = self.pe_index
        return self.alice_x[idx], self.frames["bob_value"][idx]

    def shot_noise_values(self) -> np.ndarray:
        return self.frames["bob_value"][self.shot_noise_index]


def _chunks(n: int):
    for c, start in enumerate(range(0, n, CHUNK_SIZE)):
        yield c, start, min(start + CHUNK_SIZE, n)


def _run_chunks(n: int, work) -> None:
    bounds = list(_chunks(n))
    if len(bounds) == 1:
        work(*bounds[0])
        return
    with ThreadPoolExecutor() as pool:
        list(pool.map(lambda b: work(*b), bounds))


def generate_modulation(
    n: int,
    v_a: float,
    grid: Optional[ModulationGrid] = ModulationGrid(),
    seed: int = 0,
) -> np.ndarray:
    """Alice's (q, p) symbols, shape (n, 2).

    Inverse-CDF sampling of a centered Gaussian of variance v_a, truncated at
    +-truncation*sqrt(v_a) and rounded to the 2**bits uniform grid. With
    grid=None the plain Gaussian is returned from the same uniform draws.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1 (got {n})")
    if v_a <= 0:
        raise DomainError(f"v_a must be positive (got {v_a})")

    sigma = math.sqrt(v_a)
    out = np.empty((n, 2), dtype=np.float64)
    lo = float(norm.cdf(-grid.truncation)) if grid is not None else 0.0

    def work(c: int, start: int, stop: int) -> None:
        rng = derive_rng(seed, STREAM_MODULATION, c)
        u = rng.random((stop - start, 2))
        u = lo + u * (1.0 - 2.0 * lo)
        np.clip(u, np.finfo(np.float64).tiny, None, out=u)
        x = norm.ppf(u) * sigma
        if grid is not None:
            half = grid.truncation * sigma
            step = grid.step(v_a)
            x = -half + np.round((np.clip(x, -half, half) + half) / step) * step
        out[start:stop] = x

    _run_chunks(n, work)
    return out


def channel_and_detect(
    symbols: np.ndarray,
    params: ProtocolParams,
    seed: int,
    shot_noise_fraction: float = 0.5,
) -> np.ndarray:
    """Send symbols through the lossy noisy channel and homodyne them at Bob.

    Shot-noise frames are drawn independently of the symbols; their signal is
    blocked so Bob records vacuum plus electronic noise.
    """
    symbols = np.asarray(symbols, dtype=np.float64)
    if symbols.ndim != 2 or symbols.shape[1] != 2 or symbols.shape[0] == 0:
        raise DomainError("symbols must be a non-empty (n, 2) array")
    if not 0.0 <= shot_noise_fraction <= 1.0:
        raise DomainError(f"shot-noise fraction must lie in [0, 1] (got {shot_noise_fraction})")

    n = symbols.shape[0]
    gain = params.eta * params.t
    amp = math.sqrt(gain)
    signal_std = math.sqrt(1.0 + params.v_el + gain * params.xi)
    vacuum_std = math.sqrt(1.0 + params.v_el)
    frames = np.zeros(n, dtype=FRAME_DTYPE)

    def work(c: int, start: int, stop: int) -> None:
        rng = derive_rng(seed, STREAM_CHANNEL, c)
        m = stop - start
        shot = rng.random(m) < shot_noise_fraction
        phi = rng.integers(0, 2, size=m, dtype=np.uint8)
        z = rng.standard_normal(m)
        q = np.where(shot, 0.0, symbols[start:stop, 0])
        p = np.where(shot, 0.0, symbols[start:stop, 1])
        x_phi = np.where(phi == PHI_Q, q, p)
        chunk = frames[start:stop]
        chunk["index"] = np.arange(start, stop, dtype=np.uint64)
        chunk["alice_q"] = q
        chunk["alice_p"] = p
        chunk["phi"] = phi
        chunk["bob_value"] = amp * x_phi + np.where(shot, vacuum_std, signal_std) * z
        chunk["role"] = np.where(shot, ROLE_SHOT_NOISE, ROLE_KEY)

    _run_chunks(n, work)
    LOG.debug("detected %d frames (%d random draws)", n, n * DRAWS_PER_PULSE)
    return frames


def sift_and_partition(frames: np.ndarray, fractions: Fractions, seed: int) -> SiftResult:
    """Disclose Bob's quadrature choices and split signal frames into key / PE.

    The PE choice is a seeded random sample, independent of measured values.
    Shot-noise frames keep their role; ``fractions.shot_noise`` only has to be
    consistent with the detection stage and is validated here.
    """
    if not isinstance(fractions, Fractions):
        fractions = Fractions(*fractions)
    out = frames.copy()
    signal = out["role"] != ROLE_SHOT_NOISE
    rng = derive_rng(seed, STREAM_SIFT)
    pe = rng.random(out.shape[0]) < fractions.param_est
    out["role"] = np.where(signal & pe, ROLE_PARAM_EST, np.where(signal, ROLE_KEY, ROLE_SHOT_NOISE))

    alice_x = np.where(out["phi"] == PHI_Q, out["alice_q"], out["alice_p"])
    alice_x = np.where(signal, alice_x, 0.0)
    return SiftResult(frames=out, alice_x=alice_x, disclosed_phi=out["phi"].copy())
