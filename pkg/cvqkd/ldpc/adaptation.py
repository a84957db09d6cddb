"""Rate adaptation by puncturing and shortening, and frame assembly for reconciliation.

A punctured position carries a bit Bob never sends through the quantum
channel (Alice's llr is 0); a shortened position carries a bit fixed to 0
and known to both sides (llr +inf). The sum p + s is held constant for one
code, so only the split moves when the target rate changes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..errors import DomainError, RateAdaptationError
from ..mdr import DIM, blocks_needed, mdr_encode, mdr_llrs
from ..randomness import STREAM_ADAPTATION, derive_rng
from .code import SparseParityCheck, compute_syndrome

MAX_PUNCTURE_FRACTION = 0.10
DEFAULT_CONSTANT_FRACTION = 0.10


def default_constant(n: int) -> int:
    return int(round(DEFAULT_CONSTANT_FRACTION * n))


def max_punctured(n: int) -> int:
    return int(math.floor(MAX_PUNCTURE_FRACTION * n))


@dataclass(frozen=True, eq=False)
class RateAdaptation:
    n: int
    k: int
    punctured: np.ndarray
    shortened: np.ndarray
    constant: int

    def __post_init__(self) -> None:
        if self.p_count + self.s_count != self.constant:
            raise DomainError("punctured + shortened must equal the adaptation constant")
        if self.p_count > max_punctured(self.n):
            raise RateAdaptationError(f"{self.p_count} punctured positions exceed {MAX_PUNCTURE_FRACTION:.0%} of n={self.n}")
        if np.intersect1d(self.punctured, self.shortened).size:
            raise DomainError("a position cannot be both punctured and shortened")
        if self.s_count > self.k:
            raise DomainError(f"cannot shorten {self.s_count} positions of a code with k={self.k}")

    @property
    def p_count(self) -> int:
        return int(self.punctured.size)

    @property
    def s_count(self) -> int:
        return int(self.shortened.size)

    @property
    def effective_rate(self) -> float:
        return (self.k - self.s_count) / (self.n - self.p_count - self.s_count)

    @property
    def n_transmitted(self) -> int:
        return self.n - self.p_count - self.s_count

    @property
    def transmitted(self) -> np.ndarray:
        mask = np.ones(self.n, dtype=bool)
        mask[self.punctured] = False
        mask[self.shortened] = False
        return np.flatnonzero(mask)

    @property
    def key_positions(self) -> np.ndarray:
        """Positions whose bits become key material (everything not shortened)."""
        mask = np.ones(self.n, dtype=bool)
        mask[self.shortened] = False
        return np.flatnonzero(mask)

    @property
    def mdr_blocks(self) -> int:
        return blocks_needed(self.n_transmitted)

    @classmethod
    def from_counts(cls, code: SparseParityCheck, p_count: int, s_count: int, seed: int = 0) -> "RateAdaptation":
        if p_count < 0 or s_count < 0:
            raise DomainError("puncture and shorten counts must be non-negative")
        if p_count > max_punctured(code.n):
            raise RateAdaptationError(
                f"requested {p_count} punctured positions, at most {max_punctured(code.n)} allowed"
            )
        if p_count + s_count >= code.n:
            raise DomainError("nothing left to transmit")
        perm = derive_rng(seed, STREAM_ADAPTATION).permutation(code.n)
        return cls(
            n=code.n,
            k=code.k,
            punctured=np.sort(perm[:p_count]),
            shortened=np.sort(perm[p_count:p_count + s_count]),
            constant=p_count + s_count,
        )


def achievable_range(code: SparseParityCheck, constant: Optional[int] = None) -> Tuple[float, float]:
    """Lowest and highest effective rate reachable with p + s = constant."""
    c = default_constant(code.n) if constant is None else constant
    p_max = min(max_punctured(code.n), c)
    s_min = c - p_max
    s_max = min(c, code.k)
    lo = (code.k - s_max) / (code.n - c)
    hi = (code.k - s_min) / (code.n - c)
    return lo, hi


def adapt_rate(
    code: SparseParityCheck,
    target_rate: float,
    constant: Optional[int] = None,
    seed: int = 0,
) -> RateAdaptation:
    """Split the constant p + s so that (k - s)/(n - p - s) is closest to target_rate."""
    c = default_constant(code.n) if constant is None else int(constant)
    if c < 0 or c >= code.n:
        raise DomainError(f"adaptation constant must lie in [0, n) (got {c})")
    lo, hi = achievable_range(code, c)
    s = int(round(code.k - target_rate * (code.n - c)))
    p = c - s
    if s < 0 or p < 0 or p > max_punctured(code.n) or s > code.k:
        raise RateAdaptationError(f"target rate {target_rate:.6f} not reachable with p + s = {c}", (lo, hi))
    return RateAdaptation.from_counts(code, p, s, seed)


def clamp_rate(code: SparseParityCheck, target_rate: float, constant: Optional[int] = None) -> float:
    lo, hi = achievable_range(code, constant)
    return min(max(target_rate, lo), hi)


@dataclass
class FrameBatch:
    """Reconciliation frames: Bob's bits and public data, Alice's llrs."""

    u: np.ndarray
    syndromes: np.ndarray
    messages: np.ndarray
    llrs: np.ndarray


def build_frames(
    code: SparseParityCheck,
    adaptation: RateAdaptation,
    y: np.ndarray,
    x: np.ndarray,
    sigma2: float,
    t_slope: float,
    rng: np.random.Generator,
) -> FrameBatch:
    """Assemble frames from (frames, mdr_blocks*8) arrays of Bob's and Alice's key values.

    Transmitted positions ride the MDR virtual channel in order; the tail of
    the last 8-dimensional block carries padding bits that are discarded.
    """
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    n_frames = y.shape[0]
    width = adaptation.mdr_blocks * DIM
    if y.shape != (n_frames, width) or x.shape != y.shape:
        raise DomainError(f"expected ({n_frames}, {width}) value arrays, got {y.shape} and {x.shape}")

    u = rng.integers(0, 2, size=(n_frames, code.n), dtype=np.uint8)
    u[:, adaptation.shortened] = 0
    tx = adaptation.transmitted
    u_tx = np.zeros((n_frames, width), dtype=np.uint8)
    u_tx[:, :tx.size] = u[:, tx]

    shape = (n_frames, adaptation.mdr_blocks, DIM)
    messages = mdr_encode(y.reshape(shape), u_tx.reshape(shape))
    soft = mdr_llrs(x.reshape(shape), messages, sigma2, t_slope).reshape(n_frames, width)

    llrs = np.zeros((n_frames, code.n), dtype=np.float64)
    llrs[:, tx] = soft[:, :tx.size]
    llrs[:, adaptation.shortened] = np.inf
    return FrameBatch(u=u, syndromes=compute_syndrome(u, code), messages=messages, llrs=llrs)
