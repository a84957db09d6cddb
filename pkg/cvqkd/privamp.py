"""Privacy amplification by Toeplitz hashing over GF(2)."""
from __future__ import annotations

import hashlib
import logging
import math
import pathlib
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Optional, Union

import numpy as np
from scipy.signal import fftconvolve

from .errors import DomainError
from .frames import save_bits

LOG = logging.getLogger("cvqkd.privamp")

SEGMENT_BITS = 1 << 20
MIN_THROUGHPUT_MBPS = 40.0
_THROUGHPUT_FLOOR_INPUT = 1 << 20
_DOMAIN = b"cvqkd/toeplitz/v1"


@dataclass(frozen=True)
class ToeplitzSeed:
    """Toeplitz matrix of shape (l_out, n_in) defined by n_in + l_out - 1 bits."""

    prng_seed: int
    n_in: int
    l_out: int

    def __post_init__(self) -> None:
        if self.n_in < 1:
            raise DomainError(f"n_in must be positive (got {self.n_in})")
        if not 0 <= self.l_out <= self.n_in:
            raise DomainError(f"l_out must lie in [0, n_in] (got {self.l_out})")

    @property
    def n_defining(self) -> int:
        return self.n_in + self.l_out - 1

    def defining_bits(self) -> np.ndarray:
        """SHAKE-256 stream keyed by the seed; the same seed always gives the same prefix."""
        n_bytes = (self.n_defining + 7) // 8
        digest = hashlib.shake_256(_DOMAIN + (self.prng_seed & ((1 << 64) - 1)).to_bytes(8, "little")).digest(n_bytes)
        bits = np.unpackbits(np.frombuffer(digest, dtype=np.uint8), bitorder="little")
        return bits[:self.n_defining]


def compute_final_length(
    n_corrected: int,
    leak_ec: int,
    chi_be_worst: float,
    delta: float,
    n_symbols: int,
) -> int:
    """floor(n_corrected - leak_ec - n_symbols*(chi + delta)), clamped to [0, n_corrected]."""
    for name, value in (("n_corrected", n_corrected), ("leak_ec", leak_ec), ("chi_be_worst", chi_be_worst),
                        ("delta", delta), ("n_symbols", n_symbols)):
        if value < 0:
            raise DomainError(f"{name} must be non-negative (got {value})")
    length = math.floor(n_corrected - leak_ec - n_symbols * (chi_be_worst + delta))
    return int(min(max(length, 0), n_corrected))


def _segment(bits: np.ndarray, d: np.ndarray, start: int, stop: int, l_out: int) -> np.ndarray:
    n = bits.size
    window = d[n - stop:n - start + l_out - 1].astype(np.float64)
    conv = fftconvolve(window, bits[start:stop].astype(np.float64), mode="valid")
    return (np.rint(conv).astype(np.int64) & 1).astype(np.uint8)


def toeplitz_multiply(bits: np.ndarray, d: np.ndarray, l_out: int, segment_bits: int = SEGMENT_BITS) -> np.ndarray:
    """key_j = XOR_i bits_i AND d[j - i + n_in - 1] for explicit defining bits d."""
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    d = np.asarray(d, dtype=np.uint8).ravel()
    if d.size != bits.size + l_out - 1:
        raise DomainError(f"{bits.size} input bits and {l_out} output bits need {bits.size + l_out - 1} defining bits")
    if l_out == 0:
        return np.zeros(0, dtype=np.uint8)
    bounds = [(a, min(a + segment_bits, bits.size)) for a in range(0, bits.size, segment_bits)]
    if len(bounds) == 1:
        return _segment(bits, d, *bounds[0], l_out)
    with ThreadPoolExecutor() as pool:
        parts = list(pool.map(lambda b: _segment(bits, d, b[0], b[1], l_out), bounds))
    return np.bitwise_xor.reduce(parts)


def toeplitz_hash(bits: np.ndarray, seed: ToeplitzSeed, segment_bits: int = SEGMENT_BITS) -> np.ndarray:
    """Hash with the Toeplitz matrix of `seed`, computed as segmented FFT convolutions."""
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if bits.size != seed.n_in:
        raise DomainError(f"input has {bits.size} bits, seed expects {seed.n_in}")
    if seed.l_out == 0:
        return np.zeros(0, dtype=np.uint8)
    if np.any(bits > 1):
        raise DomainError("input must be a 0/1 array")

    started = time.perf_counter()
    key = toeplitz_multiply(bits, seed.defining_bits(), seed.l_out, segment_bits)

    elapsed = time.perf_counter() - started
    if elapsed > 0:
        mbps = bits.size / elapsed / 1e6
        LOG.info("hashed %d -> %d bits in %.3fs (%.1f Mbit/s)", bits.size, seed.l_out, elapsed, mbps)
        if bits.size >= _THROUGHPUT_FLOOR_INPUT and mbps < MIN_THROUGHPUT_MBPS:
            LOG.warning("hash throughput %.1f Mbit/s below %.0f Mbit/s", mbps, MIN_THROUGHPUT_MBPS)
    return key


def write_key(
    path: Union[str, pathlib.Path],
    key: np.ndarray,
    session_id: str,
    seed: ToeplitzSeed,
    accounting: Optional[Mapping[str, object]] = None,
) -> pathlib.Path:
    """Raw packed key plus a `key = value` sidecar next to it; returns the sidecar path."""
    path = pathlib.Path(path)
    save_bits(path, key)
    sidecar = path.with_name(path.name + ".txt")
    lines = [
        f"session_id = {session_id}",
        f"l_out = {int(np.asarray(key).size)}",
        f"n_in = {seed.n_in}",
        f"seed = {seed.prng_seed}",
    ]
    for name, value in (accounting or {}).items():
        lines.append(f"{name} = {value}")
    sidecar.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return sidecar


def read_sidecar(path: Union[str, pathlib.Path]) -> dict:
    out = {}
    for line in pathlib.Path(path).read_text(encoding="utf-8").splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out
