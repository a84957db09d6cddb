"""Eight-dimensional (octonion) multidimensional reconciliation.

Octonions are stored as (..., 8) float arrays, component 0 real. The product
is the Cayley-Dickson doubling of quaternions,
``(a1, a2)(b1, b2) = (a1 b1 - conj(b2) a2, b2 a1 + a2 conj(b1))``,
so e1*e2 = e3 and e1*e4 = e5.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import DomainError, SingularElementError

DIM = 8
INVERSE_TOL = 1e-12
ENCODE_TOL = 1e-9
MESSAGE_DTYPE = np.dtype("<f8")
MESSAGE_BYTES = DIM * MESSAGE_DTYPE.itemsize

ArrayLike = Union["Octonion", np.ndarray, list, tuple]


def _quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a0, a1, a2, a3 = np.moveaxis(a, -1, 0)
    b0, b1, b2, b3 = np.moveaxis(b, -1, 0)
    return np.stack(
        (
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ),
        axis=-1,
    )


def _quat_conj(a: np.ndarray) -> np.ndarray:
    out = -a
    out[..., 0] = a[..., 0]
    return out


def _components(a: ArrayLike) -> np.ndarray:
    if isinstance(a, Octonion):
        return a.c
    arr = np.asarray(a, dtype=np.float64)
    if arr.shape[-1:] != (DIM,):
        raise DomainError(f"octonion arrays need a trailing dimension of 8 (got {arr.shape})")
    return arr


@dataclass(frozen=True)
class Octonion:
    c: np.ndarray = field(default_factory=lambda: np.eye(DIM)[0])

    def __post_init__(self) -> None:
        arr = np.asarray(self.c, dtype=np.float64)
        if arr.shape != (DIM,):
            raise DomainError(f"an octonion has 8 components (got shape {arr.shape})")
        object.__setattr__(self, "c", arr)

    @classmethod
    def basis(cls, i: int) -> "Octonion":
        return cls(np.eye(DIM)[i])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.c))

    def conj(self) -> "Octonion":
        return Octonion(octonion_conj(self.c))

    def inverse(self) -> "Octonion":
        return Octonion(octonion_inverse(self.c))

    def __mul__(self, other: "Octonion") -> "Octonion":
        if not isinstance(other, Octonion):
            return NotImplemented
        return Octonion(octonion_mul(self.c, other.c))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Octonion) and bool(np.array_equal(self.c, other.c))

    def __hash__(self) -> int:
        return hash(self.c.tobytes())

    def __repr__(self) -> str:
        return "Octonion(" + ", ".join(f"{v:.6g}" for v in self.c) + ")"


def octonion_mul(a: ArrayLike, b: ArrayLike):
    """Product of octonions; broadcasts over leading axes of array inputs."""
    wrap = isinstance(a, Octonion) and isinstance(b, Octonion)
    x, y = _components(a), _components(b)
    a1, a2 = x[..., :4], x[..., 4:]
    b1, b2 = y[..., :4], y[..., 4:]
    out = np.concatenate(
        (
            _quat_mul(a1, b1) - _quat_mul(_quat_conj(b2), a2),
            _quat_mul(b2, a1) + _quat_mul(a2, _quat_conj(b1)),
        ),
        axis=-1,
    )
    return Octonion(out) if wrap else out


def octonion_conj(a: ArrayLike) -> np.ndarray:
    out = -_components(a)
    out[..., 0] = -out[..., 0]
    return out


def octonion_inverse(a: ArrayLike):
    """conj(a)/|a|^2; raises SingularElementError for |a| <= 1e-12."""
    wrap = isinstance(a, Octonion)
    x = _components(a)
    norm2 = np.sum(x * x, axis=-1, keepdims=True)
    if np.any(np.sqrt(norm2) <= INVERSE_TOL):
        raise SingularElementError("octonion norm too small to invert")
    out = octonion_conj(x) / norm2
    return Octonion(out) if wrap else out


def bits_to_unit(u: np.ndarray) -> np.ndarray:
    """Map bits to the unit octonion with components (-1)**u_i / sqrt(8)."""
    u = np.asarray(u)
    if u.shape[-1:] != (DIM,):
        raise DomainError(f"bit blocks need a trailing dimension of 8 (got {u.shape})")
    return np.where(u.astype(bool), -1.0, 1.0) / math.sqrt(DIM)


def _unit(v: np.ndarray, tol: float, what: str) -> tuple[np.ndarray, np.ndarray]:
    norm = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(norm <= tol):
        raise SingularElementError(f"{what} vector has near-zero norm")
    return v / norm, norm


def mdr_encode(y: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Bob's public message r = (y/|y|) * u_hat, one unit octonion per block."""
    y = _components(y)
    y_hat, _ = _unit(y, ENCODE_TOL, "Bob's")
    return octonion_mul(y_hat, bits_to_unit(u))


def mdr_llrs(x: np.ndarray, r: np.ndarray, sigma2: float, t_slope: float) -> np.ndarray:
    """Alice's per-bit LLRs (positive favours bit 0) from her data and Bob's message.

    x is first scaled to Bob's frame, x' = t_slope*x; then v = (x'/|x'|)^-1 * r
    and llr_i = (2/sqrt(8)) * v_i * |x'|^2 / sigma2.
    """
    if sigma2 <= 0:
        raise DomainError(f"noise variance must be positive (got {sigma2})")
    x_scaled = t_slope * _components(x)
    x_hat, norm = _unit(x_scaled, ENCODE_TOL, "Alice's")
    v = octonion_mul(octonion_conj(x_hat), _components(r))
    return (2.0 / math.sqrt(DIM)) * v * (norm * norm) / sigma2


def blocks_needed(n_values: int) -> int:
    return -(-int(n_values) // DIM)


def as_blocks(values: np.ndarray, n_blocks: int) -> np.ndarray:
    """First n_blocks*8 values reshaped to (n_blocks, 8)."""
    values = np.asarray(values, dtype=np.float64).ravel()
    need = n_blocks * DIM
    if values.size < need:
        raise DomainError(f"need {need} values for {n_blocks} blocks (got {values.size})")
    return values[:need].reshape(n_blocks, DIM)


def pack_messages(r: np.ndarray) -> bytes:
    """Classical-channel payload: 8 little-endian f64 per block."""
    return np.ascontiguousarray(_components(r), dtype=MESSAGE_DTYPE).tobytes()


def unpack_messages(payload: bytes) -> np.ndarray:
    if len(payload) % MESSAGE_BYTES:
        raise DomainError(f"message payload of {len(payload)} bytes is not a whole number of blocks")
    return np.frombuffer(payload, dtype=MESSAGE_DTYPE).reshape(-1, DIM).copy()


@dataclass
class MdrBlock:
    """One 8-dimensional reconciliation exchange."""

    y: np.ndarray
    u: np.ndarray
    r: np.ndarray
    x: np.ndarray
    llr: np.ndarray

    @classmethod
    def exchange(cls, y, u, x, sigma2: float, t_slope: float) -> "MdrBlock":
        r = mdr_encode(y, u)
        return cls(
            y=np.asarray(y, dtype=np.float64),
            u=np.asarray(u, dtype=np.uint8),
            r=r,
            x=np.asarray(x, dtype=np.float64),
            llr=mdr_llrs(x, r, sigma2, t_slope),
        )

    @property
    def hard_bits(self) -> np.ndarray:
        return (self.llr < 0).astype(np.uint8)
