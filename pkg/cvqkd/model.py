"""Parameter conventions and Gaussian covariance-matrix mathematics.

All quantities are expressed in shot-noise units (SNU) with the vacuum
quadrature variance fixed to 1. Covariance matrices are ordered
(q1, p1, q2, p2, ...) everywhere in the package.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, Literal, Union

import numpy as np

from .errors import DomainError, UnphysicalStateError

DEFAULT_ALPHA_DB_PER_KM = 0.2
SYMMETRY_TOL = 1e-12
CLAMP_TOL = 1e-9
UNPHYSICAL_TOL = 1e-6

Quadrature = Literal["q", "p"]


@dataclass(frozen=True)
class ProtocolParams:
    """Physical parameters of one operating point (SNU, dimensionless)."""

    v_a: float
    t: float
    xi: float
    eta: float
    v_el: float
    beta: float = 0.95

    def __post_init__(self) -> None:
        if not self.v_a >= 0:
            raise DomainError(f"v_a must be non-negative (got {self.v_a})")
        if not 0.0 <= self.t <= 1.0:
            raise DomainError(f"t must lie in [0, 1] (got {self.t})")
        if not self.xi >= 0:
            raise DomainError(f"xi must be non-negative for a physical channel (got {self.xi})")
        if not 0.0 < self.eta <= 1.0:
            raise DomainError(f"eta must lie in (0, 1] (got {self.eta})")
        if not self.v_el >= 0:
            raise DomainError(f"v_el must be non-negative (got {self.v_el})")
        if not 0.0 <= self.beta <= 1.0:
            raise DomainError(f"beta must lie in [0, 1] (got {self.beta})")

    def with_(self, **changes: float) -> "ProtocolParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class DeviceUncertainty:
    """Absolute calibration uncertainties on the detector."""

    delta_eta: float = 0.0
    delta_v_el: float = 0.0

    def __post_init__(self) -> None:
        if self.delta_eta < 0 or self.delta_v_el < 0:
            raise DomainError("device uncertainties must be non-negative")


@dataclass(frozen=True)
class CovarianceMatrix:
    """Real symmetric 2k x 2k quadrature covariance matrix."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.entries, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise DomainError(f"covariance matrix must be square with even dimension (got {m.shape})")
        scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
        if not np.allclose(m, m.T, rtol=0.0, atol=SYMMETRY_TOL * scale):
            raise DomainError("covariance matrix is not symmetric")
        object.__setattr__(self, "entries", m)

    @property
    def k(self) -> int:
        return self.entries.shape[0] // 2

    @classmethod
    def vacuum(cls, k: int = 1) -> "CovarianceMatrix":
        return cls(np.eye(2 * k))

    @classmethod
    def thermal(cls, v: float) -> "CovarianceMatrix":
        return cls(v * np.eye(2))

    @classmethod
    def two_mode_squeezed(cls, v: float) -> "CovarianceMatrix":
        """EPR state with diagonal blocks v*I and correlations sqrt(v^2-1)*Z."""
        return cls(epr_block(v, v, math.sqrt(max(v * v - 1.0, 0.0))))


def epr_block(a: float, b: float, c: float) -> np.ndarray:
    """Two-mode matrix [[a I, c Z], [c Z, b I]]."""
    z = np.diag([1.0, -1.0])
    return np.block([[a * np.eye(2), c * z], [c * z, b * np.eye(2)]])


def direct_sum(*blocks: np.ndarray) -> np.ndarray:
    size = sum(b.shape[0] for b in blocks)
    out = np.zeros((size, size))
    pos = 0
    for b in blocks:
        n = b.shape[0]
        out[pos:pos + n, pos:pos + n] = b
        pos += n
    return out


def symplectic_form(k: int) -> np.ndarray:
    return np.kron(np.eye(k), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def beamsplitter(eta: float, k: int, mode_a: int, mode_b: int) -> np.ndarray:
    """Symplectic matrix of a beamsplitter of transmissivity eta acting on two of k modes."""
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"beamsplitter transmissivity must lie in [0, 1] (got {eta})")
    s = np.eye(2 * k)
    ct, st = math.sqrt(eta), math.sqrt(1.0 - eta)
    a, b = 2 * mode_a, 2 * mode_b
    for off in (0, 1):
        s[a + off, a + off] = ct
        s[a + off, b + off] = st
        s[b + off, a + off] = -st
        s[b + off, b + off] = ct
    return s


def km_to_db(distance: float, alpha: float = DEFAULT_ALPHA_DB_PER_KM) -> float:
    if distance < 0:
        raise DomainError(f"distance must be non-negative (got {distance})")
    if alpha <= 0:
        raise DomainError(f"attenuation must be positive (got {alpha})")
    return alpha * distance


def db_to_transmittance(loss: float) -> float:
    if loss < 0:
        raise DomainError(f"loss must be non-negative (got {loss})")
    return 10.0 ** (-loss / 10.0)


def snr(params: ProtocolParams) -> float:
    """Signal-to-noise ratio on Bob's side.

    Signal: eta*t*v_a. Noise: shot noise (1) + electronic noise + excess
    noise transmitted to the detector.
    """
    gain = params.eta * params.t
    return gain * params.v_a / (1.0 + params.v_el + gain * params.xi)


def g_function(x: float) -> float:
    """Von Neumann entropy (bits) of a thermal mode with symplectic eigenvalue x."""
    if x < 1.0 - CLAMP_TOL:
        raise DomainError(f"symplectic eigenvalue below 1 (got {x})")
    if x <= 1.0:
        return 0.0
    hi, lo = (x + 1.0) / 2.0, (x - 1.0) / 2.0
    return hi * math.log2(hi) - lo * math.log2(lo)


def _as_matrix(gamma: Union[CovarianceMatrix, np.ndarray]) -> CovarianceMatrix:
    if isinstance(gamma, CovarianceMatrix):
        return gamma
    return CovarianceMatrix(np.asarray(gamma, dtype=np.float64))


def symplectic_eigenvalues(gamma: Union[CovarianceMatrix, np.ndarray]) -> List[float]:
    """Symplectic spectrum from the eigenvalues of i*Omega*gamma, sorted descending."""
    cm = _as_matrix(gamma)
    omega = symplectic_form(cm.k)
    moduli = np.sort(np.abs(np.linalg.eigvals(1j * omega @ cm.entries)))[::-1]
    # eigenvalues come in +/- pairs
    nus = [float(v) for v in moduli[::2]]
    out: List[float] = []
    for nu in nus:
        if nu < 1.0 - UNPHYSICAL_TOL:
            raise UnphysicalStateError(f"symplectic eigenvalue {nu:.9f} < 1")
        if 1.0 - CLAMP_TOL <= nu < 1.0:
            nu = 1.0
        out.append(nu)
    return out


def homodyne_condition(
    gamma: Union[CovarianceMatrix, np.ndarray],
    mode: int,
    quadrature: Quadrature = "q",
) -> CovarianceMatrix:
    """Covariance matrix of the remaining modes after homodyning `mode` (0-based)."""
    cm = _as_matrix(gamma)
    if not 0 <= mode < cm.k:
        raise DomainError(f"mode {mode} out of range for a {cm.k}-mode state")
    if quadrature not in ("q", "p"):
        raise DomainError(f"quadrature must be 'q' or 'p' (got {quadrature!r})")

    measured = [2 * mode, 2 * mode + 1]
    rest = [i for i in range(2 * cm.k) if i not in measured]
    g = cm.entries
    g_a = g[np.ix_(rest, rest)]
    g_b = g[np.ix_(measured, measured)]
    s_ab = g[np.ix_(rest, measured)]

    idx = 0 if quadrature == "q" else 1
    var = g_b[idx, idx]
    if var <= 0:
        raise DomainError(f"measured quadrature variance must be positive (got {var})")
    proj = np.zeros((2, 2))
    proj[idx, idx] = 1.0 / var
    cond = g_a - s_ab @ proj @ s_ab.T
    # restore exact symmetry lost to rounding
    return CovarianceMatrix(0.5 * (cond + cond.T))


def random_symplectic(k: int, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    """Random symplectic matrix built from Gaussian-unitary generators.

    Products of random beamsplitters, phase rotations and single-mode squeezers.
    """
    s = np.eye(2 * k)
    for _ in range(3 * k):
        i = int(rng.integers(k))
        theta = float(rng.uniform(0, 2 * np.pi))
        rot = np.eye(2 * k)
        c, sn = math.cos(theta), math.sin(theta)
        rot[2 * i:2 * i + 2, 2 * i:2 * i + 2] = [[c, sn], [-sn, c]]
        r = float(rng.normal(0.0, scale))
        sq = np.eye(2 * k)
        sq[2 * i, 2 * i] = math.exp(-r)
        sq[2 * i + 1, 2 * i + 1] = math.exp(r)
        s = sq @ rot @ s
        if k > 1:
            j = int(rng.integers(k - 1))
            j = j + 1 if j >= i else j
            s = beamsplitter(float(rng.uniform()), k, i, j) @ s
    return s


def is_physical(gamma: Union[CovarianceMatrix, np.ndarray], tol: float = CLAMP_TOL) -> bool:
    try:
        return min(symplectic_eigenvalues(gamma)) >= 1.0 - tol
    except UnphysicalStateError:
        return False
