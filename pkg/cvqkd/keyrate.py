"""Secret-key rates: mutual information, Holevo bound, finite-size penalty, code selection."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Literal, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import bisect, minimize_scalar

from .errors import DomainError, EstimationFailure, NoFeasibleCodeError
from .estimation import ChannelEstimate, expected_estimate, worst_case_bounds
from .model import (
    ProtocolParams,
    beamsplitter,
    direct_sum,
    epr_block,
    g_function,
    homodyne_condition,
    snr,
    symplectic_eigenvalues,
)

LOG = logging.getLogger("cvqkd.keyrate")

VA_RANGE = (1.0, 10.0)
DEFAULT_EPS = 1e-10
DELTA_CONSTANT = 7.0
ETA_DILATION_MAX = 1.0 - 1e-6

Mode = Literal["asymptotic", "finite"]
Corner = Tuple[float, float]


@dataclass(frozen=True)
class FiniteSizeParams:
    """Block accounting and security budget for the finite-size rate."""

    n_total: int
    n_key: int
    eps_pe: float = DEFAULT_EPS
    eps_pa: float = DEFAULT_EPS
    eps_bar: float = DEFAULT_EPS
    eps_total: float = DEFAULT_EPS
    delta_constant: float = DELTA_CONSTANT

    def __post_init__(self) -> None:
        if self.n_key <= 0 or self.n_key >= self.n_total:
            raise DomainError(f"need 0 < n_key < n_total (got {self.n_key}, {self.n_total})")
        for name in ("eps_pe", "eps_pa", "eps_bar"):
            value = getattr(self, name)
            if not 0.0 < value <= self.eps_total:
                raise DomainError(f"{name} must lie in (0, eps_total] (got {value})")

    @property
    def m_pe(self) -> int:
        return self.n_total - self.n_key

    @property
    def key_fraction(self) -> float:
        return self.n_key / self.n_total

    @classmethod
    def from_block(cls, n_total: int, pe_fraction: float = 0.5, **kwargs) -> "FiniteSizeParams":
        m = int(round(n_total * pe_fraction))
        return cls(n_total=int(n_total), n_key=int(n_total) - m, **kwargs)


@dataclass(frozen=True)
class CodeDescriptor:
    code_id: str
    rate: float
    snr_threshold: float
    block_len: int

    def __post_init__(self) -> None:
        if not 0.0 < self.rate < 1.0:
            raise DomainError(f"code rate must lie in (0, 1) (got {self.rate})")
        if self.snr_threshold <= 0:
            raise DomainError(f"snr threshold must be positive (got {self.snr_threshold})")

    @property
    def efficiency(self) -> float:
        """Reconciliation efficiency when operated exactly at threshold."""
        return self.rate / mutual_information(self.snr_threshold)


@dataclass(frozen=True)
class FiniteRate:
    i_ab: float
    chi_worst: float
    delta: float
    key_fraction: float
    rate: float
    worst_corner: Corner


def mutual_information(snr_value: float) -> float:
    if snr_value < 0:
        raise DomainError(f"snr must be non-negative (got {snr_value})")
    return 0.5 * math.log2(1.0 + snr_value)


def _dilated_state(params: ProtocolParams) -> Tuple[np.ndarray, np.ndarray]:
    """Covariance of (A, B) at the channel output and of (A, B3, G, F) after the detector dilation."""
    v = params.v_a + 1.0
    t = params.t
    b = t * v + 1.0 - t + t * params.xi
    c = math.sqrt(t * (v * v - 1.0))
    gamma_ab = epr_block(v, b, c)

    eta = params.eta
    if params.v_el > 0 and eta > ETA_DILATION_MAX:
        eta = ETA_DILATION_MAX
    v_d = 1.0 if params.v_el == 0 else 1.0 + params.v_el / (1.0 - eta)
    gamma_anc = epr_block(v_d, v_d, math.sqrt(v_d * v_d - 1.0))

    # modes: A, B, F0, F; the beamsplitter mixes B with the ancilla half F0
    full = direct_sum(gamma_ab, gamma_anc)
    s = beamsplitter(eta, 4, 1, 2)
    return gamma_ab, s @ full @ s.T


def holevo_bound(params: ProtocolParams) -> float:
    """Eve's information on Bob's homodyne data under collective attacks (trusted detector)."""
    if params.t <= 0:
        raise DomainError("holevo bound needs t > 0")
    gamma_ab, dilated = _dilated_state(params)
    s_e = sum(g_function(max(nu, 1.0)) for nu in symplectic_eigenvalues(gamma_ab))
    cond = homodyne_condition(0.5 * (dilated + dilated.T), 1, "q")
    s_e_given_b = sum(g_function(max(nu, 1.0)) for nu in symplectic_eigenvalues(cond))
    return max(s_e - s_e_given_b, 0.0)


def rate_asymptotic(params: ProtocolParams) -> float:
    """beta*I_AB - chi_BE in bits per key symbol; may be negative."""
    return params.beta * mutual_information(snr(params)) - holevo_bound(params)


def delta_n(n_key: int, eps_bar: float = DEFAULT_EPS, eps_pa: float = DEFAULT_EPS,
            constant: float = DELTA_CONSTANT) -> float:
    if n_key < 10_000:
        raise DomainError(f"finite-size penalty needs n_key >= 1e4 (got {n_key})")
    return constant * math.sqrt(math.log2(2.0 / eps_bar) / n_key) + (2.0 / n_key) * math.log2(1.0 / eps_pa)


def worst_case_chi(
    est: ChannelEstimate,
    fs: FiniteSizeParams,
    corners: Sequence[Corner],
    v_a: float,
) -> Tuple[float, Corner]:
    """Maximum over device corners of chi_BE at the worst-case (t_min, xi_max)."""
    if not corners:
        raise DomainError("at least one device corner is required")
    worst = (-math.inf, corners[0])
    for eta_c, v_el_c in corners:
        bounds = worst_case_bounds(est, v_a, eta_c, v_el_c, fs.eps_pe)
        params = ProtocolParams(
            v_a=v_a,
            t=min(bounds.t_min, 1.0),
            xi=max(bounds.xi_max, 0.0),
            eta=eta_c,
            v_el=v_el_c,
        )
        chi = holevo_bound(params)
        if chi > worst[0]:
            worst = (chi, (eta_c, v_el_c))
    return worst


def finite_rate(
    est: ChannelEstimate,
    fs: FiniteSizeParams,
    corners: Sequence[Corner],
    beta: float,
    v_a: float,
    eta: Optional[float] = None,
    v_el: Optional[float] = None,
) -> FiniteRate:
    """Finite-size rate with its components. eta/v_el default to the central corner."""
    if eta is None or v_el is None:
        eta = float(np.mean([c[0] for c in corners]))
        v_el = float(np.mean([c[1] for c in corners]))
    gain = est.t_slope * est.t_slope
    snr_hat = gain * v_a / (1.0 + v_el + gain * est.xi_physical)
    i_ab = mutual_information(snr_hat)
    chi, corner = worst_case_chi(est, fs, corners, v_a)
    delta = delta_n(fs.n_key, fs.eps_bar, fs.eps_pa, fs.delta_constant)
    rate = fs.key_fraction * (beta * i_ab - chi - delta)
    return FiniteRate(i_ab=i_ab, chi_worst=chi, delta=delta, key_fraction=fs.key_fraction, rate=rate, worst_corner=corner)


def rate_finite(
    est: ChannelEstimate,
    fs: FiniteSizeParams,
    corners: Sequence[Corner],
    beta: float,
    v_a: float,
) -> float:
    """Finite-size secret bits per pulse entering post-processing."""
    return finite_rate(est, fs, corners, beta, v_a).rate


def _rate_at(
    xi: float,
    v_a: float,
    t: float,
    eta: float,
    v_el: float,
    beta: float,
    mode: Mode,
    fs: Optional[FiniteSizeParams],
    corners: Optional[Sequence[Corner]],
) -> float:
    params = ProtocolParams(v_a=v_a, t=t, xi=xi, eta=eta, v_el=v_el, beta=beta)
    if mode == "asymptotic":
        return rate_asymptotic(params)
    if fs is None:
        raise DomainError("finite mode needs FiniteSizeParams")
    est = expected_estimate(params, fs.m_pe)
    return finite_rate(est, fs, corners or [(eta, v_el)], beta, v_a, eta, v_el).rate


def optimal_va(
    t: float,
    eta: float,
    v_el: float,
    xi: float,
    beta: float,
    mode: Mode = "asymptotic",
    fs: Optional[FiniteSizeParams] = None,
    corners: Optional[Sequence[Corner]] = None,
) -> Tuple[float, float]:
    """(v_a, rate) maximising the selected rate over the allowed modulation range."""
    res = minimize_scalar(
        lambda va: -_rate_at(xi, va, t, eta, v_el, beta, mode, fs, corners),
        bounds=VA_RANGE,
        method="bounded",
        options={"xatol": 1e-4},
    )
    return float(res.x), float(-res.fun)


def xi_max_positive(
    t: float,
    eta: float,
    v_el: float,
    beta: float,
    v_a: Optional[float] = None,
    mode: Mode = "asymptotic",
    fs: Optional[FiniteSizeParams] = None,
    corners: Optional[Sequence[Corner]] = None,
    xtol: float = 1e-9,
    penalty: float = 0.0,
) -> float:
    """Largest excess noise with a positive rate; 0 when the rate is not positive at xi = 0.

    `penalty` (bits per symbol) is subtracted from the rate, which lets the
    asymptotic form draw the frontier a worst-case excess noise must stay below.
    """

    def rate(xi: float) -> float:
        if v_a is None:
            return optimal_va(t, eta, v_el, xi, beta, mode, fs, corners)[1] - penalty
        return _rate_at(xi, v_a, t, eta, v_el, beta, mode, fs, corners) - penalty

    if rate(0.0) <= 0:
        return 0.0
    hi = 0.01
    while rate(hi) > 0:
        hi *= 2.0
        if hi > 16.0:
            LOG.warning("rate still positive at xi=%.3g; returning bracket edge", hi)
            return hi
    return float(bisect(rate, 0.0, hi, xtol=xtol))


def va_for_snr(target_snr: float, t: float, xi: float, eta: float, v_el: float) -> float:
    gain = eta * t
    if gain <= 0:
        return math.inf
    return target_snr * (1.0 + v_el + gain * xi) / gain


def select_code_and_va(
    catalog: Iterable[CodeDescriptor],
    t_hat: float,
    xi_hat: float,
    eta: float,
    v_el: float,
    fs: Optional[FiniteSizeParams] = None,
    mode: Mode = "asymptotic",
    corners: Optional[Sequence[Corner]] = None,
    beta: float = 0.95,
) -> Tuple[CodeDescriptor, float]:
    """Pick the code (and the v_a that puts Bob's SNR on its threshold) with the highest key rate.

    Each candidate is scored with the configured rate function at its
    threshold: beta*I(snr_threshold) - chi, less the finite-size penalty and
    scaled by the key fraction in finite mode.
    """
    codes = list(catalog)
    if not codes:
        raise DomainError("code catalog is empty")
    xi = max(xi_hat, 0.0)
    best: Optional[Tuple[float, CodeDescriptor, float]] = None
    for code in codes:
        v_a = va_for_snr(code.snr_threshold, t_hat, xi, eta, v_el)
        if not VA_RANGE[0] <= v_a <= VA_RANGE[1]:
            LOG.debug("code %s needs v_a=%.3f, outside %s", code.code_id, v_a, VA_RANGE)
            continue
        params = ProtocolParams(v_a=v_a, t=t_hat, xi=xi, eta=eta, v_el=v_el)
        if mode == "asymptotic":
            value = beta * mutual_information(code.snr_threshold) - holevo_bound(params)
        else:
            if fs is None:
                raise DomainError("finite mode needs FiniteSizeParams")
            est = expected_estimate(params, fs.m_pe)
            chi, _ = worst_case_chi(est, fs, corners or [(eta, v_el)], v_a)
            value = fs.key_fraction * (
                beta * mutual_information(code.snr_threshold) - chi - delta_n(fs.n_key, fs.eps_bar, fs.eps_pa, fs.delta_constant)
            )
        LOG.debug("code %s: v_a=%.3f rate=%.6g", code.code_id, v_a, value)
        if best is None or value > best[0]:
            best = (value, code, v_a)
    if best is None:
        raise NoFeasibleCodeError(
            f"no code reachable with v_a in {VA_RANGE} at t={t_hat:.5g}, xi={xi:.4g}"
        )
    return best[1], best[2]


def parse_mode(label: str) -> Tuple[Mode, Optional[int]]:
    """'asymptotic' or 'finite(N)' -> (mode, N)."""
    label = label.strip().lower()
    if label == "asymptotic":
        return "asymptotic", None
    if label.startswith("finite(") and label.endswith(")"):
        try:
            n_total = int(float(label[7:-1]))
        except ValueError:
            n_total = 0
        if n_total > 0:
            return "finite", n_total
    raise DomainError(f"unknown security mode {label!r}")


def finite_column(n_total: int) -> str:
    """CSV column for a finite-size rate: rate_fin_1e9 for N = 10**9."""
    exp = round(math.log10(n_total))
    if 10 ** exp == n_total:
        return f"rate_fin_1e{exp}"
    return f"rate_fin_{n_total}"


def rate_sweep_row(
    distance_km: float,
    loss_db: float,
    t: float,
    eta: float,
    v_el: float,
    beta: float,
    xi: float,
    v_a: Optional[float] = None,
    modes: Sequence[str] = ("asymptotic", "finite(1e9)", "finite(1e8)"),
    corners: Optional[Sequence[Corner]] = None,
    pe_fraction: float = 0.5,
) -> dict:
    """One row of the rate-sweep CSV; modes not requested stay empty."""
    if v_a is None:
        v_a = optimal_va(t, eta, v_el, xi, beta)[0]
    params = ProtocolParams(v_a=v_a, t=t, xi=xi, eta=eta, v_el=v_el, beta=beta)
    s = snr(params)
    row = {
        "distance_km": distance_km,
        "loss_db": loss_db,
        "v_a": v_a,
        "snr": s,
        "i_ab": mutual_information(s),
        "chi_be": holevo_bound(params),
        "rate_asymptotic": None,
        "rate_fin_1e9": None,
        "rate_fin_1e8": None,
        "xi_assumed": xi,
    }
    for label in modes:
        mode, n_total = parse_mode(label)
        if mode == "asymptotic":
            row["rate_asymptotic"] = beta * row["i_ab"] - row["chi_be"]
            continue
        fs = FiniteSizeParams.from_block(n_total, pe_fraction)
        est = expected_estimate(params, fs.m_pe)
        try:
            value = finite_rate(est, fs, corners or [(eta, v_el)], beta, v_a, eta, v_el).rate
        except EstimationFailure:
            value = -math.inf
        row[finite_column(n_total)] = value
    return row


def ordering_violations(rows: Sequence[dict]) -> List[str]:
    """Distances where asymptotic >= finite(1e9) >= finite(1e8) does not hold."""
    bad = []
    for row in rows:
        chain = [row.get("rate_asymptotic"), row.get("rate_fin_1e9"), row.get("rate_fin_1e8")]
        chain = [v for v in chain if v is not None]
        if any(a < b for a, b in zip(chain, chain[1:])):
            bad.append(f"{row['distance_km']} km")
    return bad
