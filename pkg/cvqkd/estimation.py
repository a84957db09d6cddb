"""Parameter estimation: shot noise, channel estimators and finite-size worst cases."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.stats import norm

from .errors import (
    DegenerateRegressorError,
    DomainError,
    EstimationFailure,
    InsufficientDataError,
)
from .model import DeviceUncertainty, ProtocolParams

LOG = logging.getLogger("cvqkd.estimation")

MIN_SHOT_NOISE_FRAMES = 1000


@dataclass(frozen=True)
class ChannelEstimate:
    """Point estimates from m disclosed pairs. xi_hat may be negative."""

    t_slope: float
    t_hat: float
    sigma2_hat: float
    xi_hat: float
    m: int
    n0_hat: float = 1.0

    @property
    def below_physical_floor(self) -> bool:
        return self.xi_hat < 0

    @property
    def xi_physical(self) -> float:
        return max(self.xi_hat, 0.0)


@dataclass(frozen=True)
class WorstCaseBounds:
    t_min: float
    xi_max: float
    eps_pe: float
    t_slope_min: float
    sigma2_max: float


def estimate_shot_noise(values: np.ndarray, v_el: float) -> float:
    """Shot-noise variance from signal-free frames, using the calibrated electronic noise."""
    values = np.asarray(values, dtype=np.float64)
    if values.size < MIN_SHOT_NOISE_FRAMES:
        raise InsufficientDataError(
            f"shot-noise estimation needs >= {MIN_SHOT_NOISE_FRAMES} frames (got {values.size})"
        )
    n0 = float(np.var(values, ddof=1)) - v_el
    if n0 <= 0:
        raise InsufficientDataError(f"unphysical shot-noise estimate {n0:.6g} SNU")
    return n0


def normalize(values: np.ndarray, n0_hat: float) -> np.ndarray:
    """Express raw detector values in units where the shot noise is 1."""
    return np.asarray(values, dtype=np.float64) / math.sqrt(n0_hat)


def estimate_channel(
    x: np.ndarray,
    y: np.ndarray,
    v_a: float,
    eta: float,
    v_el: float,
    n0_hat: float = 1.0,
) -> ChannelEstimate:
    """Maximum-likelihood estimators of the linear model y = t_slope*x + z."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    m = x.size
    if m < 2 or y.size != m:
        raise InsufficientDataError(f"need >= 2 matched pairs (got {m}, {y.size})")
    sxx = float(np.dot(x, x))
    if sxx == 0.0:
        raise DegenerateRegressorError("sum of x^2 is zero")
    LOG.debug("PE block m=%d: sample modulation variance %.4f (nominal %.4f)", m, sxx / m, v_a)
    t_slope = float(np.dot(x, y)) / sxx
    resid = y - t_slope * x
    sigma2 = float(np.dot(resid, resid)) / m
    t_hat = t_slope * t_slope / eta
    gain = eta * t_hat
    xi_hat = (sigma2 - 1.0 - v_el) / gain if gain > 0 else math.inf
    est = ChannelEstimate(t_slope=t_slope, t_hat=t_hat, sigma2_hat=sigma2, xi_hat=xi_hat, m=m, n0_hat=n0_hat)
    if est.below_physical_floor:
        LOG.debug("excess-noise estimate below physical floor: %.6g", xi_hat)
    return est


def expected_estimate(params: ProtocolParams, m: int) -> ChannelEstimate:
    """Estimate a block of m pairs yields in expectation (no sampling)."""
    gain = params.eta * params.t
    return ChannelEstimate(
        t_slope=math.sqrt(gain),
        t_hat=params.t,
        sigma2_hat=1.0 + params.v_el + gain * params.xi,
        xi_hat=params.xi,
        m=int(m),
    )


def z_quantile(eps: float) -> float:
    """z with 1 - Phi(z) = eps."""
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1) (got {eps})")
    return float(norm.isf(eps))


def worst_case_bounds(
    est: ChannelEstimate,
    v_a: float,
    eta: float,
    v_el: float,
    eps_pe: float,
) -> WorstCaseBounds:
    """Key-rate-pessimal corner (t_min, xi_max); each estimator gets eps_pe/2."""
    if not 0.0 < eps_pe < 1.0:
        raise DomainError(f"eps_pe must lie in (0, 1) (got {eps_pe})")
    if est.m < 2 or v_a <= 0:
        raise DomainError("worst-case bounds need m >= 2 and v_a > 0")
    z = z_quantile(eps_pe / 2.0)
    t_slope_min = est.t_slope - z * math.sqrt(est.sigma2_hat / (est.m * v_a))
    if t_slope_min <= 0:
        raise EstimationFailure(f"transmittance lower bound not positive (slope bound {t_slope_min:.6g})")
    sigma2_max = est.sigma2_hat * (1.0 + z * math.sqrt(2.0 / est.m))
    t_min = t_slope_min * t_slope_min / eta
    xi_max = (sigma2_max - 1.0 - v_el) / (eta * t_min)
    return WorstCaseBounds(
        t_min=t_min,
        xi_max=xi_max,
        eps_pe=eps_pe,
        t_slope_min=t_slope_min,
        sigma2_max=sigma2_max,
    )


def device_corners(eta: float, v_el: float, unc: DeviceUncertainty) -> List[Tuple[float, float]]:
    """The four (eta, v_el) corners of the calibration box."""
    if eta - unc.delta_eta <= 0:
        raise DomainError("eta - delta_eta must stay positive")
    etas = (eta - unc.delta_eta, min(eta + unc.delta_eta, 1.0))
    v_els = (max(v_el - unc.delta_v_el, 0.0), v_el + unc.delta_v_el)
    return [(e, v) for e in etas for v in v_els]


def estimation_rows(
    estimates: Sequence[Tuple[int, ChannelEstimate, WorstCaseBounds]],
) -> List[dict]:
    """Rows of the estimation CSV schema."""
    return [
        {
            "block_id": block_id,
            "m": est.m,
            "t_hat": est.t_hat,
            "sigma2_hat": est.sigma2_hat,
            "xi_hat": est.xi_hat,
            "t_min": bounds.t_min,
            "xi_max": bounds.xi_max,
            "eps_pe": bounds.eps_pe,
        }
        for block_id, est, bounds in estimates
    ]


def sample_estimate(params: ProtocolParams, m: int, rng: np.random.Generator) -> ChannelEstimate:
    """Draw the estimators of an m-pair block from their exact sampling distribution.

    For Gaussian x of variance v_a and y = a*x + z, sum(x^2) is v_a*chi2(m);
    given x the slope error is Gaussian with variance sigma^2/sum(x^2), and
    the residual sum of squares is sigma^2*chi2(m - 1). Cost is independent of m.
    """
    if m < 2:
        raise InsufficientDataError(f"need >= 2 pairs (got {m})")
    gain = params.eta * params.t
    sigma2 = 1.0 + params.v_el + gain * params.xi
    sxx = params.v_a * rng.chisquare(m)
    t_slope = math.sqrt(gain) + math.sqrt(sigma2 / sxx) * rng.standard_normal()
    sigma2_hat = sigma2 * rng.chisquare(m - 1) / m
    t_hat = t_slope * t_slope / params.eta
    xi_hat = (sigma2_hat - 1.0 - params.v_el) / (params.eta * t_hat) if t_hat > 0 else math.inf
    return ChannelEstimate(t_slope=t_slope, t_hat=t_hat, sigma2_hat=sigma2_hat, xi_hat=xi_hat, m=int(m))
