"""Tests for shot-noise calibration, channel estimation and worst-case bounds."""
import math

import numpy as np
import pytest

from cvqkd.errors import DegenerateRegressorError, DomainError, EstimationFailure, InsufficientDataError
from cvqkd.estimation import (
    ChannelEstimate,
    device_corners,
    estimate_channel,
    estimate_shot_noise,
    estimation_rows,
    expected_estimate,
    normalize,
    sample_estimate,
    worst_case_bounds,
    z_quantile,
)
from cvqkd.model import DeviceUncertainty, ProtocolParams
from cvqkd.reports import ESTIMATION_FIELDS

T_53 = 0.0871


class TestShotNoise:
    def test_vacuum_frames(self, rng, device):
        _, v_el = device
        values = rng.normal(0.0, math.sqrt(1.0 + v_el), size=10**6)
        assert np.allclose(estimate_shot_noise(values, v_el), 1.0, atol=0.005)

    def test_scaling(self, rng, device):
        _, v_el = device
        values = rng.normal(0.0, 1.0, size=10**4)
        n0 = estimate_shot_noise(values, 0.0)
        assert np.allclose(estimate_shot_noise(2.0 * values, 0.0), 4.0 * n0)

    def test_too_few_frames(self, device):
        with pytest.raises(InsufficientDataError):
            estimate_shot_noise(np.ones(999), device[1])

    def test_zero_variance(self, device):
        with pytest.raises(InsufficientDataError):
            estimate_shot_noise(np.zeros(2000), device[1])

    def test_normalize(self):
        assert np.allclose(normalize(np.array([2.0, -4.0]), 4.0), [1.0, -2.0])


class TestChannelEstimate:
    """Maximum-likelihood estimators of the linear channel model"""

    def test_noiseless_line(self, rng, device):
        eta, v_el = device
        x = rng.normal(0.0, 2.0, size=1000)
        y = math.sqrt(eta * T_53) * x
        est = estimate_channel(x, y, 4.0, eta, v_el)
        assert np.allclose(est.t_hat, T_53, rtol=1e-12)
        assert est.sigma2_hat < 1e-20
        assert np.allclose(est.xi_hat, -(1.0 + v_el) / (eta * T_53))
        assert est.below_physical_floor
        assert est.xi_physical == 0.0

    def test_recovers_channel(self, rng, device):
        eta, v_el = device
        v_a, xi, m = 3.59, 0.005, 10**6
        gain = eta * T_53
        sigma2 = 1.0 + v_el + gain * xi
        x = rng.normal(0.0, math.sqrt(v_a), size=m)
        y = math.sqrt(gain) * x + rng.normal(0.0, math.sqrt(sigma2), size=m)
        est = estimate_channel(x, y, v_a, eta, v_el)
        # xi_hat spread: sqrt(2/m)*sigma2/gain
        spread = math.sqrt(2.0 / m) * sigma2 / gain
        assert abs(est.xi_hat - xi) < 4.0 * spread
        assert np.allclose(est.t_hat, T_53, rtol=0.02)
        assert est.m == m

    def test_independent_data(self, rng, device):
        eta, v_el = device
        m = 10**5
        x = rng.normal(0.0, 2.0, size=m)
        y = rng.normal(0.0, 1.0, size=m)
        est = estimate_channel(x, y, 4.0, eta, v_el)
        assert abs(est.t_slope) < 4.0 / math.sqrt(4.0 * m)

    def test_degenerate_regressor(self, device):
        with pytest.raises(DegenerateRegressorError):
            estimate_channel(np.zeros(10), np.ones(10), 4.0, *device)

    def test_too_few_pairs(self, device):
        with pytest.raises(InsufficientDataError):
            estimate_channel(np.ones(1), np.ones(1), 4.0, *device)

    def test_expected_estimate(self, device):
        eta, v_el = device
        est = expected_estimate(ProtocolParams(v_a=4.0, t=0.3, xi=0.01, eta=eta, v_el=v_el), 1000)
        assert np.allclose(est.t_slope ** 2, eta * 0.3)
        assert np.allclose(est.sigma2_hat, 1.0 + v_el + eta * 0.3 * 0.01)
        assert est.xi_hat == 0.01


class TestWorstCase:
    """Confidence bounds on transmittance and excess noise"""

    @pytest.mark.parametrize("eps, z, tol", [(0.5, 0.0, 1e-12), (0.025, 1.95996, 1e-4), (1e-10, 6.3613, 1e-3)])
    def test_quantile(self, eps, z, tol):
        assert np.allclose(z_quantile(eps), z, atol=tol)

    @pytest.mark.parametrize("eps", [0.0, 1.0, -0.1])
    def test_quantile_domain(self, eps):
        with pytest.raises(DomainError):
            z_quantile(eps)

    def test_bounds_are_pessimistic(self, device):
        eta, v_el = device
        est = expected_estimate(ProtocolParams(v_a=4.0, t=0.3, xi=0.01, eta=eta, v_el=v_el), 10**6)
        bounds = worst_case_bounds(est, 4.0, eta, v_el, 1e-10)
        assert bounds.t_min < est.t_hat
        assert bounds.xi_max > est.xi_hat
        assert bounds.sigma2_max > est.sigma2_hat

    def test_bounds_converge(self, device):
        eta, v_el = device
        est = expected_estimate(ProtocolParams(v_a=4.0, t=0.3, xi=0.01, eta=eta, v_el=v_el), 10**12)
        bounds = worst_case_bounds(est, 4.0, eta, v_el, 1e-10)
        assert bounds.xi_max - est.xi_hat < 1e-4

    def test_looser_eps_tightens_bounds(self, device):
        eta, v_el = device
        est = expected_estimate(ProtocolParams(v_a=4.0, t=0.3, xi=0.01, eta=eta, v_el=v_el), 10**5)
        strict = worst_case_bounds(est, 4.0, eta, v_el, 1e-10)
        loose = worst_case_bounds(est, 4.0, eta, v_el, 0.5)
        assert loose.xi_max < strict.xi_max
        assert loose.t_min > strict.t_min

    def test_failure_on_tiny_block(self, device):
        eta, v_el = device
        est = ChannelEstimate(t_slope=0.01, t_hat=0.01 ** 2 / eta, sigma2_hat=1.0, xi_hat=0.0, m=10)
        with pytest.raises(EstimationFailure):
            worst_case_bounds(est, 1.0, eta, v_el, 1e-10)

    def test_estimation_rows(self, device):
        eta, v_el = device
        est = expected_estimate(ProtocolParams(v_a=4.0, t=0.3, xi=0.01, eta=eta, v_el=v_el), 10**6)
        bounds = worst_case_bounds(est, 4.0, eta, v_el, 1e-10)
        (row,) = estimation_rows([(3, est, bounds)])
        assert tuple(row) == ESTIMATION_FIELDS
        assert row["block_id"] == 3


class TestCoverage:
    """Bounds hold with the advertised probability and shrink as 1/sqrt(m)"""

    def test_violation_rate(self, device):
        eta, v_el = device
        v_a, t, xi, m, eps = 4.0, 0.3, 0.01, 10_000, 0.05
        gain = eta * t
        sigma = math.sqrt(1.0 + v_el + gain * xi)
        rng = np.random.default_rng(2024)
        violations = 0
        trials = 1000
        for _ in range(trials // 250):
            x = rng.normal(0.0, math.sqrt(v_a), (250, m))
            y = math.sqrt(gain) * x + sigma * rng.standard_normal((250, m))
            for xr, yr in zip(x, y):
                bounds = worst_case_bounds(estimate_channel(xr, yr, v_a, eta, v_el), v_a, eta, v_el, eps)
                violations += bounds.t_min > t or bounds.xi_max < xi
        rate = violations / trials
        assert rate <= eps + 2.0 * math.sqrt(eps * (1.0 - eps) / trials)

    def test_gap_scales_with_block(self, device):
        eta, v_el = device
        params = ProtocolParams(v_a=4.0, t=0.3, xi=0.01, eta=eta, v_el=v_el)
        gaps = []
        for m in (10**6, 10**8):
            est = expected_estimate(params, m)
            gaps.append(worst_case_bounds(est, 4.0, eta, v_el, 1e-10).xi_max - est.xi_hat)
        assert gaps[0] / gaps[1] == pytest.approx(10.0, rel=0.05)


class TestDeviceCorners:
    def test_no_uncertainty(self, device):
        corners = device_corners(*device, DeviceUncertainty())
        assert len(corners) == 4
        assert len(set(corners)) == 1

    def test_calibration_box(self, device):
        corners = device_corners(*device, DeviceUncertainty(0.025, 0.002))
        expected = [(0.527, 0.013), (0.527, 0.017), (0.577, 0.013), (0.577, 0.017)]
        assert np.allclose(sorted(corners), expected)

    def test_eta_must_stay_positive(self):
        with pytest.raises(DomainError):
            device_corners(0.02, 0.015, DeviceUncertainty(0.025, 0.0))


class TestSampledEstimate:
    """Drawing estimators from their sampling distribution"""

    def test_matches_moments(self, device):
        eta, v_el = device
        params = ProtocolParams(v_a=3.59, t=T_53, xi=0.005, eta=eta, v_el=v_el)
        m = 10**5
        rng = np.random.default_rng(7)
        draws = [sample_estimate(params, m, rng) for _ in range(2000)]
        slopes = np.array([d.t_slope for d in draws])
        sigmas = np.array([d.sigma2_hat for d in draws])
        sigma2 = 1.0 + v_el + eta * T_53 * 0.005
        assert np.allclose(slopes.mean(), math.sqrt(eta * T_53), rtol=1e-3)
        assert np.allclose(slopes.std(), math.sqrt(sigma2 / (m * 3.59)), rtol=0.1)
        assert np.allclose(sigmas.mean(), sigma2 * (m - 1) / m, rtol=1e-3)

    def test_needs_pairs(self, device):
        eta, v_el = device
        with pytest.raises(InsufficientDataError):
            sample_estimate(ProtocolParams(v_a=1.0, t=0.5, xi=0.0, eta=eta, v_el=v_el), 1, np.random.default_rng(0))
