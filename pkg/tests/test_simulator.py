"""Tests for the pulse simulator: modulation, channel, detection and sifting."""
import math

import numpy as np
import pytest

from cvqkd.errors import DomainError
from cvqkd.frames import PHI_Q, ROLE_KEY, ROLE_PARAM_EST, ROLE_SHOT_NOISE
from cvqkd.model import ProtocolParams
from cvqkd.simulator import (
    CHUNK_SIZE,
    Fractions,
    ModulationGrid,
    channel_and_detect,
    generate_modulation,
    sift_and_partition,
)

LINK_53KM = dict(t=0.0871, eta=0.552, v_el=0.015, xi=0.005)


@pytest.fixture(scope="module")
def detected():
    params = ProtocolParams(v_a=3.59, **LINK_53KM)
    symbols = generate_modulation(10**6, 3.59, seed=11)
    return params, symbols, channel_and_detect(symbols, params, seed=12)


class TestModulation:
    """Truncated discrete Gaussian modulation"""

    def test_variance(self):
        x = generate_modulation(10**6, 3.59, ModulationGrid(7.0, 8), seed=3)
        assert x.shape == (10**6, 2)
        assert 3.55 <= x.var() <= 3.63

    def test_values_on_grid(self):
        grid = ModulationGrid(7.0, 8)
        x = generate_modulation(5000, 2.0, grid, seed=3)
        half = grid.truncation * math.sqrt(2.0)
        levels = (x + half) / grid.step(2.0)
        assert np.allclose(levels, np.round(levels), atol=1e-6)
        assert np.abs(x).max() <= half + 1e-12

    def test_continuous(self):
        x = generate_modulation(5000, 2.0, None, seed=3)
        assert np.unique(x).size == x.size

    def test_deterministic(self):
        a = generate_modulation(1000, 4.0, seed=5)
        assert np.array_equal(a, generate_modulation(1000, 4.0, seed=5))
        assert not np.array_equal(a, generate_modulation(1000, 4.0, seed=6))

    def test_chunks_are_independent_of_length(self):
        long = generate_modulation(CHUNK_SIZE + 10, 4.0, seed=5)
        assert np.array_equal(long[:CHUNK_SIZE], generate_modulation(CHUNK_SIZE, 4.0, seed=5))

    @pytest.mark.parametrize("n, v_a", [(0, 1.0), (10, 0.0)])
    def test_invalid(self, n, v_a):
        with pytest.raises(DomainError):
            generate_modulation(n, v_a)

    def test_invalid_grid(self):
        with pytest.raises(DomainError):
            ModulationGrid(truncation=3.0)


class TestChannel:
    """Lossy noisy channel followed by homodyne detection"""

    def test_pure_shot_noise(self):
        params = ProtocolParams(v_a=0.0, t=1.0, xi=0.0, eta=1.0, v_el=0.0)
        frames = channel_and_detect(np.zeros((10**5, 2)), params, seed=1, shot_noise_fraction=0.0)
        assert np.allclose(frames["bob_value"].var(), 1.0, atol=4.0 * math.sqrt(2e-5))

    def test_shot_noise_share(self, detected):
        _, _, frames = detected
        shot = frames["role"] == ROLE_SHOT_NOISE
        assert abs(shot.mean() - 0.5) < 4.0 * math.sqrt(0.25 / shot.size)
        assert np.all(frames["alice_q"][shot] == 0.0)

    def test_snr(self, detected):
        params, _, frames = detected
        signal = frames["role"] != ROLE_SHOT_NOISE
        noise = 1.0 + params.v_el + params.eta * params.t * params.xi
        empirical = frames["bob_value"][signal].var() / noise - 1.0
        assert np.allclose(empirical, 0.170, atol=0.008)

    def test_linear_model(self, detected):
        params, _, frames = detected
        signal = frames["role"] != ROLE_SHOT_NOISE
        x = np.where(frames["phi"] == PHI_Q, frames["alice_q"], frames["alice_p"])[signal]
        y = frames["bob_value"][signal]
        slope = np.dot(x, y) / np.dot(x, x)
        resid = y - slope * x
        sigma2 = 1.0 + params.v_el + params.eta * params.t * params.xi
        assert abs(slope - math.sqrt(params.eta * params.t)) < 4.0 * math.sqrt(sigma2 / np.dot(x, x))
        assert abs(resid.var() - sigma2) < 4.0 * sigma2 * math.sqrt(2.0 / y.size)

    def test_shot_noise_uncorrelated(self, detected):
        _, symbols, frames = detected
        shot = frames["role"] == ROLE_SHOT_NOISE
        r = np.corrcoef(symbols[shot, 0], frames["bob_value"][shot])[0, 1]
        assert abs(r) < 4.0 / math.sqrt(shot.sum())

    def test_indices(self, detected):
        _, _, frames = detected
        assert np.array_equal(frames["index"], np.arange(frames.size))

    def test_bad_symbols(self):
        params = ProtocolParams(v_a=1.0, **LINK_53KM)
        with pytest.raises(DomainError):
            channel_and_detect(np.zeros((10, 3)), params, seed=1)


class TestSifting:
    """Role assignment after quadrature disclosure"""

    def test_key_share(self, detected):
        _, _, frames = detected
        sift = sift_and_partition(frames, Fractions(), seed=4)
        n = frames.size
        assert abs(sift.key_index.size - 0.25 * n) < 4.0 * math.sqrt(n * 0.25 * 0.75)
        assert sift.key_index.size + sift.pe_index.size + sift.shot_noise_index.size == n

    def test_shot_noise_frames_keep_role(self, detected):
        _, _, frames = detected
        sift = sift_and_partition(frames, Fractions(), seed=4)
        assert np.array_equal(sift.shot_noise_index, np.flatnonzero(frames["role"] == ROLE_SHOT_NOISE))

    def test_all_key(self, detected):
        _, _, frames = detected
        sift = sift_and_partition(frames, Fractions(0.0, 0.0), seed=4)
        assert sift.pe_index.size == 0
        assert np.all(sift.frames["role"][frames["role"] != ROLE_SHOT_NOISE] == ROLE_KEY)

    def test_deterministic(self, detected):
        _, _, frames = detected
        a = sift_and_partition(frames, Fractions(), seed=4)
        b = sift_and_partition(frames, Fractions(), seed=4)
        assert np.array_equal(a.frames["role"], b.frames["role"])

    def test_pairs_use_measured_quadrature(self, detected):
        _, _, frames = detected
        sift = sift_and_partition(frames, Fractions(), seed=4)
        x, y = sift.pe_pairs()
        idx = sift.pe_index
        expected = np.where(frames["phi"][idx] == PHI_Q, frames["alice_q"][idx], frames["alice_p"][idx])
        assert np.array_equal(x, expected)
        assert np.array_equal(y, frames["bob_value"][idx])
        assert np.all(sift.frames["role"][idx] == ROLE_PARAM_EST)

    def test_invalid_fractions(self):
        with pytest.raises(DomainError):
            Fractions(1.5, 0.5)
