"""Tests for the flooding belief-propagation syndrome decoder."""
import numpy as np
import pytest

from cvqkd.errors import DomainError, FrameFormatError
from cvqkd.ldpc import (
    RateAdaptation,
    bp_decode,
    bp_decode_batch,
    compute_syndrome,
    parse_alist,
    read_llrs,
    write_llrs,
)


def awgn_llrs(u, sigma, rng):
    y = 1.0 - 2.0 * u + sigma * rng.standard_normal(u.shape)
    return 2.0 * y / sigma**2


class TestBeliefPropagation:
    """Syndrome decoding of Alice's soft information"""

    def test_noiseless(self, small_code, rng):
        u = rng.integers(0, 2, small_code.n, dtype=np.uint8)
        res = bp_decode(np.where(u, -50.0, 50.0), compute_syndrome(u, small_code), small_code)
        assert res.converged and res.syndrome_ok
        assert res.iterations == 0
        assert np.array_equal(res.bits, u)

    def test_corrects_noise(self, small_code, rng):
        u = rng.integers(0, 2, (20, small_code.n), dtype=np.uint8)
        llrs = awgn_llrs(u, 0.5, rng)
        assert np.any((llrs < 0) != u.astype(bool))
        results = bp_decode_batch(llrs, compute_syndrome(u, small_code), small_code)
        for res, frame in zip(results, u):
            assert res.converged and res.syndrome_ok
            assert np.array_equal(res.bits, frame)
        assert max(r.iterations for r in results) > 0

    def test_batch_matches_single(self, small_code, rng):
        u = rng.integers(0, 2, (3, small_code.n), dtype=np.uint8)
        llrs = awgn_llrs(u, 0.7, rng)
        syndromes = compute_syndrome(u, small_code)
        batch = bp_decode_batch(llrs, syndromes, small_code, max_iters=50)
        for b in range(3):
            single = bp_decode(llrs[b], syndromes[b], small_code, max_iters=50)
            assert np.array_equal(single.codeword, batch[b].codeword)
            assert single.iterations == batch[b].iterations

    def test_gives_up_without_information(self, small_code, rng):
        u = rng.integers(0, 2, small_code.n, dtype=np.uint8)
        syndrome = compute_syndrome(u, small_code)
        assert syndrome.any()
        res = bp_decode(np.zeros(small_code.n), syndrome, small_code, max_iters=7)
        assert not res.converged and not res.syndrome_ok
        assert res.iterations == 7

    def test_adapted_frame(self, small_code, rng):
        adaptation = RateAdaptation.from_counts(small_code, 20, 31, seed=5)
        u = rng.integers(0, 2, small_code.n, dtype=np.uint8)
        u[adaptation.shortened] = 0
        llrs = awgn_llrs(u, 0.5, rng)
        res = bp_decode(llrs, compute_syndrome(u, small_code), small_code, adaptation)
        assert res.converged
        assert res.bits.size == small_code.n - 31
        assert np.array_equal(res.bits, u[adaptation.key_positions])

    def test_deterministic(self, small_code, rng):
        u = rng.integers(0, 2, small_code.n, dtype=np.uint8)
        llrs = awgn_llrs(u, 0.8, rng)
        syndrome = compute_syndrome(u, small_code)
        a = bp_decode(llrs, syndrome, small_code)
        b = bp_decode(llrs, syndrome, small_code)
        assert np.array_equal(a.codeword, b.codeword) and a.iterations == b.iterations

    def test_nan(self, small_code):
        llrs = np.zeros(small_code.n)
        llrs[3] = np.nan
        with pytest.raises(DomainError):
            bp_decode(llrs, np.zeros(small_code.m_rows, dtype=np.uint8), small_code)

    def test_shapes(self, small_code):
        with pytest.raises(DomainError):
            bp_decode(np.zeros(small_code.n - 1), np.zeros(small_code.m_rows, dtype=np.uint8), small_code)
        with pytest.raises(DomainError):
            bp_decode(np.zeros(small_code.n), np.zeros(small_code.m_rows + 1, dtype=np.uint8), small_code)
        with pytest.raises(DomainError):
            bp_decode_batch(np.zeros((2, small_code.n)), np.zeros((3, small_code.m_rows), dtype=np.uint8), small_code)


def ml_decode(llrs, syndromes, code):
    """Exhaustive maximum-likelihood syndrome decoding; only for tiny codes."""
    words = (np.arange(2**code.n)[:, None] >> np.arange(code.n)) & 1
    weights = 1 << np.arange(code.m_rows)
    word_syndrome = compute_syndrome(words.astype(np.uint8), code) @ weights
    cosets = np.stack([words[word_syndrome == s] for s in range(2**code.m_rows)])
    candidates = cosets[syndromes @ weights]
    cost = np.einsum("fcj,fj->fc", candidates, llrs)
    return candidates[np.arange(len(llrs)), np.argmin(cost, axis=1)]


class TestAgainstMaximumLikelihood:
    """Belief propagation on the (7,4) Hamming code against exhaustive search"""

    def test_block_error_within_factor_two(self, hamming_alist):
        code = parse_alist(hamming_alist)
        rng = np.random.default_rng(77)
        u = rng.integers(0, 2, (10_000, code.n), dtype=np.uint8)
        llrs = awgn_llrs(u, 0.8, rng)
        syndromes = compute_syndrome(u, code)
        ml = ml_decode(llrs, syndromes.astype(np.int64), code)
        ml_fer = np.mean(np.any(ml != u, axis=1))
        results = bp_decode_batch(llrs, syndromes, code, max_iters=50)
        bp_fer = np.mean([not np.array_equal(r.bits, frame) for r, frame in zip(results, u)])
        assert 0.01 < ml_fer < 0.5
        assert ml_fer <= 1.05 * bp_fer + 0.005
        assert bp_fer <= 2.0 * ml_fer

    def test_ml_decoder_respects_syndrome(self, hamming_alist, rng):
        code = parse_alist(hamming_alist)
        u = rng.integers(0, 2, (50, code.n), dtype=np.uint8)
        syndromes = compute_syndrome(u, code)
        decoded = ml_decode(awgn_llrs(u, 0.8, rng), syndromes.astype(np.int64), code)
        assert np.array_equal(compute_syndrome(decoded.astype(np.uint8), code), syndromes)


class TestLlrFile:
    def test_frames(self, tmp_path, rng):
        llrs = rng.normal(size=(3, 16)).astype(np.float32)
        path = tmp_path / "alice.llr"
        assert write_llrs(path, llrs) == 3 * 16 * 4
        assert np.array_equal(read_llrs(path, 16), llrs.astype(np.float64))

    def test_partial_frame(self, tmp_path):
        path = tmp_path / "alice.llr"
        write_llrs(path, np.zeros(20))
        with pytest.raises(FrameFormatError):
            read_llrs(path, 16)
