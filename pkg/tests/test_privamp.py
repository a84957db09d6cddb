"""Tests for the final key length and Toeplitz hashing."""
import numpy as np
import pytest
from scipy.linalg import toeplitz

from cvqkd.errors import DomainError
from cvqkd.frames import load_bits
from cvqkd.privamp import (
    ToeplitzSeed,
    compute_final_length,
    read_sidecar,
    toeplitz_hash,
    toeplitz_multiply,
    write_key,
)


def naive_hash(bits, seed):
    d = seed.defining_bits().astype(np.int64)
    n, l_out = seed.n_in, seed.l_out
    matrix = toeplitz(d[n - 1:n - 1 + l_out], d[n - 1::-1])
    return (matrix @ bits.astype(np.int64) % 2).astype(np.uint8)


class TestFinalLength:
    def test_no_adversary(self):
        assert compute_final_length(10_000, 0, 0.0, 0.0, 12_000) == 10_000

    def test_formula(self):
        assert compute_final_length(10_000, 4_000, 0.25, 0.125, 8_000) == 3_000

    def test_clamped_at_zero(self):
        assert compute_final_length(1_000, 900, 0.5, 0.0, 1_000) == 0

    def test_negative_inputs(self):
        with pytest.raises(DomainError):
            compute_final_length(1_000, -1, 0.1, 0.0, 1_000)


class TestToeplitzHash:
    """Universal hashing with random Toeplitz matrices"""

    def test_matches_dense_matrix(self, rng):
        for s in range(5):
            bits = rng.integers(0, 2, 2**13, dtype=np.uint8)
            seed = ToeplitzSeed(s, 2**13, 2**10)
            assert np.array_equal(toeplitz_hash(bits, seed), naive_hash(bits, seed))

    def test_known_vector(self):
        d = np.array([1, 0, 1, 1, 0, 0], dtype=np.uint8)
        assert toeplitz_multiply(np.array([1, 0, 1, 1]), d, 3).tolist() == [0, 1, 0]
        assert toeplitz_multiply(np.array([1, 1, 0, 1]), d, 3).tolist() == [1, 1, 1]

    def test_defining_bits_length(self):
        with pytest.raises(DomainError):
            toeplitz_multiply(np.ones(4, dtype=np.uint8), np.ones(5, dtype=np.uint8), 3)

    def test_collisions_are_two_universal(self):
        a = np.zeros(16, dtype=np.uint8)
        b = a.copy()
        a[[2, 9]] = 1
        b[[2, 9, 15]] = 1
        trials, l_out = 4000, 4
        hits = sum(
            np.array_equal(toeplitz_hash(a, ToeplitzSeed(s, 16, l_out)), toeplitz_hash(b, ToeplitzSeed(s, 16, l_out)))
            for s in range(trials)
        )
        bound = 2.0**-l_out
        assert hits / trials <= bound + 3.0 * np.sqrt(bound * (1.0 - bound) / trials)
        assert hits > 0

    def test_segments_do_not_change_the_key(self, rng):
        bits = rng.integers(0, 2, 3000, dtype=np.uint8)
        seed = ToeplitzSeed(9, 3000, 700)
        assert np.array_equal(toeplitz_hash(bits, seed, segment_bits=256), toeplitz_hash(bits, seed))

    def test_linear(self, rng):
        a, b = rng.integers(0, 2, (2, 500), dtype=np.uint8)
        seed = ToeplitzSeed(4, 500, 120)
        assert np.array_equal(toeplitz_hash(a ^ b, seed), toeplitz_hash(a, seed) ^ toeplitz_hash(b, seed))

    def test_defining_bits_are_a_prefix_stream(self):
        short = ToeplitzSeed(77, 100, 10).defining_bits()
        long = ToeplitzSeed(77, 200, 10).defining_bits()
        assert np.array_equal(short, long[:short.size])
        assert not np.array_equal(short, ToeplitzSeed(78, 100, 10).defining_bits())

    def test_empty_output(self):
        assert toeplitz_hash(np.ones(10, dtype=np.uint8), ToeplitzSeed(1, 10, 0)).size == 0

    def test_output_longer_than_input(self):
        with pytest.raises(DomainError):
            ToeplitzSeed(1, 10, 11)

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            toeplitz_hash(np.ones(9, dtype=np.uint8), ToeplitzSeed(1, 10, 5))

    def test_non_binary(self):
        with pytest.raises(DomainError):
            toeplitz_hash(np.full(10, 2, dtype=np.uint8), ToeplitzSeed(1, 10, 5))


class TestKeyFile:
    def test_key_and_sidecar(self, tmp_path, rng):
        key = rng.integers(0, 2, 77, dtype=np.uint8)
        seed = ToeplitzSeed(5, 200, 77)
        sidecar = write_key(tmp_path / "s.key", key, "s", seed, {"leak_ec": 12})
        assert np.array_equal(load_bits(tmp_path / "s.key", 77), key)
        meta = read_sidecar(sidecar)
        assert meta["l_out"] == "77"
        assert meta["n_in"] == "200"
        assert meta["seed"] == "5"
        assert meta["leak_ec"] == "12"
