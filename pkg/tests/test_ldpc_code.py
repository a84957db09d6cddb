"""Tests for parity-check matrices, the alist format and syndromes."""
import numpy as np
import pytest

from cvqkd.errors import CodeParseError, DomainError
from cvqkd.ldpc import SparseParityCheck, compute_syndrome, format_alist, load_code, parse_alist, save_code

HAMMING_H = np.array(
    [
        [1, 0, 1, 0, 1, 0, 1],
        [0, 1, 1, 0, 0, 1, 1],
        [0, 0, 0, 1, 1, 1, 1],
    ]
)


class TestAlist:
    """MacKay's alist format"""

    def test_hamming(self, hamming_alist):
        code = parse_alist(hamming_alist)
        assert (code.n, code.m_rows, code.k) == (7, 3, 4)
        assert np.array_equal(code.matrix().toarray(), HAMMING_H)
        assert code.var_degrees.tolist() == [1, 1, 2, 1, 2, 2, 3]

    def test_format_parses_back(self, small_code):
        again = parse_alist(format_alist(small_code))
        assert (again.matrix() != small_code.matrix()).nnz == 0

    def test_save_and_load(self, tmp_path, small_code):
        path = tmp_path / "nested" / "code.alist"
        save_code(small_code, path)
        assert np.array_equal(load_code(path).edge_var, small_code.edge_var)

    def test_duplicate_edge(self, hamming_alist):
        lines = hamming_alist.splitlines()
        lines[6] = "1 1 0"  # column 3 lists check 1 twice
        with pytest.raises(CodeParseError, match="duplicate") as info:
            parse_alist("\n".join(lines))
        assert info.value.line == 7

    def test_wrong_count(self, hamming_alist):
        lines = hamming_alist.splitlines()
        lines[2] = "1 1 2 1 2 2"
        with pytest.raises(CodeParseError) as info:
            parse_alist("\n".join(lines))
        assert info.value.line == 3

    def test_not_transposed(self, hamming_alist):
        lines = hamming_alist.splitlines()
        lines[-1] = "4 5 6 1"
        with pytest.raises(CodeParseError):
            parse_alist("\n".join(lines))

    def test_garbage(self):
        with pytest.raises(CodeParseError, match="line 1"):
            parse_alist("seven three\n")


class TestSparseParityCheck:
    def test_from_edges(self):
        checks, variables = np.nonzero(HAMMING_H)
        code = SparseParityCheck.from_edges(7, 3, checks[::-1], variables[::-1])
        assert np.array_equal(code.matrix().toarray(), HAMMING_H)
        assert code.check_vars(0).tolist() == [0, 2, 4, 6]
        assert sorted(code.var_checks(6).tolist()) == [0, 1, 2]
        assert code.rate == 4 / 7

    def test_duplicate_edge(self):
        with pytest.raises(DomainError, match="duplicate"):
            SparseParityCheck.from_edges(7, 3, [0, 0], [1, 1])

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            SparseParityCheck.from_edges(7, 3, [3], [0])

    def test_describe(self, hamming_alist):
        assert parse_alist(hamming_alist).describe().startswith("n=7 m=3 rate=0.57143 edges=12")


class TestSyndrome:
    def test_zero(self, small_code):
        assert not compute_syndrome(np.zeros(small_code.n, dtype=np.uint8), small_code).any()

    def test_matches_dense_product(self, small_code, rng):
        bits = rng.integers(0, 2, small_code.n, dtype=np.uint8)
        dense = small_code.matrix().toarray().astype(np.int64)
        assert np.array_equal(compute_syndrome(bits, small_code), dense @ bits % 2)

    def test_batch(self, small_code, rng):
        bits = rng.integers(0, 2, (4, small_code.n), dtype=np.uint8)
        batch = compute_syndrome(bits, small_code)
        assert batch.shape == (4, small_code.m_rows)
        assert np.array_equal(batch[2], compute_syndrome(bits[2], small_code))

    def test_length_mismatch(self, small_code):
        with pytest.raises(DomainError):
            compute_syndrome(np.zeros(small_code.n - 1), small_code)
