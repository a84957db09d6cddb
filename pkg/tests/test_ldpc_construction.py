"""Tests for degree profiles and progressive-edge-growth construction."""
import numpy as np
import pytest

from cvqkd.errors import DomainError
from cvqkd.keyrate import CodeDescriptor
from cvqkd.ldpc import PROFILES, MultiEdgeProfile, build_code


class TestProfiles:
    @pytest.mark.parametrize(
        "name, rate",
        [("regular-3-6", 0.5), ("irregular-0.50", 0.5), ("met-0.10", 0.1), ("met-0.05", 0.05)],
    )
    def test_design_rate(self, name, rate):
        assert np.allclose(PROFILES[name].design_rate, rate)

    @pytest.mark.parametrize("name", sorted(PROFILES))
    def test_sockets_balance(self, name):
        var_deg, chk_deg = PROFILES[name].node_degrees(1000)
        assert var_deg.shape[0] == 1000
        assert np.array_equal(var_deg.sum(axis=0), chk_deg.sum(axis=0))

    def test_unbalanced(self):
        with pytest.raises(DomainError, match="edge type"):
            MultiEdgeProfile(name="bad", variables=((1.0, {1: 3}),), checks=((0.5, {1: 5}),))

    def test_fractions_must_cover_all_variables(self):
        with pytest.raises(DomainError):
            MultiEdgeProfile(name="bad", variables=((0.9, {1: 3}),), checks=((0.45, {1: 6}),))


class TestBuild:
    """PEG placement of the edges"""

    def test_regular_code(self, small_code):
        assert small_code.n == 512 and small_code.m_rows == 256
        assert np.all(small_code.var_degrees == 3)
        assert np.all(small_code.check_degrees == 6)

    def test_deterministic(self, small_code):
        again = build_code(PROFILES["regular-3-6"], 512, seed=1)
        assert np.array_equal(again.edge_var, small_code.edge_var)
        other = build_code(PROFILES["regular-3-6"], 512, seed=2)
        assert not np.array_equal(other.edge_var, small_code.edge_var)

    def test_multi_edge_code(self):
        code = build_code(PROFILES["met-0.10"], 2000, seed=3)
        assert code.m_rows == 1800
        var_deg, chk_deg = PROFILES["met-0.10"].node_degrees(2000)
        assert np.array_equal(np.sort(code.var_degrees), np.sort(var_deg.sum(axis=1)))
        assert np.array_equal(np.sort(code.check_degrees), np.sort(chk_deg.sum(axis=1)))

    def test_metadata(self):
        desc = CodeDescriptor("t", 0.5, 1.5, 256)
        assert build_code(PROFILES["regular-3-6"], 256, metadata=desc).metadata is desc

    def test_too_short(self):
        with pytest.raises(DomainError):
            build_code(PROFILES["regular-3-6"], 32)
