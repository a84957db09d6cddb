"""End-to-end sessions and the sweep drivers."""
import numpy as np
import pytest

from cvqkd.config import SessionConfig
from cvqkd.errors import ConfigError, DomainError
from cvqkd.keyrate import ordering_violations
from cvqkd.ldpc import load_catalog
from cvqkd.pipeline import (
    _split_lengths,
    frontier_rows,
    noise_sweep,
    privacy_amplify,
    rate_sweep,
    run_session,
    sweep_fields,
)
from cvqkd.privamp import read_sidecar
from cvqkd.reports import RATE_SWEEP_FIELDS


def short_link(**changes):
    values = dict(
        session_id="e2e", seed=11, loss_db=1.0, distance_km=None, pulses=200_000, block_pulses=100_000
    )
    values.update(changes)
    return SessionConfig(**values)


@pytest.fixture(scope="module")
def session(session_catalog, tmp_path_factory):
    out = tmp_path_factory.mktemp("out")
    cfg = short_link(output_dir=str(out))
    return run_session(cfg, load_catalog(session_catalog)), out


class TestSession:
    """A 1 dB link reconciled with a short rate-1/2 code"""

    def test_keys_agree(self, session):
        report, _ = session
        assert report.keys_match
        assert report.final_key_length > 0
        assert np.array_equal(report.alice_key, report.bob_key)

    def test_ledger_balances(self, session):
        report, _ = session
        ledger = report.ledger
        assert ledger.balanced()
        assert ledger.corrected > 0
        assert ledger.leak_ec == (report.frames_attempted - report.frames_failed) * (512 + 64)
        assert ledger.final == report.final_key_length

    def test_blocks(self, session):
        report, _ = session
        assert [t[:2] for t in report.code_trace] == [(0, "t050"), (1, "t050")]
        assert report.skipped_blocks == 0
        assert report.frames_attempted > 0
        assert all(1.0 <= t[2] <= 10.0 for t in report.code_trace)

    def test_classical_volume(self, session):
        report, _ = session
        c = report.classical
        assert c.syndromes == report.frames_attempted * 64
        assert c.verification == report.frames_attempted * 8
        assert c.total > c.mdr_messages > 0

    def test_outputs(self, session):
        report, out = session
        assert (out / "e2e_estimates.csv").read_text().splitlines()[0].startswith("block_id,m,t_hat")
        sidecar = read_sidecar(out / "e2e.key.txt")
        assert int(sidecar["l_out"]) == report.final_key_length
        assert int(sidecar["n_in"]) == report.ledger.corrected

    def test_report_dict(self, session):
        report, _ = session
        d = report.to_dict()
        assert d["keys_match"] is True
        assert d["modes"]["asymptotic"]["final_length"] == report.final_key_length
        assert len(d["estimates"]) == 2

    def test_throughput_from_final_key(self, session):
        report, _ = session
        mode = report.modes["asymptotic"]
        assert mode.bits_per_pulse == report.final_key_length / report.pulses
        assert mode.bits_per_second == pytest.approx(mode.bits_per_pulse * 1e6)
        assert mode.bits_per_pulse == report.realized_bits_per_pulse

    def test_projected_throughput(self, session):
        report, _ = session
        mode = report.modes["asymptotic"]
        expected = mode.rate_per_symbol * report.usable_fraction * (1.0 - report.fer) * 1e6
        assert mode.projected_bits_per_second == pytest.approx(expected)
        assert report.usable_fraction == 0.25

    def test_reproducible(self, session, session_catalog):
        report, _ = session
        again = run_session(short_link(), load_catalog(session_catalog))
        assert again.code_trace == report.code_trace
        assert np.array_equal(again.alice_key, report.alice_key)


class TestFiniteSizeSession:
    """Finite-size accounting on the blocks a session actually runs"""

    @pytest.fixture(scope="class")
    def report(self, session_catalog):
        cfg = short_link(security_modes=("asymptotic", "finite(100000)"))
        return run_session(cfg, load_catalog(session_catalog))

    def test_penalised_against_asymptotic(self, report):
        asym, fin = report.modes["asymptotic"], report.modes["finite(100000)"]
        assert fin.delta > 0
        assert fin.chi_per_symbol >= asym.chi_per_symbol
        assert fin.rate_per_symbol < asym.rate_per_symbol
        assert fin.final_length <= asym.final_length

    def test_realized_throughput(self, report):
        fin = report.modes["finite(100000)"]
        assert fin.bits_per_pulse == fin.final_length / report.pulses
        assert fin.bits_per_second == pytest.approx(fin.bits_per_pulse * 1e6)

    def test_key_fraction_not_charged_twice(self, report):
        fin = report.modes["finite(100000)"]
        asym = report.modes["asymptotic"]
        gap = asym.rate_per_symbol - fin.rate_per_symbol
        assert gap == pytest.approx(fin.chi_per_symbol - asym.chi_per_symbol + fin.delta)

    def test_block_size_must_match(self, session_catalog):
        with pytest.raises(ConfigError):
            run_session(short_link(security_modes=("finite(1e9)",)), load_catalog(session_catalog))
        with pytest.raises(ConfigError):
            run_session(short_link(security_modes=("asymptotic", "finite(200000)")), load_catalog(session_catalog))


class TestDegradedSessions:
    def test_block_too_small_is_skipped(self, session_catalog):
        report = run_session(short_link(pulses=3000, block_pulses=0), load_catalog(session_catalog))
        assert report.skipped_blocks == 1
        assert report.final_key_length == 0
        assert report.ledger.balanced()

    def test_no_feasible_code(self, session_catalog):
        report = run_session(short_link(loss_db=30.0), load_catalog(session_catalog))
        assert report.blocks == []
        assert report.no_feasible_code
        assert report.diagnostics and report.diagnostics[0].startswith("block 0")
        assert report.final_key_length == 0
        assert report.keys_match


class TestPrivacyAmplification:
    def test_split_lengths(self):
        parts = _split_lengths(1001, [400, 400, 250])
        assert sum(parts) == 1001
        assert max(parts) - min(parts) < 200
        assert _split_lengths(0, [5, 5]) == [0, 0]

    def test_chunks(self, rng):
        bits = rng.integers(0, 2, 5000, dtype=np.uint8)
        key = privacy_amplify(bits, 1234, seed=3, chunk=2000)
        assert key.size == 1234
        assert np.array_equal(key, privacy_amplify(bits.copy(), 1234, seed=3, chunk=2000))
        assert privacy_amplify(bits, 0, seed=3, chunk=2000).size == 0


class TestSweeps:
    def test_rate_sweep(self):
        rows = rate_sweep(SessionConfig(), [10.0, 50.0, 80.0])
        assert [r["distance_km"] for r in rows] == [10.0, 50.0, 80.0]
        assert ordering_violations(rows) == []
        assert rows[0]["rate_asymptotic"] > rows[1]["rate_asymptotic"] > rows[2]["rate_asymptotic"]

    def test_sweep_fields(self):
        fields = sweep_fields([{"distance_km": 1.0, "rate_fin_1e7": 0.1}])
        assert fields[: len(RATE_SWEEP_FIELDS)] == tuple(RATE_SWEEP_FIELDS)
        assert fields[-1] == "rate_fin_1e7"

    def test_unknown_mode(self):
        with pytest.raises(DomainError):
            rate_sweep(SessionConfig(), [10.0], modes=("soon",))

    def test_frontier(self):
        rows = frontier_rows(SessionConfig(), [25.0, 53.0, 80.5])
        xi = [r["xi_max"] for r in rows]
        assert xi[0] > xi[1] > xi[2] > 0

    def test_noise_sweep(self):
        rows = noise_sweep(SessionConfig(seed=3), [200_000, 10**9], 10)
        assert len(rows) == 20
        assert {r["block_size"] for r in rows} == {200_000, 10**9}
        big = [r for r in rows if r["block_size"] == 10**9]
        small = [r for r in rows if r["block_size"] == 200_000]
        assert np.std([r["xi_hat"] for r in big]) < np.std([r["xi_hat"] for r in small])
        assert all(r["xi_max"] > r["xi_hat"] for r in rows)

    def test_noise_sweep_repetitions(self):
        with pytest.raises(DomainError):
            noise_sweep(SessionConfig(), [10**6], 9)


@pytest.mark.slow
def test_shipped_catalog_session():
    report = run_session(SessionConfig(seed=5, distance_km=25.0, pulses=1_000_000))
    assert report.keys_match
    assert report.ledger.balanced()
    assert 3e3 <= report.modes["asymptotic"].bits_per_second <= 1e5
