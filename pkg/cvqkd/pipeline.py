"""Session orchestration: simulate, sift, estimate, select a code, reconcile, verify, amplify."""
from __future__ import annotations

import logging
import math
import pathlib
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from .config import SessionConfig
from .errors import ConfigError, DomainError, EstimationFailure, InsufficientDataError, NoFeasibleCodeError
from .estimation import (
    ChannelEstimate,
    WorstCaseBounds,
    device_corners,
    estimate_channel,
    estimate_shot_noise,
    estimation_rows,
    normalize,
    sample_estimate,
    worst_case_bounds,
)
from .frames import save_frames
from .keyrate import (
    CodeDescriptor,
    FiniteSizeParams,
    delta_n,
    holevo_bound,
    mutual_information,
    optimal_va,
    ordering_violations,
    parse_mode,
    rate_sweep_row,
    select_code_and_va,
    worst_case_chi,
    xi_max_positive,
)
from .ldpc import (
    HASH_BITS,
    Catalog,
    SparseParityCheck,
    adapt_rate,
    bp_decode_batch,
    build_frames,
    clamp_rate,
    hash_key,
    load_catalog,
    verify_blocks,
)
from .mdr import MESSAGE_BYTES
from .model import ProtocolParams, db_to_transmittance, km_to_db
from .privamp import ToeplitzSeed, compute_final_length, toeplitz_hash, write_key
from .randomness import (
    STREAM_ADAPTATION,
    STREAM_BLOCK,
    STREAM_BOB_BITS,
    STREAM_PRIVACY,
    derive_rng,
    derive_seed,
)
from .reports import ESTIMATION_FIELDS, RATE_SWEEP_FIELDS, write_csv
from .simulator import DRAWS_PER_PULSE, channel_and_detect, generate_modulation, sift_and_partition

LOG = logging.getLogger("cvqkd.pipeline")

MIN_REPETITIONS = 10
MIN_FINITE_KEY = 10_000
DIRECT_SIMULATION_MAX = 2_000_000


@dataclass
class BlockRecord:
    block_id: int
    code_id: str
    v_a: float
    xi_true: float
    pulses: int
    estimate: Optional[ChannelEstimate] = None
    bounds: Optional[WorstCaseBounds] = None
    effective_rate: float = 0.0
    snr_hat: float = 0.0
    frames_attempted: int = 0
    frames_failed: int = 0
    key_symbols: int = 0
    skipped: str = ""


@dataclass
class BitLedger:
    """attempted = discarded + corrected; corrected = final + leak + removed_by_pa.

    Leak larger than the corrected key is charged only up to the corrected length.
    """

    attempted: int = 0
    discarded: int = 0
    corrected: int = 0
    leak_ec: int = 0
    final: int = 0
    removed_by_pa: int = 0

    def balanced(self) -> bool:
        return (
            self.attempted == self.discarded + self.corrected
            and self.corrected == self.final + min(self.leak_ec, self.corrected) + self.removed_by_pa
        )


@dataclass
class ClassicalVolume:
    """Bytes Alice and Bob exchange over the authenticated channel."""

    sifting: int = 0
    parameter_estimation: int = 0
    mdr_messages: int = 0
    syndromes: int = 0
    verification: int = 0

    @property
    def total(self) -> int:
        return self.sifting + self.parameter_estimation + self.mdr_messages + self.syndromes + self.verification

    def add(self, other: "ClassicalVolume") -> None:
        for name in ("sifting", "parameter_estimation", "mdr_messages", "syndromes", "verification"):
            setattr(self, name, getattr(self, name) + getattr(other, name))


@dataclass
class BlockOutcome:
    """Everything one block contributes to the session."""

    record: BlockRecord
    n0_hat: float = 1.0
    n_key_values: int = 0
    key_bits_per_frame: int = 0
    leak_ec: int = 0
    alice_bits: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.uint8), repr=False)
    bob_bits: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.uint8), repr=False)
    classical: ClassicalVolume = field(default_factory=ClassicalVolume)

    @property
    def usable(self) -> bool:
        return not self.record.skipped


@dataclass
class ModeResult:
    """Key produced under one security mode.

    bits_per_pulse and bits_per_second come from the realized final length.
    projected_bits_per_second is rate_per_symbol * usable_fraction * (1 - FER) * rep_rate.
    """

    mode: str
    rate_per_symbol: float
    bits_per_pulse: float
    bits_per_second: float
    final_length: int
    chi_per_symbol: float
    delta: float
    projected_bits_per_second: float = math.nan


@dataclass
class SessionReport:
    session_id: str
    seed: int
    distance_km: float
    loss_db: float
    pulses: int
    blocks: List[BlockRecord] = field(default_factory=list)
    skipped_blocks: int = 0
    diagnostics: List[str] = field(default_factory=list)
    frames_attempted: int = 0
    frames_failed: int = 0
    usable_fraction: float = 0.25
    ledger: BitLedger = field(default_factory=BitLedger)
    classical: ClassicalVolume = field(default_factory=ClassicalVolume)
    modes: Dict[str, ModeResult] = field(default_factory=dict)
    primary_mode: str = "asymptotic"
    final_key_length: int = 0
    keys_match: bool = True
    no_feasible_code: bool = False
    alice_key: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.uint8), repr=False)
    bob_key: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.uint8), repr=False)

    @property
    def fer(self) -> float:
        return self.frames_failed / self.frames_attempted if self.frames_attempted else 0.0

    @property
    def code_trace(self) -> List[tuple]:
        return [(b.block_id, b.code_id, b.v_a) for b in self.blocks]

    @property
    def realized_bits_per_pulse(self) -> float:
        return self.final_key_length / self.pulses

    def estimation_rows(self) -> List[dict]:
        return estimation_rows([(b.block_id, b.estimate, b.bounds) for b in self.blocks if b.bounds is not None])

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "seed": self.seed,
            "distance_km": self.distance_km,
            "loss_db": self.loss_db,
            "pulses": self.pulses,
            "draws_per_pulse": DRAWS_PER_PULSE,
            "skipped_blocks": self.skipped_blocks,
            "diagnostics": list(self.diagnostics),
            "frames_attempted": self.frames_attempted,
            "frames_failed": self.frames_failed,
            "fer": self.fer,
            "usable_fraction": self.usable_fraction,
            "ledger": asdict(self.ledger),
            "classical_bytes": dict(asdict(self.classical), total=self.classical.total),
            "modes": {k: _json_safe(asdict(v)) for k, v in self.modes.items()},
            "primary_mode": self.primary_mode,
            "final_key_length": self.final_key_length,
            "realized_bits_per_pulse": self.realized_bits_per_pulse,
            "keys_match": self.keys_match,
            "no_feasible_code": self.no_feasible_code,
            "code_trace": [list(t) for t in self.code_trace],
            "estimates": self.estimation_rows(),
        }


def _json_safe(values: dict) -> dict:
    return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in values.items()}


def _block_sizes(cfg: SessionConfig) -> List[int]:
    size = cfg.block_pulses or cfg.pulses
    full, rest = divmod(cfg.pulses, size)
    return [size] * full + ([rest] if rest else [])


def _split_lengths(total: int, parts: Sequence[int]) -> List[int]:
    """Distribute `total` output bits over input chunks proportionally, summing exactly."""
    n = sum(parts)
    out, cum, prev = [], 0, 0
    for p in parts:
        cum += p
        cur = total * cum // n if n else 0
        out.append(cur - prev)
        prev = cur
    return out


def privacy_amplify(bits: np.ndarray, l_out: int, seed: int, chunk: int) -> np.ndarray:
    """Toeplitz-hash `bits` in chunks of at most `chunk` bits, each with its own derived seed."""
    if bits.size == 0 or l_out == 0:
        return np.zeros(0, dtype=np.uint8)
    bounds = [(a, min(a + chunk, bits.size)) for a in range(0, bits.size, chunk)]
    lengths = _split_lengths(l_out, [b - a for a, b in bounds])
    parts = []
    for i, ((a, b), l_i) in enumerate(zip(bounds, lengths)):
        ts = ToeplitzSeed(derive_seed(seed, STREAM_PRIVACY, i), b - a, l_i)
        parts.append(toeplitz_hash(bits[a:b], ts))
    return np.concatenate(parts)


def _skip(out: BlockOutcome, reason: str) -> BlockOutcome:
    out.record.skipped = reason
    LOG.warning("block %d skipped: %s", out.record.block_id, reason)
    return out


def process_block(
    frames: np.ndarray,
    cfg: SessionConfig,
    desc: CodeDescriptor,
    code: SparseParityCheck,
    v_a: float,
    block_id: int = 0,
    frame_offset: int = 0,
    xi_true: float = math.nan,
) -> BlockOutcome:
    """Sift, estimate, reconcile and verify one block of detected frames.

    Unusable blocks come back with `record.skipped` set instead of raising.
    """
    record = BlockRecord(block_id=block_id, code_id=desc.code_id, v_a=v_a, xi_true=xi_true, pulses=int(frames.shape[0]))
    out = BlockOutcome(record=record)
    sift = sift_and_partition(frames, cfg.fractions, derive_seed(cfg.seed, STREAM_BLOCK, block_id, 3))
    out.n_key_values = int(sift.key_index.size)
    out.classical.sifting = (int(sift.key_index.size + sift.pe_index.size) + 7) // 8

    try:
        if cfg.shot_noise_fraction > 0:
            out.n0_hat = estimate_shot_noise(sift.shot_noise_values(), cfg.v_el)
        x_pe, y_pe = sift.pe_pairs()
        est = estimate_channel(x_pe, normalize(y_pe, out.n0_hat), v_a, cfg.eta, cfg.v_el, out.n0_hat)
        bounds = worst_case_bounds(est, v_a, cfg.eta, cfg.v_el, cfg.eps_pe)
    except (EstimationFailure, InsufficientDataError, DomainError) as exc:
        return _skip(out, str(exc))
    out.classical.parameter_estimation = 16 * est.m
    record.estimate, record.bounds = est, bounds
    LOG.info(
        "block %d: m=%d t_hat=%.5f xi_hat=%.5f (t_min=%.5f, xi_max=%.5f)",
        block_id, est.m, est.t_hat, est.xi_hat, bounds.t_min, bounds.xi_max,
    )

    x_key, y_key = sift.key_pairs()
    y_key = normalize(y_key, out.n0_hat)
    record.snr_hat = est.t_slope ** 2 * v_a / est.sigma2_hat
    constant = int(round(cfg.adaptation_fraction * code.n))
    target = clamp_rate(code, desc.efficiency * mutual_information(record.snr_hat), constant)
    adaptation = adapt_rate(code, target, constant, seed=derive_seed(cfg.seed, STREAM_ADAPTATION, block_id))
    record.effective_rate = adaptation.effective_rate
    width = adaptation.mdr_blocks * 8
    n_frames = x_key.size // width
    if n_frames == 0:
        return _skip(out, f"{x_key.size} key values do not fill one {width}-value frame")

    used = n_frames * width
    batch = build_frames(
        code,
        adaptation,
        y_key[:used].reshape(n_frames, width),
        x_key[:used].reshape(n_frames, width),
        est.sigma2_hat,
        est.t_slope,
        derive_rng(cfg.seed, STREAM_BOB_BITS, block_id),
    )
    results = bp_decode_batch(batch.llrs, batch.syndromes, code, adaptation, cfg.max_iters, cfg.llr_clamp)
    key_pos = adaptation.key_positions
    alice, bob = [], []
    for f, res in enumerate(results):
        bob_f = batch.u[f, key_pos]
        if verify_blocks(res.bits, bob_f, hash_key(cfg.seed, frame_offset + f)):
            alice.append(res.bits)
            bob.append(bob_f)
        else:
            LOG.debug("block %d frame %d discarded (converged=%s)", block_id, f, res.converged)
    passed = len(alice)
    record.frames_attempted = n_frames
    record.frames_failed = n_frames - passed
    record.key_symbols = passed * adaptation.n_transmitted
    out.key_bits_per_frame = int(key_pos.size)
    out.leak_ec = passed * (code.m_rows + HASH_BITS)
    if alice:
        out.alice_bits = np.concatenate(alice)
        out.bob_bits = np.concatenate(bob)
    out.classical.mdr_messages = n_frames * adaptation.mdr_blocks * MESSAGE_BYTES
    out.classical.syndromes = n_frames * ((code.m_rows + 7) // 8)
    out.classical.verification = n_frames * (HASH_BITS // 8)
    if record.frames_failed:
        LOG.warning("block %d: %d of %d frames discarded", block_id, record.frames_failed, n_frames)
    return out


@dataclass
class _ModeAccumulator:
    """Symbol-weighted sums over verified symbols of one security mode."""

    eve_bits: float = 0.0
    delta_bits: float = 0.0
    rate_bits: float = 0.0
    symbols: int = 0
    feasible: bool = True

    def add(self, symbols: int, chi: float, delta: float, effective_rate: float) -> None:
        self.eve_bits += symbols * chi
        self.delta_bits += symbols * delta
        self.rate_bits += symbols * (effective_rate - chi - delta)
        self.symbols += symbols


def _charge_modes(cfg: SessionConfig, modes, acc, outcome: BlockOutcome, corners) -> None:
    record, est = outcome.record, outcome.record.estimate
    for label, mode in modes:
        a = acc[label]
        if mode == "asymptotic":
            params = ProtocolParams(
                v_a=record.v_a, t=min(est.t_hat, 1.0), xi=est.xi_physical, eta=cfg.eta, v_el=cfg.v_el
            )
            a.add(record.key_symbols, holevo_bound(params), 0.0, record.effective_rate)
            continue
        n_key = outcome.n_key_values
        if n_key < MIN_FINITE_KEY:
            a.feasible = False
            continue
        fs = FiniteSizeParams(
            n_total=n_key + est.m, n_key=n_key, eps_pe=cfg.eps_pe, eps_pa=cfg.eps_pa,
            eps_bar=cfg.eps_bar, eps_total=cfg.eps_total, delta_constant=cfg.delta_constant,
        )
        try:
            chi, _ = worst_case_chi(est, fs, corners, record.v_a)
        except EstimationFailure:
            a.feasible = False
            continue
        delta = delta_n(fs.n_key, fs.eps_bar, fs.eps_pa, fs.delta_constant)
        a.add(record.key_symbols, chi, delta, record.effective_rate)


def _session_modes(cfg: SessionConfig) -> List[tuple]:
    """(label, kind) per mode; finite(N) must name the session block size in pulses."""
    block = cfg.block_pulses or cfg.pulses
    modes = []
    for label in cfg.security_modes:
        kind, n_total = parse_mode(label)
        if kind == "finite" and n_total != block:
            raise ConfigError(
                f"{label}: a session block holds {block} pulses; use finite({block}) or run sweep-rates for other N"
            )
        modes.append((label, kind))
    return modes


def run_session(
    cfg: SessionConfig,
    catalog: Optional[Catalog] = None,
    frames_dir: Optional[Union[str, pathlib.Path]] = None,
) -> SessionReport:
    """Run a full simulated session and return its report.

    No feasible code ends the session early with whatever key was already
    verified; a block whose estimation fails is skipped and counted. With
    `frames_dir` each block's detected frames are saved there. A finite(N)
    mode whose N is not the block size raises ConfigError.
    """
    catalog = catalog if catalog is not None else load_catalog(cfg.catalog)
    corners = device_corners(cfg.eta, cfg.v_el, cfg.uncertainty)
    modes = _session_modes(cfg)
    acc = {label: _ModeAccumulator() for label, _ in modes}
    report = SessionReport(
        session_id=cfg.session_id,
        seed=cfg.seed,
        distance_km=cfg.distance,
        loss_db=cfg.loss,
        pulses=cfg.pulses,
        usable_fraction=cfg.fractions.key,
        primary_mode=cfg.security_modes[0],
    )
    LOG.info(
        "session %s: %.2f dB (T=%.5f), %d pulses, modes %s",
        cfg.session_id, cfg.loss, cfg.transmittance, cfg.pulses, ",".join(cfg.security_modes),
    )
    if frames_dir is not None:
        frames_dir = pathlib.Path(frames_dir)
        frames_dir.mkdir(parents=True, exist_ok=True)

    alice_bits: List[np.ndarray] = []
    bob_bits: List[np.ndarray] = []
    t_prev, xi_prev = cfg.transmittance, 0.0
    frame_offset = 0

    for b, n_block in enumerate(_block_sizes(cfg)):
        xi_b = cfg.xi_for_block(b)
        try:
            desc, v_a = select_code_and_va(catalog.descriptors, t_prev, xi_prev, cfg.eta, cfg.v_el, beta=cfg.beta)
        except NoFeasibleCodeError as exc:
            msg = f"block {b}: {exc}"
            LOG.warning("%s; ending session", msg)
            report.diagnostics.append(msg)
            report.no_feasible_code = True
            break
        code = catalog.code(desc.code_id)
        LOG.info("block %d: code %s, v_a=%.4f, xi_true=%.4g", b, desc.code_id, v_a, xi_b)

        symbols = generate_modulation(n_block, v_a, cfg.grid, seed=derive_seed(cfg.seed, STREAM_BLOCK, b, 1))
        frames = channel_and_detect(
            symbols, cfg.channel(v_a, xi_b), derive_seed(cfg.seed, STREAM_BLOCK, b, 2), cfg.shot_noise_fraction
        )
        if frames_dir is not None:
            save_frames(frames_dir / f"{cfg.session_id}_block{b}.frames", frames)

        outcome = process_block(frames, cfg, desc, code, v_a, b, frame_offset, xi_b)
        record = outcome.record
        report.blocks.append(record)
        report.classical.add(outcome.classical)
        if not outcome.usable:
            report.skipped_blocks += 1
            continue
        frame_offset += record.frames_attempted
        t_prev, xi_prev = min(record.estimate.t_hat, 1.0), record.estimate.xi_physical

        n_bits = outcome.key_bits_per_frame
        report.frames_attempted += record.frames_attempted
        report.frames_failed += record.frames_failed
        report.ledger.attempted += record.frames_attempted * n_bits
        report.ledger.discarded += record.frames_failed * n_bits
        report.ledger.corrected += outcome.alice_bits.size
        report.ledger.leak_ec += outcome.leak_ec
        alice_bits.append(outcome.alice_bits)
        bob_bits.append(outcome.bob_bits)
        _charge_modes(cfg, modes, acc, outcome, corners)

    alice_all = np.concatenate(alice_bits) if alice_bits else np.zeros(0, dtype=np.uint8)
    bob_all = np.concatenate(bob_bits) if bob_bits else np.zeros(0, dtype=np.uint8)
    n_corrected = int(alice_all.size)

    for label, _ in modes:
        a = acc[label]
        if a.feasible and a.symbols:
            chi = a.eve_bits / a.symbols
            delta = a.delta_bits / a.symbols
            final = compute_final_length(n_corrected, report.ledger.leak_ec, chi, delta, a.symbols)
            rate_symbol = a.rate_bits / a.symbols
            projected = rate_symbol * report.usable_fraction * (1.0 - report.fer) * cfg.rep_rate
        else:
            chi, delta, final, rate_symbol, projected = math.nan, math.nan, 0, math.nan, 0.0
            if not a.feasible:
                report.diagnostics.append(f"{label}: key block below {MIN_FINITE_KEY} symbols or bounds unusable")
        report.modes[label] = ModeResult(
            mode=label,
            rate_per_symbol=rate_symbol,
            bits_per_pulse=final / cfg.pulses,
            bits_per_second=final / cfg.pulses * cfg.rep_rate,
            final_length=final,
            chi_per_symbol=chi,
            delta=delta,
            projected_bits_per_second=projected,
        )

    l_out = report.modes[report.primary_mode].final_length
    pa_seed = derive_seed(cfg.seed, STREAM_PRIVACY)
    report.alice_key = privacy_amplify(alice_all, l_out, pa_seed, cfg.pa_block_bits)
    report.bob_key = privacy_amplify(bob_all, l_out, pa_seed, cfg.pa_block_bits)
    report.keys_match = bool(np.array_equal(report.alice_key, report.bob_key))
    report.final_key_length = int(report.alice_key.size)
    report.ledger.final = report.final_key_length
    report.ledger.removed_by_pa = n_corrected - report.final_key_length - min(report.ledger.leak_ec, n_corrected)
    if not report.keys_match:
        report.diagnostics.append("final keys differ")
        LOG.warning("session %s: Alice's and Bob's final keys differ", cfg.session_id)
    LOG.info(
        "session %s: FER=%.3f, %d corrected bits, leak %d, final key %d bits (%s)",
        cfg.session_id, report.fer, n_corrected, report.ledger.leak_ec, report.final_key_length, report.primary_mode,
    )

    if cfg.output_dir:
        out = pathlib.Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(report.estimation_rows(), ESTIMATION_FIELDS, out / f"{cfg.session_id}_estimates.csv")
        if report.final_key_length:
            write_key(
                out / f"{cfg.session_id}.key",
                report.alice_key,
                cfg.session_id,
                ToeplitzSeed(pa_seed, n_corrected, report.final_key_length),
                {"n_corrected": n_corrected, "leak_ec": report.ledger.leak_ec, "mode": report.primary_mode},
            )
    return report


def rate_sweep(
    cfg: SessionConfig,
    distances: Sequence[float],
    modes: Sequence[str] = ("asymptotic", "finite(1e9)", "finite(1e8)"),
    xi: Optional[float] = None,
    v_a: Optional[float] = None,
) -> List[dict]:
    """Rate-sweep rows over distances; warns when the mode ordering is violated."""
    xi = cfg.xi_true if xi is None else xi
    for label in modes:
        parse_mode(label)
    corners = device_corners(cfg.eta, cfg.v_el, cfg.uncertainty)
    rows = []
    for d in distances:
        loss = km_to_db(d, cfg.alpha_db_per_km)
        row = rate_sweep_row(
            d, loss, db_to_transmittance(loss), cfg.eta, cfg.v_el, cfg.beta, xi,
            v_a=v_a, modes=modes, corners=corners, pe_fraction=cfg.pe_fraction,
        )
        LOG.info("sweep %.1f km: v_a=%.3f asymptotic=%s", d, row["v_a"], row["rate_asymptotic"])
        rows.append(row)
    bad = ordering_violations(rows)
    if bad:
        LOG.warning("rate ordering asymptotic >= finite(1e9) >= finite(1e8) violated at %s", ", ".join(bad))
    return rows


def sweep_fields(rows: Sequence[dict]) -> tuple:
    """Rate-sweep header plus any extra finite-size columns present in rows."""
    extra = sorted({k for r in rows for k in r} - set(RATE_SWEEP_FIELDS))
    return tuple(RATE_SWEEP_FIELDS) + tuple(extra)


def frontier_rows(cfg: SessionConfig, distances: Sequence[float], mode: str = "asymptotic") -> List[dict]:
    """Largest excess noise with a positive key at each distance, v_a optimised."""
    kind, n_total = parse_mode(mode)
    fs = cfg.finite_params(n_total) if kind == "finite" else None
    rows = []
    for d in distances:
        t = db_to_transmittance(km_to_db(d, cfg.alpha_db_per_km))
        rows.append({"distance_km": d, "xi_max": xi_max_positive(t, cfg.eta, cfg.v_el, cfg.beta, None, kind, fs)})
    return rows


def noise_sweep(
    cfg: SessionConfig,
    block_sizes: Sequence[int],
    repetitions: int,
    v_a: Optional[float] = None,
) -> List[dict]:
    """Excess-noise scatter: measured and worst-case points per block against the positive-key frontier.

    Blocks up to DIRECT_SIMULATION_MAX pulses are simulated pulse by pulse;
    larger ones draw the estimators from their exact sampling distribution.
    """
    if repetitions < MIN_REPETITIONS:
        raise DomainError(f"need at least {MIN_REPETITIONS} repetitions (got {repetitions})")
    t = cfg.transmittance
    if v_a is None:
        v_a = optimal_va(t, cfg.eta, cfg.v_el, cfg.xi_true, cfg.beta)[0]
    params = cfg.channel(v_a, cfg.xi_true)
    rows = []
    for n_total in block_sizes:
        fs = cfg.finite_params(n_total)
        m = int(round(n_total * (1.0 - cfg.shot_noise_fraction) * cfg.pe_fraction))
        penalty = delta_n(fs.n_key, fs.eps_bar, fs.eps_pa, fs.delta_constant)
        frontier = xi_max_positive(t, cfg.eta, cfg.v_el, cfg.beta, v_a, "asymptotic", penalty=penalty)
        LOG.info("block size %d: m=%d, frontier xi=%.5f", n_total, m, frontier)
        for r in range(repetitions):
            seeds = [derive_seed(cfg.seed, STREAM_BLOCK, n_total, r, k) for k in range(4)]
            try:
                if n_total <= DIRECT_SIMULATION_MAX:
                    symbols = generate_modulation(n_total, v_a, cfg.grid, seeds[0])
                    frames = channel_and_detect(symbols, params, seeds[1], cfg.shot_noise_fraction)
                    sift = sift_and_partition(frames, cfg.fractions, seeds[2])
                    est = estimate_channel(*sift.pe_pairs(), v_a, cfg.eta, cfg.v_el)
                else:
                    est = sample_estimate(params, m, derive_rng(seeds[3]))
                bounds = worst_case_bounds(est, v_a, cfg.eta, cfg.v_el, cfg.eps_pe)
            except (EstimationFailure, InsufficientDataError) as exc:
                LOG.warning("block size %d rep %d: %s", n_total, r, exc)
                continue
            row = estimation_rows([(r, est, bounds)])[0]
            row.update(
                block_size=n_total,
                repetition=r,
                xi_frontier=frontier,
                positive_key=bounds.xi_max <= frontier,
            )
            rows.append(row)
    return rows


__all__ = [
    "BitLedger",
    "BlockOutcome",
    "BlockRecord",
    "ClassicalVolume",
    "ModeResult",
    "SessionReport",
    "process_block",
    "privacy_amplify",
    "run_session",
    "rate_sweep",
    "noise_sweep",
    "frontier_rows",
    "sweep_fields",
]
