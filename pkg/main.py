#!/usr/bin/env python3
# main.py: command-line orchestrator for the cvqkd post-processing chain
# Quick use:
#   python main.py simulate --seed 1 --distance-km 25 --pulses 1e6
#   python main.py simulate --seed 1 --loss-db 1 --output-dir out --store
#   python main.py sweep-rates --seed 1 --distances 0:120:5 --out rates.csv --frontier frontier.csv
#   python main.py sweep-noise --seed 7 --distance-km 53 --block-sizes 1e6,1e8,1e9 --repetitions 10
#   python main.py codes list | inspect r050 | generate | measure r050 --snr 1.25 --trials 200 --seed 3
#   python main.py hash --seed 5 --input raw.bits --n-bits 100000 --l-out 20000 --output key.bin
#   python main.py decode --seed 1 --frames out/session_block0.frames --code r050 --v-a 8.7
#   python main.py runs --limit 5

import argparse
import dataclasses
import json
import logging
import pathlib
import sys

import numpy as np

from cvqkd.config import SessionConfig
from cvqkd.errors import (
    CodeParseError,
    ConfigError,
    CvqkdError,
    EstimationFailure,
    FrameFormatError,
    NoFeasibleCodeError,
)
from cvqkd.frames import ROLE_SHOT_NOISE, load_bits, load_frames
from cvqkd.ldpc import load_catalog, measure_efficiency
from cvqkd.pipeline import frontier_rows, noise_sweep, process_block, rate_sweep, run_session, sweep_fields
from cvqkd.privamp import ToeplitzSeed, toeplitz_hash, write_key
from cvqkd.randomness import STREAM_PRIVACY, derive_seed
from cvqkd.reports import FRONTIER_FIELDS, NOISE_SWEEP_FIELDS, write_csv

ROOT = pathlib.Path(__file__).resolve().parent
LOG = logging.getLogger("cvqkd")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_FORMAT = 3
EXIT_ESTIMATION = 4
EXIT_NO_CODE = 5

CONFIG_KEYS = {f.name for f in dataclasses.fields(SessionConfig)}


def _count(raw: str) -> int:
    """Integers, also written as 1e6."""
    value = float(raw)
    if value != int(value) or value < 0:
        raise argparse.ArgumentTypeError(f"{raw!r} is not a non-negative integer")
    return int(value)


def _floats(raw: str) -> tuple:
    return tuple(float(tok) for tok in raw.split(",") if tok.strip())


def _distances(raw: str) -> list:
    """'start:stop:step' (stop included) or a comma list."""
    if ":" in raw:
        start, stop, step = (float(tok) for tok in raw.split(":"))
        if step <= 0:
            raise argparse.ArgumentTypeError("step must be positive")
        return [round(float(d), 9) for d in np.arange(start, stop + step / 2, step)]
    return list(_floats(raw))


def _block_sizes(raw: str) -> list:
    return [_count(tok) for tok in raw.split(",") if tok.strip()]


def load_config(args) -> SessionConfig:
    """Defaults, then --config file, then CVQKD_* environment, then flags."""
    overrides = {k: v for k, v in vars(args).items() if k in CONFIG_KEYS and v is not None}
    if getattr(args, "modes_flag", None):
        overrides["security_modes"] = tuple(args.modes_flag)
    cfg = SessionConfig.load(args.config, overrides)
    catalog = pathlib.Path(cfg.catalog)
    if not catalog.is_absolute() and not catalog.exists() and (ROOT / catalog).exists():
        cfg = cfg.with_overrides(catalog=str(ROOT / catalog))
    return cfg


def _open_store(args):
    from db.data_access import Database

    return Database(dsn=args.dsn)


def _code(catalog, code_id: str):
    try:
        return catalog.entry(code_id)
    except KeyError:
        raise ConfigError(f"code: {code_id!r} is not in the catalog") from None


def simulate(args) -> int:
    cfg = load_config(args)
    report = run_session(cfg, frames_dir=args.frames_dir)
    summary = report.to_dict()
    if args.store:
        with _open_store(args) as db:
            from db.data_access import persist_session_report

            summary["run_id"] = persist_session_report(db, report)
    print(json.dumps(summary, indent=2))
    if not report.keys_match:
        return EXIT_ERROR
    if report.no_feasible_code and report.final_key_length == 0:
        LOG.error("no catalog code can be operated on this link")
        return EXIT_NO_CODE
    return EXIT_OK


def sweep_rates(args) -> int:
    cfg = load_config(args)
    rows = rate_sweep(cfg, args.distances, args.modes, xi=args.xi, v_a=args.v_a)
    write_csv(rows, sweep_fields(rows), args.out or sys.stdout)
    if args.frontier:
        write_csv(frontier_rows(cfg, args.distances), FRONTIER_FIELDS, args.frontier)
        LOG.info("wrote frontier to %s", args.frontier)
    if args.store:
        with _open_store(args) as db:
            from db.data_access import persist_rate_sweep

            persist_rate_sweep(db, rows)
    return EXIT_OK


def sweep_noise(args) -> int:
    cfg = load_config(args)
    rows = noise_sweep(cfg, args.block_sizes, args.repetitions, v_a=args.v_a)
    write_csv(rows, NOISE_SWEEP_FIELDS, args.out or sys.stdout)
    return EXIT_OK


def codes(args) -> int:
    cfg = load_config(args)
    catalog = load_catalog(cfg.catalog)
    if args.action == "list":
        for entry in catalog:
            d = entry.descriptor
            state = "present" if entry.path.exists() else f"missing (profile {entry.profile})"
            print(
                f"{d.code_id}\trate={d.rate:.3f}\tsnr={d.snr_threshold:.4f}\tbeta={d.efficiency:.4f}"
                f"\tn={d.block_len}\t{entry.path.name}: {state}"
            )
        return EXIT_OK
    if args.action == "inspect":
        entry = _code(catalog, args.code_id)
        print(f"{entry.code_id}: {catalog.code(entry.code_id).describe()}")
        return EXIT_OK
    if args.action == "generate":
        targets = [_code(catalog, c) for c in args.code_ids] if args.code_ids else list(catalog)
        for entry in targets:
            if entry.path.exists() and not args.force:
                LOG.info("%s already present at %s", entry.code_id, entry.path)
                continue
            entry.generate()
        return EXIT_OK
    # measure
    entry = _code(catalog, args.code_id)
    point = measure_efficiency(
        catalog.code(entry.code_id), None, args.snr, args.trials, seed=cfg.seed, max_iters=cfg.max_iters
    )
    print(json.dumps(dataclasses.asdict(point), indent=2))
    return EXIT_OK


def hash_bits(args) -> int:
    cfg = load_config(args)
    bits = load_bits(args.input, args.n_bits)
    seed = ToeplitzSeed(derive_seed(cfg.seed, STREAM_PRIVACY), bits.size, args.l_out)
    key = toeplitz_hash(bits, seed)
    sidecar = write_key(args.output, key, cfg.session_id, seed, {"source": pathlib.Path(args.input).name})
    LOG.info("wrote %d-bit key to %s (sidecar %s)", key.size, args.output, sidecar)
    return EXIT_OK


def decode(args) -> int:
    cfg = load_config(args)
    frames = load_frames(args.frames)
    catalog = load_catalog(cfg.catalog)
    entry = _code(catalog, args.code_id)
    v_a = args.v_a
    if v_a is None:
        signal = frames[frames["role"] != ROLE_SHOT_NOISE]
        v_a = float(np.mean(signal["alice_q"] ** 2 + signal["alice_p"] ** 2) / 2.0)
        LOG.info("modulation variance from frames: %.4f", v_a)
    outcome = process_block(frames, cfg, entry.descriptor, catalog.code(entry.code_id), v_a, args.block_id)
    rec = outcome.record
    if not outcome.usable:
        LOG.error("block %d unusable: %s", rec.block_id, rec.skipped)
        return EXIT_ESTIMATION
    fer = rec.frames_failed / rec.frames_attempted
    print(json.dumps({
        "block_id": rec.block_id,
        "code_id": rec.code_id,
        "effective_rate": rec.effective_rate,
        "snr_hat": rec.snr_hat,
        "frames_attempted": rec.frames_attempted,
        "frames_failed": rec.frames_failed,
        "fer": fer,
        "corrected_bits": int(outcome.alice_bits.size),
        "leak_ec": outcome.leak_ec,
        "classical_bytes": outcome.classical.total,
    }, indent=2))
    return EXIT_OK


def runs(args) -> int:
    from db.data_access import get_latest_session_runs

    with _open_store(args) as db:
        with db.connection() as conn:
            for run in get_latest_session_runs(conn, limit=args.limit):
                print(
                    f"{run.id}\t{run.session_id}\t{run.started_at}\t{run.distance_km}\t{run.pulses}"
                    f"\t{run.security_mode}\t{run.final_key_length}\t{run.fer:.4f}"
                )
    return EXIT_OK


def _session_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("session (override the config file)")
    where = g.add_mutually_exclusive_group()
    where.add_argument("--distance-km", type=float)
    where.add_argument("--loss-db", type=float)
    g.add_argument("--alpha-db-per-km", type=float)
    g.add_argument("--pulses", type=_count)
    g.add_argument("--block-pulses", type=_count)
    g.add_argument("--rep-rate", type=float)
    g.add_argument("--eta", type=float)
    g.add_argument("--v-el", type=float)
    g.add_argument("--delta-eta", type=float)
    g.add_argument("--delta-v-el", type=float)
    g.add_argument("--xi-true", type=float)
    g.add_argument("--xi-schedule", type=_floats)
    g.add_argument("--beta", type=float)
    g.add_argument("--catalog")
    g.add_argument("--eps-total", type=float)
    g.add_argument("--max-iters", type=_count)
    g.add_argument("--session-id")
    g.add_argument("--output-dir")


def parse_args(argv=None):
    p = argparse.ArgumentParser(description="CV-QKD post-processing: simulation, reconciliation, key rates")
    p.add_argument("--config", type=pathlib.Path, help="key = value configuration file")
    p.add_argument("--verbose", action="store_true", help="DEBUG logging")
    sub = p.add_subparsers(dest="cmd", required=True)

    sp_sim = sub.add_parser("simulate", help="Run a full simulated session")
    sp_sim.add_argument("--seed", type=_count, required=True)
    _session_flags(sp_sim)
    sp_sim.add_argument("--mode", dest="modes_flag", action="append", help="asymptotic or finite(N); repeatable")
    sp_sim.add_argument("--frames-dir", type=pathlib.Path, help="Save each block's detected frames here")
    sp_sim.add_argument("--store", action="store_true", help="Persist the report to PostgreSQL")
    sp_sim.add_argument("--dsn")
    sp_sim.set_defaults(func=simulate)

    sp_rates = sub.add_parser("sweep-rates", help="Key rate against distance (CSV)")
    sp_rates.add_argument("--seed", type=_count, required=True)
    _session_flags(sp_rates)
    sp_rates.add_argument("--distances", type=_distances, default=_distances("0:120:5"))
    sp_rates.add_argument("--modes", nargs="+", default=["asymptotic", "finite(1e9)", "finite(1e8)"])
    sp_rates.add_argument("--xi", type=float, help="Assumed excess noise (default: xi_true)")
    sp_rates.add_argument("--v-a", type=float, help="Fixed modulation variance (default: optimised per distance)")
    sp_rates.add_argument("--out", type=pathlib.Path)
    sp_rates.add_argument("--frontier", type=pathlib.Path, help="Also write the positive-key excess-noise frontier")
    sp_rates.add_argument("--store", action="store_true")
    sp_rates.add_argument("--dsn")
    sp_rates.set_defaults(func=sweep_rates)

    sp_noise = sub.add_parser("sweep-noise", help="Excess-noise estimates against the frontier (CSV)")
    sp_noise.add_argument("--seed", type=_count, required=True)
    _session_flags(sp_noise)
    sp_noise.add_argument("--block-sizes", type=_block_sizes, default=[10**6, 10**8, 10**9])
    sp_noise.add_argument("--repetitions", type=_count, default=10)
    sp_noise.add_argument("--v-a", type=float)
    sp_noise.add_argument("--out", type=pathlib.Path)
    sp_noise.set_defaults(func=sweep_noise)

    sp_codes = sub.add_parser("codes", help="Inspect, generate and measure catalog codes")
    sp_codes.add_argument("--catalog")
    codes_sub = sp_codes.add_subparsers(dest="action", required=True)
    codes_sub.add_parser("list")
    sp_inspect = codes_sub.add_parser("inspect")
    sp_inspect.add_argument("code_id")
    sp_gen = codes_sub.add_parser("generate")
    sp_gen.add_argument("code_ids", nargs="*")
    sp_gen.add_argument("--force", action="store_true")
    sp_measure = codes_sub.add_parser("measure")
    sp_measure.add_argument("code_id")
    sp_measure.add_argument("--snr", type=float, required=True)
    sp_measure.add_argument("--trials", type=_count, default=200)
    sp_measure.add_argument("--seed", type=_count, required=True)
    sp_codes.set_defaults(func=codes)

    sp_hash = sub.add_parser("hash", help="Toeplitz-hash a raw bit file")
    sp_hash.add_argument("--seed", type=_count, required=True)
    sp_hash.add_argument("--input", type=pathlib.Path, required=True)
    sp_hash.add_argument("--n-bits", type=_count)
    sp_hash.add_argument("--l-out", type=_count, required=True)
    sp_hash.add_argument("--output", type=pathlib.Path, required=True)
    sp_hash.add_argument("--session-id")
    sp_hash.set_defaults(func=hash_bits)

    sp_dec = sub.add_parser("decode", help="Estimate and reconcile a saved frame file")
    sp_dec.add_argument("--seed", type=_count, required=True)
    sp_dec.add_argument("--frames", type=pathlib.Path, required=True)
    sp_dec.add_argument("--code", dest="code_id", required=True)
    sp_dec.add_argument("--v-a", type=float)
    sp_dec.add_argument("--block-id", type=_count, default=0)
    sp_dec.add_argument("--catalog")
    sp_dec.set_defaults(func=decode)

    sp_runs = sub.add_parser("runs", help="List recent session runs from the store")
    sp_runs.add_argument("--limit", type=_count, default=10)
    sp_runs.add_argument("--dsn")
    sp_runs.set_defaults(func=runs)

    return p.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        LOG.error("configuration: %s", exc)
        return EXIT_CONFIG
    except (CodeParseError, FrameFormatError) as exc:
        LOG.error("format: %s", exc)
        return EXIT_FORMAT
    except EstimationFailure as exc:
        LOG.error("estimation: %s", exc)
        return EXIT_ESTIMATION
    except NoFeasibleCodeError as exc:
        LOG.error("no feasible code: %s", exc)
        return EXIT_NO_CODE
    except CvqkdError as exc:
        LOG.error("%s", exc)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
