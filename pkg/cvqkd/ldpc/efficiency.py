"""Monte Carlo operating point (efficiency, frame error rate) of a code on the MDR channel."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import DomainError
from ..keyrate import mutual_information
from ..randomness import STREAM_BLOCK, derive_rng
from .adaptation import RateAdaptation, build_frames
from .code import SparseParityCheck
from .decoder import MAX_ITERS, bp_decode_batch

LOG = logging.getLogger("cvqkd.ldpc")

MIN_TRIALS = 100
BATCH = 64


@dataclass(frozen=True)
class OperatingPoint:
    beta: float
    fer: float
    effective_rate: float
    snr: float
    trials: int
    mean_iterations: float


def efficiency(effective_rate: float, snr: float) -> float:
    return effective_rate / mutual_information(snr)


def measure_efficiency(
    code: SparseParityCheck,
    adaptation: Optional[RateAdaptation],
    snr: float,
    trials: int,
    seed: int = 0,
    max_iters: int = MAX_ITERS,
) -> OperatingPoint:
    """Run `trials` frames through MDR + BP at the given snr (Bob's data y = x + z, Var z = 1)."""
    if trials < MIN_TRIALS:
        raise DomainError(f"need at least {MIN_TRIALS} trials (got {trials})")
    if snr <= 0:
        raise DomainError(f"snr must be positive (got {snr})")
    if adaptation is None:
        adaptation = RateAdaptation.from_counts(code, 0, 0)
    width = adaptation.mdr_blocks * 8
    rng = derive_rng(seed, STREAM_BLOCK)
    failures = 0
    iterations = 0
    done = 0
    while done < trials:
        b = min(BATCH, trials - done)
        x = rng.normal(0.0, math.sqrt(snr), size=(b, width))
        y = x + rng.standard_normal((b, width))
        frames = build_frames(code, adaptation, y, x, 1.0, 1.0, rng)
        results = bp_decode_batch(frames.llrs, frames.syndromes, code, adaptation, max_iters)
        key = adaptation.key_positions
        for res, u in zip(results, frames.u):
            iterations += res.iterations
            if not np.array_equal(res.bits, u[key]):
                failures += 1
        done += b
    point = OperatingPoint(
        beta=efficiency(adaptation.effective_rate, snr),
        fer=failures / trials,
        effective_rate=adaptation.effective_rate,
        snr=snr,
        trials=trials,
        mean_iterations=iterations / trials,
    )
    LOG.info(
        "operating point: R_eff=%.5f snr=%.4f beta=%.4f FER=%.3f (%d frames)",
        point.effective_rate, snr, point.beta, point.fer, trials,
    )
    return point
