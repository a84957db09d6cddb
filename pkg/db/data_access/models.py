"""Row models of the qkd schema."""
from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from typing import Optional


@dataclass
class SessionRun:
    """One simulated session, summarised."""
    id: int
    session_id: str
    started_at: Optional[datetime]
    distance_km: Optional[float]
    loss_db: Optional[float]
    pulses: int
    seed: int
    security_mode: str
    final_key_length: int
    fer: float
    bits_per_second: Optional[float] = None
    keys_match: bool = True


@dataclass
class BlockEstimateRow:
    session_run_id: int
    block_id: int
    m: int
    t_hat: float
    sigma2_hat: float
    xi_hat: float
    t_min: float
    xi_max: float
    eps_pe: float


@dataclass
class RateSweepRow:
    distance_km: float
    loss_db: float
    v_a: float
    snr: float
    i_ab: float
    chi_be: float
    rate_asymptotic: Optional[float]
    rate_fin_1e9: Optional[float]
    rate_fin_1e8: Optional[float]
    xi_assumed: float
