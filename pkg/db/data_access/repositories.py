"""Repository functions for the qkd schema.

Writers never commit; the caller owns the transaction.
"""
from __future__ import annotations

import math
from typing import Iterable, List, Mapping

from psycopg import Connection
from psycopg.rows import dict_row
from psycopg.types.json import Json

from .models import BlockEstimateRow, RateSweepRow, SessionRun

_SESSION_COLUMNS = (
    "id, session_id, started_at, distance_km, loss_db, pulses, seed, security_mode, "
    "final_key_length, fer, bits_per_second, keys_match"
)


def _finite(value):
    """NaN and infinities are stored as NULL."""
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def insert_session_run(conn: Connection, report) -> int:
    """Insert the summary of a SessionReport and return the new run id."""
    mode = report.modes.get(report.primary_mode)
    with conn.cursor() as cur:
        cur.execute(
            """
            INSERT INTO qkd.session_runs
                (session_id, distance_km, loss_db, pulses, seed, security_mode,
                 final_key_length, fer, bits_per_second, keys_match, report)
            VALUES (%s, %s, %s, %s, %s, %s, %s, %s, %s, %s, %s)
            RETURNING id
            """,
            (
                report.session_id,
                _finite(report.distance_km),
                _finite(report.loss_db),
                report.pulses,
                report.seed,
                report.primary_mode,
                report.final_key_length,
                report.fer,
                _finite(mode.bits_per_second) if mode is not None else None,
                report.keys_match,
                Json(report.to_dict()),
            ),
        )
        return cur.fetchone()[0]


def insert_block_estimates(conn: Connection, run_id: int, rows: Iterable[Mapping[str, object]]) -> int:
    records = [
        BlockEstimateRow(session_run_id=run_id, **{k: row[k] for k in BlockEstimateRow.__dataclass_fields__ if k != "session_run_id"})
        for row in rows
    ]
    if not records:
        return 0
    with conn.cursor() as cur:
        cur.executemany(
            """
            INSERT INTO qkd.block_estimates
                (session_run_id, block_id, m, t_hat, sigma2_hat, xi_hat, t_min, xi_max, eps_pe)
            VALUES (%s, %s, %s, %s, %s, %s, %s, %s, %s)
            """,
            [
                (r.session_run_id, r.block_id, r.m, r.t_hat, r.sigma2_hat, r.xi_hat, r.t_min, r.xi_max, r.eps_pe)
                for r in records
            ],
        )
    return len(records)


def insert_rate_rows(conn: Connection, rows: Iterable[Mapping[str, object]]) -> int:
    records = [RateSweepRow(**{k: row.get(k) for k in RateSweepRow.__dataclass_fields__}) for row in rows]
    if not records:
        return 0
    with conn.cursor() as cur:
        cur.executemany(
            """
            INSERT INTO qkd.rate_sweeps
                (distance_km, loss_db, v_a, snr, i_ab, chi_be,
                 rate_asymptotic, rate_fin_1e9, rate_fin_1e8, xi_assumed)
            VALUES (%s, %s, %s, %s, %s, %s, %s, %s, %s, %s)
            """,
            [
                (
                    r.distance_km, r.loss_db, r.v_a, r.snr, r.i_ab, r.chi_be,
                    _finite(r.rate_asymptotic), _finite(r.rate_fin_1e9), _finite(r.rate_fin_1e8),
                    r.xi_assumed,
                )
                for r in records
            ],
        )
    return len(records)


def get_latest_session_runs(conn: Connection, limit: int = 10) -> List[SessionRun]:
    """Most recent runs first."""
    with conn.cursor(row_factory=dict_row) as cur:
        cur.execute(
            f"SELECT {_SESSION_COLUMNS} FROM qkd.session_runs ORDER BY started_at DESC, id DESC LIMIT %s",
            (limit,),
        )
        return [SessionRun(**row) for row in cur.fetchall()]


def get_block_estimates(conn: Connection, run_id: int) -> List[BlockEstimateRow]:
    with conn.cursor(row_factory=dict_row) as cur:
        cur.execute(
            """
            SELECT session_run_id, block_id, m, t_hat, sigma2_hat, xi_hat, t_min, xi_max, eps_pe
            FROM qkd.block_estimates
            WHERE session_run_id = %s
            ORDER BY block_id
            """,
            (run_id,),
        )
        return [BlockEstimateRow(**row) for row in cur.fetchall()]
