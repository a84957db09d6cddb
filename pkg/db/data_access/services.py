"""Higher-level services writing whole reports to the store."""
from __future__ import annotations

import logging
from typing import Mapping, Sequence

from .connection import Database
from .repositories import insert_block_estimates, insert_rate_rows, insert_session_run

LOG = logging.getLogger("cvqkd.store")


def persist_session_report(db: Database, report) -> int:
    """Write a session run and its block estimates in one transaction; returns the run id."""
    with db.connection() as conn:
        with conn.transaction():
            run_id = insert_session_run(conn, report)
            count = insert_block_estimates(conn, run_id, report.estimation_rows())
    LOG.info("stored session %s as run %s (%d block estimates)", report.session_id, run_id, count)
    return run_id


def persist_rate_sweep(db: Database, rows: Sequence[Mapping[str, object]]) -> int:
    with db.connection() as conn:
        with conn.transaction():
            count = insert_rate_rows(conn, rows)
    LOG.info("stored %d rate-sweep rows", count)
    return count
