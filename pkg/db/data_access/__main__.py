"""CLI helper listing the most recent session runs in the store."""
from __future__ import annotations

import argparse
import logging

from .connection import Database
from .repositories import get_latest_session_runs


def main() -> None:
    parser = argparse.ArgumentParser(description="Recent runs in the qkd schema")
    parser.add_argument("--dsn", help="Override the default connection string")
    parser.add_argument("--limit", type=int, default=10, help="Runs to list (default: 10)")
    args = parser.parse_args()

    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")

    with Database(dsn=args.dsn) as db:
        with db.connection() as conn:
            for run in get_latest_session_runs(conn, limit=args.limit):
                logging.info(
                    "run %s %s @ %s: %.1f km, %d pulses, %s key=%d bits FER=%.3f",
                    run.id,
                    run.session_id,
                    run.started_at,
                    run.distance_km or 0.0,
                    run.pulses,
                    run.security_mode,
                    run.final_key_length,
                    run.fer,
                )


if __name__ == "__main__":
    main()
