"""Results store for cvqkd sessions and rate sweeps."""

from .connection import Database
from .config import DBConfig

# Models
from .models import BlockEstimateRow, RateSweepRow, SessionRun

# Repositories
from .repositories import (
	get_block_estimates,
	get_latest_session_runs,
	insert_block_estimates,
	insert_rate_rows,
	insert_session_run,
)

# Services
from .services import persist_rate_sweep, persist_session_report

__all__ = [
	# Core
	"Database",
	"DBConfig",
	# Models
	"SessionRun",
	"BlockEstimateRow",
	"RateSweepRow",
	# Repository functions
	"insert_session_run",
	"insert_block_estimates",
	"insert_rate_rows",
	"get_latest_session_runs",
	"get_block_estimates",
	# Service functions
	"persist_session_report",
	"persist_rate_sweep",
]
