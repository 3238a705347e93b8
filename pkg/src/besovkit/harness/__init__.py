"""Verification harness: batteries, inequality checks, baselines and reports."""

from .batteries import FIELD_NAMES, PROFILES, Battery, make_fields
from .checks import CHECKS, Context, Record, run_checks
from .report import CheckSummary, gate, report_hash, summarise
from .runner import load_config, resolve_config, run_all

__all__ = [
    "FIELD_NAMES", "PROFILES", "Battery", "make_fields", "CHECKS", "Context", "Record",
    "run_checks", "CheckSummary", "gate", "report_hash", "summarise", "load_config", "resolve_config", "run_all",
]
