"""Constraint-based frequent sequence mining on a small propagation kernel."""

from .constraints import ConfigError, MiningConfig, closed_filter
from .data import SequenceDB, parse_plain, parse_spmf, stats
from .mining import RunReport, mine

__all__ = [
    "ConfigError",
    "MiningConfig",
    "RunReport",
    "SequenceDB",
    "closed_filter",
    "mine",
    "parse_plain",
    "parse_spmf",
    "stats",
]
