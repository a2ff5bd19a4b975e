"""Accuracy summaries and rank correlations."""

from src.stats.correlation import (
    CorrelationMethod,
    CorrelationResult,
    correlate,
    kendall,
    spearman,
)
from src.stats.tables import MIN_COLUMN, SPREAD_COLUMN, accuracy_table, summarize

__all__ = [
    "MIN_COLUMN",
    "SPREAD_COLUMN",
    "CorrelationMethod",
    "CorrelationResult",
    "accuracy_table",
    "correlate",
    "kendall",
    "spearman",
    "summarize",
]
