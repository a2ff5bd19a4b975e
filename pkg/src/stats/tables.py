"""Accuracy grids with per-method MIN and SPREAD (max - min) summaries."""

from collections.abc import Mapping, Sequence

import numpy as np
import pandas as pd

MIN_COLUMN = "MIN"
SPREAD_COLUMN = "SPREAD"

Cell = float | str | None


def _as_accuracy(value: Cell) -> float:
    """Numeric accuracy, or NaN for markers and missing cells."""
    if isinstance(value, int | float) and not isinstance(value, bool):
        return float(value)
    return float("nan")


def summarize(values: Sequence[Cell]) -> tuple[float, float]:
    """(MIN, SPREAD) over the numeric cells; NaN when there are none."""
    numeric = np.array([_as_accuracy(v) for v in values], dtype=np.float64)
    numeric = numeric[np.isfinite(numeric)]
    if numeric.size == 0:
        return float("nan"), float("nan")
    return float(numeric.min()), float(numeric.max() - numeric.min())


def accuracy_table(
    results: Mapping[tuple[str, str], Cell],
    methods: Sequence[str] | None = None,
    conditions: Sequence[str] | None = None,
) -> pd.DataFrame:
    """Methods as rows, conditions as columns, plus MIN and SPREAD columns.

    Marker strings (not-implemented, failed, skipped) are kept in their cells and
    ignored by the summaries.
    """
    row_names = list(methods) if methods is not None else list(dict.fromkeys(m for m, _ in results))
    col_names = (
        list(conditions) if conditions is not None else list(dict.fromkeys(c for _, c in results))
    )
    rows = []
    for method in row_names:
        cells = [results.get((method, c)) for c in col_names]
        rows.append([*cells, *summarize(cells)])
    return pd.DataFrame(
        rows,
        index=pd.Index(row_names, name="method"),
        columns=[*col_names, MIN_COLUMN, SPREAD_COLUMN],
        dtype=object,
    )
