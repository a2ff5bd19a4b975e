"""Plain-CSV records: header row of channel names, one row per sample, values in mV."""

from pathlib import Path

import numpy as np
import pandas as pd
import structlog

from src.utils.exceptions import MalformedCsv
from src.utils.models import SignalRecord, SignalSpec

logger = structlog.get_logger()


def load_csv(path: str | Path, sampling_rate: float) -> SignalRecord:
    """Load a pre-calibrated CSV record.

    Raises:
        MalformedCsv: Empty file, ragged rows or non-numeric cells
    """
    csv_path = Path(path)
    try:
        frame = pd.read_csv(csv_path, sep=",", decimal=".", dtype=str, keep_default_na=False)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise MalformedCsv(f"{csv_path}: {e}") from e

    if frame.shape[1] == 0:
        raise MalformedCsv(f"{csv_path}: no channel columns")

    numeric = frame.apply(lambda col: pd.to_numeric(col.str.strip(), errors="coerce"))
    bad = numeric.isna().to_numpy() | ~np.isfinite(numeric.to_numpy(dtype=np.float64))
    if bad.any():
        row, col = map(int, np.argwhere(bad)[0])
        raise MalformedCsv(
            f"{csv_path}: row {row + 2}, column '{frame.columns[col]}' is missing or non-numeric"
        )

    signals = [
        SignalSpec(file_name=csv_path.name, gain=1.0, baseline=0, description=str(name))
        for name in frame.columns
    ]
    record = SignalRecord.from_specs(
        record_name=csv_path.stem,
        sampling_rate=sampling_rate,
        samples=numeric.to_numpy(dtype=np.float64).T,
        signals=signals,
    )
    logger.debug("CSV record loaded", record=record.record_name, channels=len(signals))
    return record


def write_csv(record: SignalRecord, path: str | Path) -> Path:
    """Write a record as CSV (full float precision, so load_csv reproduces it)."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(record.samples.T, columns=list(record.channel_names))
    frame.to_csv(out, index=False, float_format="%.17g")
    return out
