"""Fragment vectors, feature datasets and train-only standardisation."""

from collections.abc import Sequence
from pathlib import Path

import numpy as np
import pandas as pd
import structlog

from src.utils.exceptions import (
    DimensionMismatch,
    EmptyDataset,
    FeatureError,
    NotEnoughBeats,
)
from src.utils.models import (
    N_BEAT_FEATURES,
    BeatFeatures,
    Dataset,
    FeatureVector,
    FragmentSource,
    Standardizer,
)

logger = structlog.get_logger()

SOURCE_COLUMNS = ("subject", "record", "lead", "start_beat")


def build_fragment_vector(
    beats: Sequence[BeatFeatures] | np.ndarray, fragment_len: int = 20
) -> np.ndarray:
    """Concatenate the first fragment_len beats, beat-major (beat 1's nine features first).

    Raises:
        NotEnoughBeats: Fewer than fragment_len beats supplied
    """
    matrix = np.asarray(beats, dtype=np.float64).reshape(-1, N_BEAT_FEATURES)
    if matrix.shape[0] < fragment_len:
        raise NotEnoughBeats(f"{matrix.shape[0]} beats; fragment needs {fragment_len}")
    return matrix[:fragment_len].ravel().copy()


def fragment_stream(
    beats: Sequence[BeatFeatures] | np.ndarray,
    fragment_len: int = 20,
    stride: int | None = None,
) -> list[np.ndarray]:
    """Consecutive fragments starting every `stride` beats (non-overlapping by default)."""
    step = fragment_len if stride is None else stride
    if step < 1:
        raise FeatureError(f"stride must be >= 1, got {step}")
    matrix = np.asarray(beats, dtype=np.float64).reshape(-1, N_BEAT_FEATURES)
    return [
        build_fragment_vector(matrix[start:], fragment_len)
        for start in range(0, matrix.shape[0] - fragment_len + 1, step)
    ]


def fit_standardizer(train: Dataset) -> Standardizer:
    """Per-feature mean and population standard deviation of the training set.

    Raises:
        EmptyDataset: If train has no vectors
    """
    if len(train) == 0:
        raise EmptyDataset("cannot fit a standardizer on an empty dataset")
    X = train.X  # noqa: N806
    constant = np.ptp(X, axis=0) == 0
    scale = np.where(constant, 1.0, X.std(axis=0))
    return Standardizer(mean=X.mean(axis=0), scale=scale, constant=constant)


def apply_standardizer(scaler: Standardizer, data: Dataset) -> Dataset:
    """Z-score data with fixed (training) parameters; constant features become 0."""
    if len(data) == 0:
        return Dataset(scaler=scaler)
    if data.dimension != scaler.mean.size:
        raise DimensionMismatch(
            f"dataset has {data.dimension} features, standardizer expects {scaler.mean.size}"
        )
    Z = (data.X - scaler.mean) / scaler.scale  # noqa: N806
    Z[:, scaler.constant] = 0.0
    return Dataset(
        vectors=tuple(
            FeatureVector(values=row, subject_id=v.subject_id, source=v.source)
            for row, v in zip(Z, data.vectors, strict=True)
        ),
        scaler=scaler,
    )


def standardize_pair(train: Dataset, validation: Dataset) -> tuple[Dataset, Dataset]:
    """Fit on train only and transform both sets."""
    scaler = fit_standardizer(train)
    return apply_standardizer(scaler, train), apply_standardizer(scaler, validation)


def feature_columns(dimension: int) -> list[str]:
    return [f"f{i:03d}" for i in range(dimension)]


def write_dataset(data: Dataset, path: str | Path) -> Path:
    """Write a dataset as CSV: f000..fNNN, subject, record, lead, start_beat."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(data.X, columns=feature_columns(data.dimension))
    frame["subject"] = [v.subject_id for v in data.vectors]
    frame["record"] = [v.source.record_id if v.source else "" for v in data.vectors]
    frame["lead"] = [v.source.lead if v.source else "" for v in data.vectors]
    frame["start_beat"] = [v.source.start_beat if v.source else -1 for v in data.vectors]
    frame.to_csv(out, index=False, float_format="%.17g")
    logger.info("Dataset written", path=str(out), vectors=len(data))
    return out


def read_dataset(path: str | Path) -> Dataset:
    """Read a dataset CSV written by write_dataset."""
    csv_path = Path(path)
    try:
        frame = pd.read_csv(csv_path, dtype={"subject": str, "record": str, "lead": str})
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise FeatureError(f"{csv_path}: {e}") from e

    features = [c for c in frame.columns if c.startswith("f") and c[1:].isdigit()]
    if not features or "subject" not in frame.columns:
        raise FeatureError(f"{csv_path}: expected f000.. feature columns and a subject column")

    X = frame[features].to_numpy(dtype=np.float64)  # noqa: N806
    if not np.all(np.isfinite(X)):
        raise FeatureError(f"{csv_path}: non-finite feature values")

    sources: list[FragmentSource | None] = []
    for _, row in frame.iterrows():
        record = row.get("record")
        if isinstance(record, str) and record:
            sources.append(
                FragmentSource(
                    record_id=record,
                    lead=str(row.get("lead", "")),
                    start_beat=int(row.get("start_beat", 0)),
                )
            )
        else:
            sources.append(None)
    return Dataset.from_arrays(X, frame["subject"].astype(str).tolist(), sources)
