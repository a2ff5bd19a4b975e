"""Experiment reports: accuracy grid, summaries, correlations and time series.

The grid CSV is the canonical output and carries no timestamps, so identical runs
produce identical bytes. Run metadata goes to a JSON sidecar.
"""

import json
import math
from collections.abc import Mapping
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Literal

import pandas as pd
import structlog
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.classifiers.registry import DISPLAY_NAMES
from src.experiments.splits import Scheme
from src.stats.correlation import CorrelationMethod, CorrelationResult
from src.stats.tables import MIN_COLUMN, SPREAD_COLUMN, accuracy_table
from src.utils.exceptions import ExperimentError

logger = structlog.get_logger()

ReportFormat = Literal["csv", "markdown"]

CONDITION_TITLES: dict[str, str] = {
    "pre": "before / before",
    "post": "before / after",
    "reduction": "reduction",
    "enriched": "before+after / after",
}


class Marker(str, Enum):
    """Cell values that stand in for an accuracy."""

    NOT_IMPLEMENTED = "not-implemented"
    FAILED = "failed"
    SKIPPED = "skipped"


CellValue = float | str

_MARKERS = {m.value for m in Marker}
_CELL_FORMAT = "{:.6f}"


class CorrelationRow(BaseModel):
    """One rank correlation between two report columns."""

    model_config = ConfigDict(frozen=True)

    label: str
    method: CorrelationMethod
    coefficient: float
    p_value: float
    n: int
    permutations: int

    @classmethod
    def from_result(cls, label: str, result: CorrelationResult) -> "CorrelationRow":
        return cls(label=label, **result.model_dump())


class SeriesPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    method: str
    slot_hours: float
    accuracy: float = Field(ge=0.0, le=1.0)


class ReportMetadata(BaseModel):
    """Run parameters written to the sidecar."""

    model_config = ConfigDict(frozen=True)

    seed: int
    dataset: str = ""
    lead: str | None = None
    fragment_len: int = 20
    standardize: bool = True
    excluded_subjects: tuple[str, ...] = ()


class ExperimentReport(BaseModel):
    """Methods x conditions accuracy grid of one protocol run."""

    model_config = ConfigDict(frozen=True)

    scheme: Scheme
    methods: tuple[str, ...]
    conditions: tuple[str, ...]
    cells: dict[tuple[str, str], CellValue]
    summarized: bool = True
    correlations: tuple[CorrelationRow, ...] = ()
    series: tuple[SeriesPoint, ...] = ()
    metadata: ReportMetadata

    @field_validator("cells", mode="before")
    @classmethod
    def _plain_markers(cls, value: Any) -> Any:
        if isinstance(value, Mapping):
            return {k: v.value if isinstance(v, Marker) else v for k, v in value.items()}
        return value

    @model_validator(mode="after")
    def _complete_grid(self) -> "ExperimentReport":
        for method in self.methods:
            for condition in self.conditions:
                value = self.cells.get((method, condition))
                if value is None:
                    raise ValueError(f"missing cell ({method}, {condition})")
                if isinstance(value, str) and value not in _MARKERS:
                    raise ValueError(f"cell ({method}, {condition}) holds unknown marker {value!r}")
                # reduction cells are differences of accuracies
                if isinstance(value, float) and not -1.0 <= value <= 1.0:
                    raise ValueError(f"cell ({method}, {condition}) = {value} out of range")
        return self

    def cell(self, method: str, condition: str) -> CellValue:
        return self.cells[(method, condition)]

    def numeric(self, method: str, condition: str) -> float | None:
        value = self.cells[(method, condition)]
        return value if isinstance(value, float) else None

    def table(self) -> pd.DataFrame:
        """Grid as a DataFrame; MIN and SPREAD columns only for summarized schemes."""
        frame = accuracy_table(self.cells, self.methods, self.conditions)
        if not self.summarized:
            frame = frame.drop(columns=[MIN_COLUMN, SPREAD_COLUMN])
        return frame

    # ─────────────────────────────────────────────────────────────
    # Writers
    # ─────────────────────────────────────────────────────────────

    def render_csv(self) -> str:
        return str(self.table().map(_format_cell).to_csv(lineterminator="\n"))

    def to_csv(self, path: str | Path) -> Path:
        out = Path(path)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(self.render_csv(), encoding="utf-8")
        logger.info("Report written", path=str(out), scheme=self.scheme.value)
        return out

    def render_markdown(self) -> str:
        """Methods as rows, conditions as columns, accuracies in percent."""
        frame = self.table()
        headers = [CONDITION_TITLES.get(c, c) for c in self.conditions]
        if self.summarized:
            headers += [MIN_COLUMN, "MAX-MIN"]
        lines = [
            "| method | " + " | ".join(headers) + " |",
            "|---|" + "---|" * len(headers),
        ]
        for method, row in frame.iterrows():
            cells = [_percent(v) for v in row.tolist()]
            name = DISPLAY_NAMES.get(str(method), str(method))
            lines.append(f"| {name} | " + " | ".join(cells) + " |")
        for corr in self.correlations:
            lines.append("")
            lines.append(
                f"{corr.label}: {corr.method.value} = {corr.coefficient:.3f} "
                f"(p = {corr.p_value:.4f}, n = {corr.n})"
            )
        return "\n".join(lines) + "\n"

    def to_markdown(self, path: str | Path) -> Path:
        out = Path(path)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(self.render_markdown(), encoding="utf-8")
        logger.info("Report written", path=str(out), scheme=self.scheme.value)
        return out

    def series_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [p.model_dump() for p in self.series], columns=["method", "slot_hours", "accuracy"]
        )

    def to_series_csv(self, path: str | Path) -> Path:
        out = Path(path)
        frame = self.series_frame()
        frame["slot_hours"] = frame["slot_hours"].map("{:g}".format)
        frame["accuracy"] = frame["accuracy"].map(_CELL_FORMAT.format)
        frame.to_csv(out, index=False, lineterminator="\n")
        logger.info("Report written", path=str(out), scheme=self.scheme.value)
        return out

    def to_correlations_csv(self, path: str | Path) -> Path:
        out = Path(path)
        frame = pd.DataFrame(
            [c.model_dump(mode="json") for c in self.correlations],
            columns=["label", "method", "coefficient", "p_value", "n", "permutations"],
        )
        frame.to_csv(out, index=False, lineterminator="\n", float_format="%.6f")
        logger.info("Report written", path=str(out), scheme=self.scheme.value)
        return out

    def write_sidecar(self, path: str | Path) -> Path:
        out = Path(path)
        payload = {
            "scheme": self.scheme.value,
            "methods": list(self.methods),
            "conditions": list(self.conditions),
            "metadata": self.metadata.model_dump(mode="json"),
            "generated_at": datetime.now(timezone.utc).isoformat(),
        }
        out.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        return out

    def write_all(self, out_dir: str | Path, stem: str, fmt: ReportFormat = "csv") -> list[Path]:
        """Grid CSV always; Markdown on request; series and correlations when present."""
        root = Path(out_dir)
        written = [self.to_csv(root / f"{stem}.csv")]
        if fmt == "markdown":
            written.append(self.to_markdown(root / f"{stem}.md"))
        if self.series:
            written.append(self.to_series_csv(root / f"{stem}_series.csv"))
        if self.correlations:
            written.append(self.to_correlations_csv(root / f"{stem}_correlations.csv"))
        written.append(self.write_sidecar(root / f"{stem}.meta.json"))
        return written

    # ─────────────────────────────────────────────────────────────
    # Reader
    # ─────────────────────────────────────────────────────────────

    @classmethod
    def from_csv(
        cls, path: str | Path, scheme: Scheme, metadata: ReportMetadata | None = None
    ) -> "ExperimentReport":
        """Reload a grid written by to_csv; summary columns are recomputed, not read.

        Raises:
            ExperimentError: Unreadable file or non-numeric, non-marker cells
        """
        src = Path(path)
        try:
            frame = pd.read_csv(src, dtype=str, keep_default_na=False, index_col="method")
        except (OSError, ValueError, pd.errors.ParserError) as e:
            raise ExperimentError(f"cannot read report {src}: {e}") from e

        summarized = MIN_COLUMN in frame.columns
        conditions = [c for c in frame.columns if c not in (MIN_COLUMN, SPREAD_COLUMN)]
        cells: dict[tuple[str, str], CellValue] = {}
        for method, row in frame.iterrows():
            for condition in conditions:
                cells[(str(method), condition)] = _parse_cell(row[condition], src)
        return cls(
            scheme=scheme,
            methods=tuple(str(m) for m in frame.index),
            conditions=tuple(conditions),
            cells=cells,
            summarized=summarized,
            metadata=metadata or ReportMetadata(seed=0),
        )


def numeric_cells(cells: Mapping[tuple[str, str], CellValue]) -> dict[tuple[str, str], float]:
    return {k: v for k, v in cells.items() if isinstance(v, float)}


def _format_cell(value: object) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, int | float) and math.isfinite(value):
        return _CELL_FORMAT.format(value)
    return ""


def _percent(value: object) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, int | float) and math.isfinite(value):
        return f"{100.0 * value:.0f}"
    return ""


def _parse_cell(text: str, src: Path) -> CellValue:
    if text in _MARKERS:
        return text
    try:
        return float(text)
    except ValueError as e:
        raise ExperimentError(f"{src}: cell {text!r} is neither an accuracy nor a marker") from e
