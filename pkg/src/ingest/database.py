"""Database directories laid out as PhysioNet distributions."""

from collections import OrderedDict
from pathlib import Path

import pandas as pd
import structlog

from src.ingest.base import RecordRef
from src.ingest.csv_records import load_csv
from src.ingest.wfdb import load_record
from src.utils.config import Settings, settings
from src.utils.exceptions import MissingSignalFile, RecordError
from src.utils.models import SignalRecord

logger = structlog.get_logger()

RECORDS_INDEX = "RECORDS"


def read_records_index(root: Path) -> list[str]:
    """Record ids listed in <root>/RECORDS (blank lines and comments skipped)."""
    index = root / RECORDS_INDEX
    if not index.exists():
        raise MissingSignalFile(f"no {RECORDS_INDEX} index in {root}")
    ids = []
    for line in index.read_text(encoding="utf-8").splitlines():
        entry = line.strip()
        if entry and not entry.startswith("#"):
            ids.append(entry.removesuffix(".hea"))
    return ids


def subject_of(record_id: str) -> str:
    """PTB-style ids ('patient001/s0010_re') use the directory as subject."""
    parts = Path(record_id).parts
    return parts[0] if len(parts) > 1 else parts[-1]


class WfdbDatabase:
    """WFDB database directory with a RECORDS index (or *.hea files when absent)."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)

    @property
    def name(self) -> str:
        return f"wfdb:{self.root.name}"

    def _record_ids(self) -> list[str]:
        if (self.root / RECORDS_INDEX).exists():
            return read_records_index(self.root)
        return sorted(
            str(p.relative_to(self.root).with_suffix("").as_posix())
            for p in self.root.rglob("*.hea")
        )

    def list_records(self) -> list[RecordRef]:
        return [
            RecordRef(record_id=rid, subject_id=subject_of(rid), path=self.root / rid)
            for rid in self._record_ids()
        ]

    def load(self, ref: RecordRef) -> SignalRecord:
        return load_record(ref.path)


class CsvDatabase:
    """Directory of pre-calibrated CSV records (one file per record)."""

    def __init__(self, root: str | Path, sampling_rate: float) -> None:
        self.root = Path(root)
        self.sampling_rate = sampling_rate

    @property
    def name(self) -> str:
        return f"csv:{self.root.name}"

    def list_records(self) -> list[RecordRef]:
        if (self.root / RECORDS_INDEX).exists():
            ids = [rid.removesuffix(".csv") for rid in read_records_index(self.root)]
        else:
            ids = sorted(
                str(p.relative_to(self.root).with_suffix("").as_posix())
                for p in self.root.rglob("*.csv")
            )
        return [
            RecordRef(
                record_id=rid,
                subject_id=subject_of(rid),
                path=self.root / f"{rid}.csv",
            )
            for rid in ids
        ]

    def load(self, ref: RecordRef) -> SignalRecord:
        return load_csv(ref.path, self.sampling_rate)


def open_database(
    root: str | Path, csv_sampling_rate: float | None = None
) -> WfdbDatabase | CsvDatabase:
    """WFDB unless a CSV sampling rate is given."""
    if csv_sampling_rate is not None:
        return CsvDatabase(root, csv_sampling_rate)
    return WfdbDatabase(root)


def group_by_subject(refs: list[RecordRef]) -> "OrderedDict[str, list[RecordRef]]":
    """Group refs by subject, keeping index order (the first ref is the subject's first record)."""
    grouped: OrderedDict[str, list[RecordRef]] = OrderedDict()
    for ref in refs:
        grouped.setdefault(ref.subject_id, []).append(ref)
    return grouped


def read_drug_metadata(metadata_path: Path, cfg: Settings = settings) -> pd.DataFrame:
    """Read the clinical table into columns record, subject, timepoint, arm.

    Rows whose timepoint is not numeric are dropped.
    """
    try:
        table = pd.read_csv(metadata_path, dtype=str)
    except (FileNotFoundError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise RecordError(f"cannot read drug metadata {metadata_path}: {e}") from e

    columns = {
        cfg.drug_record_column: "record",
        cfg.drug_subject_column: "subject",
        cfg.drug_timepoint_column: "timepoint",
        cfg.drug_arm_column: "arm",
    }
    missing = [c for c in columns if c not in table.columns]
    if missing:
        raise RecordError(f"{metadata_path} lacks columns {missing}")

    table = table[list(columns)].rename(columns=columns)
    for col in ("record", "subject", "arm"):
        table[col] = table[col].fillna("").str.strip()
    table["timepoint"] = pd.to_numeric(table["timepoint"], errors="coerce")
    return table.dropna(subset=["timepoint"]).reset_index(drop=True)


def annotate_drug_phases(
    refs: list[RecordRef],
    metadata_path: Path,
    arm: str | None = None,
    cfg: Settings = settings,
) -> list[RecordRef]:
    """Attach subject, dose phase and arm from the clinical table to each record.

    Pre-dose records are those with a negative timepoint (from every arm). Post-dose
    records are non-negative timepoints from the drug arms (placebo excluded), optionally
    restricted to one arm. Records missing from the table are dropped.
    """
    table = read_drug_metadata(metadata_path, cfg)
    by_record = {row.record: row for row in table.itertuples(index=False)}

    annotated = []
    for ref in refs:
        row = by_record.get(Path(ref.record_id).name)
        if row is None:
            continue
        timepoint = float(row.timepoint)
        record_arm = str(row.arm)
        if timepoint < 0:
            phase = "pre"
        else:
            if "placebo" in record_arm.lower():
                continue
            if arm is not None and arm.lower() not in record_arm.lower():
                continue
            phase = "post"
        annotated.append(
            ref.model_copy(
                update={
                    "subject_id": str(row.subject),
                    "phase": phase,
                    "timepoint_hours": timepoint,
                    "arm": record_arm,
                }
            )
        )

    logger.info(
        "Drug phases annotated",
        records=len(annotated),
        pre=sum(r.phase == "pre" for r in annotated),
        post=sum(r.phase == "post" for r in annotated),
        arm=arm,
    )
    return annotated
