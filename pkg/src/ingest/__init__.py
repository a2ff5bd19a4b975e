"""Record ingestion package."""

from src.ingest.base import RecordRef, RecordSource
from src.ingest.csv_records import load_csv, write_csv
from src.ingest.database import (
    CsvDatabase,
    WfdbDatabase,
    annotate_drug_phases,
    group_by_subject,
    open_database,
    read_drug_metadata,
)
from src.ingest.wfdb import decode_samples, load_record, parse_header, to_physical, write_record

__all__ = [
    "CsvDatabase",
    "RecordRef",
    "RecordSource",
    "WfdbDatabase",
    "annotate_drug_phases",
    "decode_samples",
    "group_by_subject",
    "load_csv",
    "load_record",
    "open_database",
    "parse_header",
    "read_drug_metadata",
    "to_physical",
    "write_csv",
    "write_record",
]
