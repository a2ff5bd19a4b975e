"""Base classes and protocols for record sources."""

from pathlib import Path
from typing import Literal, Protocol

from pydantic import BaseModel, ConfigDict

from src.utils.models import SignalRecord

DosePhase = Literal["pre", "post"]


class RecordRef(BaseModel):
    """A record inside a database directory, before it is loaded."""

    model_config = ConfigDict(frozen=True)

    record_id: str
    subject_id: str
    path: Path
    phase: DosePhase | None = None
    timepoint_hours: float | None = None
    arm: str | None = None


class RecordSource(Protocol):
    """Protocol defining the interface for all record sources."""

    @property
    def name(self) -> str:
        """Human-readable name of this source."""
        ...

    def list_records(self) -> list[RecordRef]:
        """
        List the records of the database in index order.

        Returns:
            RecordRef objects, first record of each subject first

        Raises:
            RecordError: If the index cannot be read
        """
        ...

    def load(self, ref: RecordRef) -> SignalRecord:
        """
        Load one record into calibrated mV.

        Raises:
            RecordError: If the record files are missing or malformed
        """
        ...
