"""Unit tests for CSV records."""

from pathlib import Path

import numpy as np
import pytest

from src.ingest.csv_records import load_csv, write_csv
from src.utils.exceptions import MalformedCsv
from src.utils.models import SignalRecord, SignalSpec

pytestmark = pytest.mark.unit


class TestCsvRecords:
    def test_load(self, tmp_path: Path) -> None:
        path = tmp_path / "rec.csv"
        path.write_text("i,avr\n0.1,-0.2\n0.3, 0.4\n")
        record = load_csv(path, 250.0)
        assert record.record_name == "rec"
        assert record.channel_names == ("I", "aVR")
        assert record.fs == 250.0
        np.testing.assert_array_equal(record.samples, [[0.1, 0.3], [-0.2, 0.4]])

    def test_round_trip_is_exact(self, tmp_path: Path) -> None:
        """write_csv keeps full precision, so load_csv reproduces every sample."""
        samples = np.random.default_rng(1).normal(size=(2, 50))
        record = SignalRecord.from_specs(
            "r", 360.0, samples, [SignalSpec(file_name="r.csv", description=d) for d in ("I", "II")]
        )
        loaded = load_csv(write_csv(record, tmp_path / "r.csv"), 360.0)
        np.testing.assert_array_equal(loaded.samples, samples)

    def test_non_numeric_cell(self, tmp_path: Path) -> None:
        path = tmp_path / "bad.csv"
        path.write_text("I,II\n1,2\n3,x\n")
        with pytest.raises(MalformedCsv, match="row 3, column 'II'"):
            load_csv(path, 250.0)

    def test_ragged_row(self, tmp_path: Path) -> None:
        path = tmp_path / "ragged.csv"
        path.write_text("I,II\n1,2\n3\n")
        with pytest.raises(MalformedCsv):
            load_csv(path, 250.0)

    def test_empty_file(self, tmp_path: Path) -> None:
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(MalformedCsv):
            load_csv(path, 250.0)
