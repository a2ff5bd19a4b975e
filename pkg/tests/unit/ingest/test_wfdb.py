"""Unit tests for WFDB header parsing and signal decoding."""

from pathlib import Path

import numpy as np
import pytest

from src.ingest.wfdb import (
    decode_samples,
    encode_samples,
    format_header,
    load_record,
    parse_header,
    to_adc,
    to_physical,
    write_record,
)
from src.utils.exceptions import (
    MalformedHeader,
    MissingSignalFile,
    SampleOutOfRange,
    TruncatedFile,
    UnsupportedFormat,
)
from src.utils.models import SignalRecord, SignalSpec, StorageFormat

pytestmark = pytest.mark.unit

PTB_HEADER = """s0010_re 3 1000 38400
s0010_re.dat 16 2000(0)/mV 16 0 -489 -8337 0 i
s0010_re.dat 16 2000(0)/mV 16 0 -458 -8321 0 ii
s0010_re.dat 16 2000(0)/mV 16 0 31 -7795 0 avr
# age: 81
# sex: female
"""


class TestParseHeader:
    """Tests for parse_header."""

    def test_ptb_style_header(self) -> None:
        header = parse_header(PTB_HEADER)
        assert header.record_name == "s0010_re"
        assert header.n_signals == 3
        assert header.sampling_rate == 1000.0
        assert header.n_samples == 38400
        assert header.signals[0].storage_format is StorageFormat.FMT16
        assert header.signals[0].gain == 2000.0
        assert [s.description for s in header.signals] == ["i", "ii", "avr"]
        assert header.comments == ("age: 81", "sex: female")

    def test_zero_gain_means_default(self) -> None:
        header = parse_header("rec 1 250 10\nrec.dat 212 0 12 0 0 0 0 ECG\n")
        assert header.signals[0].gain == SignalSpec.DEFAULT_GAIN

    def test_baseline_defaults_to_adc_zero(self) -> None:
        header = parse_header("rec 1 360 10\nrec.dat 212 200/mV 11 1024 995 -22131 0 MLII\n")
        assert header.signals[0].baseline == 1024
        assert header.signals[0].adc_resolution == 11

    def test_multi_segment_rejected(self) -> None:
        with pytest.raises(MalformedHeader, match="multi-segment"):
            parse_header("rec/2 1 250 100\nrec.dat 16\n")

    def test_unsupported_format(self) -> None:
        with pytest.raises(UnsupportedFormat):
            parse_header("rec 1 250 100\nrec.dat 80 200/mV\n")

    def test_missing_signal_lines(self) -> None:
        with pytest.raises(MalformedHeader, match="expected 2 signal lines"):
            parse_header("rec 2 250 100\nrec.dat 16\n")

    def test_non_numeric_fs(self) -> None:
        with pytest.raises(MalformedHeader):
            parse_header("rec 1 fast 100\nrec.dat 16\n")

    def test_format_header_reparses(self) -> None:
        """format_header output parses back to the same header."""
        header = parse_header(PTB_HEADER)
        again = parse_header(format_header(header))
        assert again.signals == header.signals
        assert again.comments == header.comments
        assert again.n_samples == header.n_samples


class TestSampleCodecs:
    """Tests for the format 16 and 212 codecs."""

    def test_212_crafted_triples(self) -> None:
        """Two 12-bit samples share three bytes; the high nibbles sit in the middle byte."""
        data = bytes([0x01, 0x00, 0x02, 0x00, 0xF0, 0xFF])
        decoded = decode_samples(data, StorageFormat.FMT212, 0, 1)
        assert decoded.tolist() == [[1, 2, 0, -1]]

    def test_212_full_range(self) -> None:
        values = np.arange(-2048, 2048).reshape(2, -1)
        data = encode_samples(values, StorageFormat.FMT212)
        np.testing.assert_array_equal(decode_samples(data, StorageFormat.FMT212, 2048, 2), values)

    def test_16_full_range(self) -> None:
        values = np.arange(-32768, 32768).reshape(1, -1)
        data = encode_samples(values, StorageFormat.FMT16)
        assert len(data) == 2 * 65536
        np.testing.assert_array_equal(decode_samples(data, StorageFormat.FMT16, None, 1), values)

    def test_16_is_little_endian(self) -> None:
        assert decode_samples(b"\x01\x02", StorageFormat.FMT16, 1, 1).tolist() == [[0x0201]]

    def test_interleaving(self) -> None:
        """Channels are interleaved sample by sample."""
        data = encode_samples(np.array([[1, 2, 3], [-1, -2, -3]]), StorageFormat.FMT16)
        decoded = decode_samples(data, StorageFormat.FMT16, 0, 1)
        assert decoded.ravel().tolist() == [1, -1, 2, -2, 3, -3]

    def test_212_out_of_range(self) -> None:
        with pytest.raises(SampleOutOfRange):
            encode_samples(np.array([[2048]]), StorageFormat.FMT212)

    def test_truncated_16(self) -> None:
        with pytest.raises(TruncatedFile):
            decode_samples(b"\x00\x01\x02", StorageFormat.FMT16, None, 1)

    def test_truncated_212(self) -> None:
        with pytest.raises(TruncatedFile):
            decode_samples(b"\x00\x01", StorageFormat.FMT212, None, 1)

    @pytest.mark.parametrize("channel_count", [0, -1])
    def test_channel_count_below_one(self, channel_count: int) -> None:
        with pytest.raises(MalformedHeader, match="channel count"):
            decode_samples(b"\x00" * 4, StorageFormat.FMT16, None, channel_count)

    def test_declared_length_longer_than_file(self) -> None:
        with pytest.raises(TruncatedFile, match="need 10"):
            decode_samples(b"\x00" * 8, StorageFormat.FMT16, 5, 2)

    def test_physical_conversion(self) -> None:
        """(raw - baseline) / gain, and its integer inverse."""
        assert to_physical(1200, 200.0, 1000) == pytest.approx(1.0)
        raw = np.array([-5, 0, 17])
        np.testing.assert_array_equal(to_adc(to_physical(raw, 200.0, 3), 200.0, 3), raw)


class TestRecords:
    """Tests for load_record and write_record on disk."""

    def test_write_then_load(self, tmp_path: Path) -> None:
        rng = np.random.default_rng(0)
        samples = rng.uniform(-2.0, 2.0, size=(2, 500))
        record = SignalRecord.from_specs(
            "rec01",
            500.0,
            samples,
            [SignalSpec(file_name="rec01.dat", description=d) for d in ("i", "v2")],
            comments=("subject: a",),
        )
        base = write_record(record, tmp_path, comments=record.header.comments)
        loaded = load_record(base)
        assert loaded.channel_names == ("I", "V2")
        assert loaded.fs == 500.0
        assert loaded.header.comments == ("subject: a",)
        np.testing.assert_allclose(loaded.samples, samples, atol=0.5 / 1000.0)

    def test_write_212(self, tmp_path: Path) -> None:
        record = SignalRecord.from_specs(
            "r212", 250.0, np.array([[0.5, -0.5, 1.0]]), [SignalSpec(file_name="r212.dat")]
        )
        base = write_record(record, tmp_path, storage_format=StorageFormat.FMT212)
        np.testing.assert_allclose(load_record(base).samples, record.samples, atol=1e-3)

    def test_load_accepts_hea_path(self, tmp_path: Path) -> None:
        specs = [SignalSpec(file_name="x.dat")]
        record = SignalRecord.from_specs("x", 250.0, np.zeros((1, 4)), specs)
        base = write_record(record, tmp_path)
        assert load_record(base.with_name("x.hea")).n_samples == 4

    def test_microvolt_units_scaled(self, tmp_path: Path) -> None:
        """Signals declared in uV are returned in mV."""
        (tmp_path / "uv.hea").write_text("uv 1 100 2\nuv.dat 16 1(0)/uV 16 0 0 0 0 I\n")
        raw = encode_samples(np.array([[1000, -500]]), StorageFormat.FMT16)
        (tmp_path / "uv.dat").write_bytes(raw)
        np.testing.assert_allclose(load_record(tmp_path / "uv").samples, [[1.0, -0.5]])

    def test_missing_header(self, tmp_path: Path) -> None:
        with pytest.raises(MissingSignalFile, match="header not found"):
            load_record(tmp_path / "absent")

    def test_missing_signal_file(self, tmp_path: Path) -> None:
        (tmp_path / "lonely.hea").write_text("lonely 1 250 10\nlonely.dat 16\n")
        with pytest.raises(MissingSignalFile, match="lonely.dat"):
            load_record(tmp_path / "lonely")
