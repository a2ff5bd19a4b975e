"""WFDB header and binary signal file support (formats 16 and 212).

Header grammar: one record line (``name n_signals fs n_samples ...``) followed
by one signal line per channel (``file fmt gain(baseline)/units adc_res
adc_zero init checksum block_size description``). Lines starting with '#'
are comments. Multi-segment records are rejected.
"""

import re
from collections.abc import Sequence
from pathlib import Path

import numpy as np
import structlog
from pydantic import ValidationError

from src.utils.exceptions import (
    MalformedHeader,
    MissingSignalFile,
    SampleOutOfRange,
    TruncatedFile,
    UnsupportedFormat,
)
from src.utils.models import RecordHeader, SignalRecord, SignalSpec, StorageFormat

logger = structlog.get_logger()

FORMAT_BOUNDS: dict[StorageFormat, tuple[int, int]] = {
    StorageFormat.FMT16: (-32768, 32767),
    StorageFormat.FMT212: (-2048, 2047),
}
DEFAULT_ADC_RESOLUTION = {StorageFormat.FMT16: 16, StorageFormat.FMT212: 12}

# Physical-unit scale to mV
UNIT_TO_MV = {"mv": 1.0, "uv": 1e-3, "µv": 1e-3, "v": 1e3}

_FORMAT_TOKEN = re.compile(
    r"^(?P<fmt>\d+)(?:x(?P<spf>\d+))?(?::(?P<skew>\d+))?(?:\+(?P<off>\d+))?$"
)
_GAIN_TOKEN = re.compile(
    r"^(?P<gain>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"
    r"(?:\((?P<baseline>-?\d+)\))?(?:/(?P<units>\S+))?$"
)


def _storage_format(code: str) -> StorageFormat:
    try:
        return StorageFormat(code)
    except ValueError as e:
        raise UnsupportedFormat(f"WFDB format {code} is not supported (only 16 and 212)") from e


def _parse_signal_line(fields: list[str], line_no: int) -> SignalSpec:
    if len(fields) < 2:
        raise MalformedHeader(f"signal line {line_no}: expected at least file name and format")

    match = _FORMAT_TOKEN.match(fields[1])
    if match is None:
        raise MalformedHeader(f"signal line {line_no}: bad format field '{fields[1]}'")
    if (match["spf"] and int(match["spf"]) != 1) or match["skew"] or match["off"]:
        raise MalformedHeader(
            f"signal line {line_no}: multi-frequency, skewed or offset layouts are not supported"
        )
    storage_format = _storage_format(match["fmt"])

    gain = SignalSpec.DEFAULT_GAIN
    baseline: int | None = None
    units = "mV"
    if len(fields) > 2:
        gain_match = _GAIN_TOKEN.match(fields[2])
        if gain_match is None:
            raise MalformedHeader(f"signal line {line_no}: bad gain field '{fields[2]}'")
        gain = float(gain_match["gain"])
        if gain_match["baseline"] is not None:
            baseline = int(gain_match["baseline"])
        units = gain_match["units"] or units
        if gain == 0:
            gain = SignalSpec.DEFAULT_GAIN
        elif gain < 0:
            raise MalformedHeader(f"signal line {line_no}: negative gain {gain}")

    try:
        adc_resolution = int(fields[3]) if len(fields) > 3 else 0
        adc_zero = int(fields[4]) if len(fields) > 4 else 0
    except ValueError as e:
        raise MalformedHeader(f"signal line {line_no}: non-numeric ADC field") from e
    if adc_resolution == 0:
        adc_resolution = DEFAULT_ADC_RESOLUTION[storage_format]

    # Fields 5-7 (initial value, checksum, block size) are not needed for reading.
    description = " ".join(fields[8:]) if len(fields) > 8 else ""

    return SignalSpec(
        file_name=fields[0],
        storage_format=storage_format,
        gain=gain,
        baseline=adc_zero if baseline is None else baseline,
        units=units,
        adc_resolution=adc_resolution,
        description=description,
    )


def parse_header(text: str) -> RecordHeader:
    """Parse the contents of a .hea file.

    Raises:
        MalformedHeader: Missing fields, non-numeric counts or multi-segment records
        UnsupportedFormat: A signal uses a format other than 16 or 212
    """
    comments: list[str] = []
    lines: list[str] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            comments.append(line.lstrip("#").strip())
            continue
        if "#" in line:
            line, comment = line.split("#", 1)
            comments.append(comment.strip())
        lines.append(line.strip())

    if not lines:
        raise MalformedHeader("header has no record line")

    record_fields = lines[0].split()
    if len(record_fields) < 3:
        raise MalformedHeader(f"record line needs name, signal count and fs: '{lines[0]}'")

    record_name = record_fields[0]
    if "/" in record_name:
        raise MalformedHeader(f"multi-segment record '{record_name}' is not supported")

    try:
        n_signals = int(record_fields[1])
        sampling_rate = float(record_fields[2].split("/")[0])
        n_samples = int(record_fields[3]) if len(record_fields) > 3 else 0
    except ValueError as e:
        raise MalformedHeader(f"non-numeric count in record line '{lines[0]}'") from e

    if n_signals < 1:
        raise MalformedHeader("record declares no signals")
    if len(lines) - 1 < n_signals:
        raise MalformedHeader(f"expected {n_signals} signal lines, found {len(lines) - 1}")

    try:
        signals = [
            _parse_signal_line(line.split(), line_no)
            for line_no, line in enumerate(lines[1 : n_signals + 1], start=1)
        ]
        return RecordHeader(
            record_name=record_name,
            n_signals=n_signals,
            sampling_rate=sampling_rate,
            n_samples=n_samples,
            signals=tuple(signals),
            comments=tuple(comments),
        )
    except ValidationError as e:
        raise MalformedHeader(f"invalid header field: {e.errors()[0]['msg']}") from e


def _format_of(spec: SignalSpec | StorageFormat) -> StorageFormat:
    fmt = spec.storage_format if isinstance(spec, SignalSpec) else spec
    if fmt is None:
        raise UnsupportedFormat(f"signal '{spec}' has no binary storage format")
    return fmt


def decode_samples(
    data: bytes,
    spec: SignalSpec | StorageFormat,
    n: int | None,
    channel_count: int,
) -> np.ndarray:
    """Decode an interleaved signal file into a (channel_count, n) int array of ADC units.

    Args:
        data: Raw file content
        spec: Signal spec (or bare storage format) shared by every channel in the file
        n: Samples per channel; None or 0 infers it from the byte count
        channel_count: Number of interleaved channels in the file

    Raises:
        TruncatedFile: Byte count is not a whole number of samples/frames
        UnsupportedFormat: Format other than 16 or 212
        MalformedHeader: channel_count is below 1
    """
    fmt = _format_of(spec)
    if channel_count < 1:
        raise MalformedHeader(f"channel count must be positive, got {channel_count}")

    raw = np.frombuffer(data, dtype=np.uint8)
    if fmt is StorageFormat.FMT16:
        if raw.size % 2:
            raise TruncatedFile(f"format 16 needs an even byte count, got {raw.size}")
        flat = raw.view("<i2").astype(np.int64)
    else:
        if raw.size % 3:
            raise TruncatedFile(f"format 212 needs a multiple of 3 bytes, got {raw.size}")
        triplets = raw.reshape(-1, 3).astype(np.int64)
        flat = np.empty(triplets.shape[0] * 2, dtype=np.int64)
        flat[0::2] = triplets[:, 0] | ((triplets[:, 1] & 0x0F) << 8)
        flat[1::2] = triplets[:, 2] | ((triplets[:, 1] >> 4) << 8)
        flat[flat > 2047] -= 4096

    if n:
        needed = n * channel_count
        if flat.size < needed:
            raise TruncatedFile(f"need {needed} samples, file holds {flat.size}")
        flat = flat[:needed]
    elif flat.size % channel_count:
        raise TruncatedFile(f"{flat.size} samples do not split into {channel_count} channels")

    return flat.reshape(-1, channel_count).T.copy()


def encode_samples(samples: np.ndarray, spec: SignalSpec | StorageFormat) -> bytes:
    """Interleave and pack a (channels, n) int array; inverse of decode_samples."""
    fmt = _format_of(spec)
    matrix = np.atleast_2d(np.asarray(samples))
    if not np.issubdtype(matrix.dtype, np.integer):
        raise SampleOutOfRange("samples must be integer ADC units")
    lo, hi = FORMAT_BOUNDS[fmt]
    if matrix.size and (matrix.min() < lo or matrix.max() > hi):
        raise SampleOutOfRange(f"samples outside [{lo}, {hi}] for format {fmt.value}")

    flat = matrix.T.ravel().astype(np.int64)
    if fmt is StorageFormat.FMT16:
        return flat.astype("<i2").tobytes()

    if flat.size % 2:
        flat = np.append(flat, 0)
    unsigned = flat & 0xFFF
    first, second = unsigned[0::2], unsigned[1::2]
    packed = np.empty((first.size, 3), dtype=np.uint8)
    packed[:, 0] = first & 0xFF
    packed[:, 1] = ((first >> 8) & 0x0F) | (((second >> 8) & 0x0F) << 4)
    packed[:, 2] = second & 0xFF
    return packed.tobytes()


def to_physical(raw: np.ndarray | int, gain: float, baseline: int) -> np.ndarray | float:
    """(raw - baseline) / gain."""
    if isinstance(raw, np.ndarray):
        return (raw.astype(np.float64) - baseline) / gain
    return (float(raw) - baseline) / gain


def to_adc(physical: np.ndarray | float, gain: float, baseline: int) -> np.ndarray | int:
    """round(physical * gain + baseline); inverse of to_physical on integer inputs."""
    if isinstance(physical, np.ndarray):
        return np.round(physical * gain + baseline).astype(np.int64)
    return int(round(physical * gain + baseline))


def _header_path(path: Path) -> Path:
    return path.with_name(path.name + ".hea") if path.suffix != ".hea" else path


def load_record(path: str | Path) -> SignalRecord:
    """Load a WFDB record from its base path (without extension) into calibrated mV.

    Raises:
        MissingSignalFile: Header or a referenced signal file is missing
        MalformedHeader / UnsupportedFormat / TruncatedFile: From parsing and decoding
    """
    base = Path(path)
    if base.suffix == ".hea":
        base = base.with_suffix("")
    header_file = _header_path(base)
    if not header_file.exists():
        raise MissingSignalFile(f"header not found: {header_file}")
    header = parse_header(header_file.read_text(encoding="latin-1"))

    groups: dict[str, list[int]] = {}
    for idx, spec in enumerate(header.signals):
        groups.setdefault(spec.file_name, []).append(idx)

    channels: list[np.ndarray | None] = [None] * header.n_signals
    for file_name, indices in groups.items():
        formats = {header.signals[i].storage_format for i in indices}
        if len(formats) != 1:
            raise MalformedHeader(f"{file_name}: channels sharing a file must share a format")
        dat_file = base.parent / file_name
        if not dat_file.exists():
            raise MissingSignalFile(f"signal file not found: {dat_file} (record {base.name})")
        adc = decode_samples(
            dat_file.read_bytes(), header.signals[indices[0]], header.n_samples, len(indices)
        )
        for row, idx in enumerate(indices):
            spec = header.signals[idx]
            scale = UNIT_TO_MV.get(spec.units.lower(), 1.0)
            channels[idx] = np.asarray(to_physical(adc[row], spec.gain, spec.baseline)) * scale

    lengths = {c.size for c in channels if c is not None}
    if len(lengths) != 1:
        raise MalformedHeader(f"record {header.record_name}: channels differ in length {lengths}")

    record = SignalRecord.from_specs(
        record_name=header.record_name,
        sampling_rate=header.sampling_rate,
        samples=np.vstack([c for c in channels if c is not None]),
        signals=list(header.signals),
        comments=header.comments,
    )
    logger.debug(
        "Record loaded",
        record=header.record_name,
        channels=header.n_signals,
        fs=header.sampling_rate,
        samples=record.n_samples,
    )
    return record


def format_header(header: RecordHeader) -> str:
    """Render a RecordHeader in WFDB header syntax."""
    fs = f"{header.sampling_rate:g}"
    lines = [f"{header.record_name} {header.n_signals} {fs} {header.n_samples}"]
    for spec in header.signals:
        fmt = _format_of(spec).value
        lines.append(
            f"{spec.file_name} {fmt} {spec.gain:g}({spec.baseline})/{spec.units} "
            f"{spec.adc_resolution} 0 0 0 0 {spec.description}".rstrip()
        )
    lines.extend(f"# {comment}" for comment in header.comments)
    return "\n".join(lines) + "\n"


def write_record(
    record: SignalRecord,
    directory: str | Path,
    storage_format: StorageFormat = StorageFormat.FMT16,
    gain: float = 1000.0,
    comments: Sequence[str] = (),
) -> Path:
    """Write a record as <name>.hea + <name>.dat; returns the record base path."""
    out_dir = Path(directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    name = record.record_name
    dat_name = f"{name}.dat"
    specs = [
        SignalSpec(
            file_name=dat_name,
            storage_format=storage_format,
            gain=gain,
            baseline=0,
            units="mV",
            adc_resolution=DEFAULT_ADC_RESOLUTION[storage_format],
            description=channel,
        )
        for channel in record.channel_names
    ]
    header = RecordHeader(
        record_name=name,
        n_signals=len(specs),
        sampling_rate=record.fs,
        n_samples=record.n_samples,
        signals=tuple(specs),
        comments=tuple(comments),
    )
    adc = np.asarray(to_adc(record.samples, gain, 0))
    (out_dir / dat_name).write_bytes(encode_samples(adc, storage_format))
    (out_dir / f"{name}.hea").write_text(format_header(header), encoding="utf-8")
    return out_dir / name
