"""Data models for records, beats and feature datasets."""

from enum import Enum
from functools import cached_property
from typing import Any, ClassVar, NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.utils.exceptions import MissingLead

CONVENTIONAL_LEADS: tuple[str, ...] = (
    "I", "II", "III", "aVR", "aVL", "aVF", "V1", "V2", "V3", "V4", "V5", "V6",
)  # fmt: skip
FRANK_LEADS: tuple[str, ...] = ("Vx", "Vy", "Vz")

_LEAD_ALIASES = {name.lower(): name for name in CONVENTIONAL_LEADS + FRANK_LEADS}

FEATURE_NAMES: tuple[str, ...] = ("t_p", "t_q", "t_s", "t_t", "a_p", "a_q", "a_r", "a_s", "a_t")
N_BEAT_FEATURES = len(FEATURE_NAMES)


def canonical_lead_name(description: str) -> str:
    """Map a raw signal description (e.g. PTB's 'avr', 'v1') to its canonical lead name."""
    key = description.strip().replace(" ", "").lower()
    return _LEAD_ALIASES.get(key, description.strip())


class StorageFormat(str, Enum):
    """Supported WFDB sample storage formats."""

    FMT16 = "16"
    FMT212 = "212"


class SignalSpec(BaseModel):
    """One signal line of a WFDB header."""

    model_config = ConfigDict(frozen=True)

    DEFAULT_GAIN: ClassVar[float] = 200.0

    file_name: str
    # None marks a pre-calibrated text source (CSV) with no binary layout
    storage_format: StorageFormat | None = None
    gain: float = Field(default=200.0, gt=0.0, description="ADC units per physical unit")
    baseline: int = 0
    units: str = "mV"
    adc_resolution: int = Field(default=12, ge=1, le=32)
    description: str = ""


class RecordHeader(BaseModel):
    """Parsed WFDB record header."""

    model_config = ConfigDict(frozen=True)

    record_name: str = Field(min_length=1)
    n_signals: int = Field(ge=1)
    sampling_rate: float = Field(gt=0.0, description="Hz")
    n_samples: int = Field(ge=0, description="0 means 'infer from the signal files'")
    signals: tuple[SignalSpec, ...]
    comments: tuple[str, ...] = ()

    @model_validator(mode="after")
    def _signal_count(self) -> "RecordHeader":
        if self.n_signals != len(self.signals):
            raise ValueError(
                f"header declares {self.n_signals} signals but lists {len(self.signals)}"
            )
        return self


def _unique_names(names: list[str]) -> tuple[str, ...]:
    seen: dict[str, int] = {}
    out = []
    for i, name in enumerate(names):
        base = name or f"ch{i}"
        count = seen.get(base, 0)
        seen[base] = count + 1
        out.append(base if count == 0 else f"{base}_{count}")
    return tuple(out)


class SignalRecord(BaseModel):
    """Multichannel ECG in physical units (mV), one row per channel."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    header: RecordHeader
    samples: np.ndarray
    channel_names: tuple[str, ...]

    @field_validator("samples", mode="before")
    @classmethod
    def _as_readonly_matrix(cls, value: Any) -> np.ndarray:
        arr = np.array(value, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[np.newaxis, :]
        if arr.ndim != 2:
            raise ValueError("samples must be a (channels, samples) matrix")
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples must be finite")
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def _shape_matches_header(self) -> "SignalRecord":
        n_channels, n_samples = self.samples.shape
        if n_channels != self.header.n_signals:
            raise ValueError(f"{n_channels} channels for {self.header.n_signals} signals")
        if len(self.channel_names) != n_channels:
            raise ValueError("one channel name per channel required")
        if self.header.n_samples and n_samples != self.header.n_samples:
            raise ValueError(f"{n_samples} samples, header declares {self.header.n_samples}")
        return self

    @classmethod
    def from_specs(
        cls,
        record_name: str,
        sampling_rate: float,
        samples: np.ndarray,
        signals: list[SignalSpec],
        comments: tuple[str, ...] = (),
    ) -> "SignalRecord":
        """Build a record (and its header) around an already-calibrated matrix."""
        matrix = np.atleast_2d(np.asarray(samples, dtype=np.float64))
        header = RecordHeader(
            record_name=record_name,
            n_signals=len(signals),
            sampling_rate=sampling_rate,
            n_samples=matrix.shape[1],
            signals=tuple(signals),
            comments=comments,
        )
        names = _unique_names([canonical_lead_name(s.description) for s in signals])
        return cls(header=header, samples=matrix, channel_names=names)

    @property
    def record_name(self) -> str:
        return self.header.record_name

    @property
    def fs(self) -> float:
        return self.header.sampling_rate

    @property
    def n_samples(self) -> int:
        return int(self.samples.shape[1])

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.fs

    def has_lead(self, lead: str) -> bool:
        try:
            self.lead_index(lead)
        except MissingLead:
            return False
        return True

    def lead_index(self, lead: str) -> int:
        """Index of a lead by canonical name (case-insensitive fallback)."""
        if lead in self.channel_names:
            return self.channel_names.index(lead)
        lowered = [name.lower() for name in self.channel_names]
        if lead.lower() in lowered:
            return lowered.index(lead.lower())
        raise MissingLead(
            f"lead '{lead}' not in record {self.record_name} (has {list(self.channel_names)})"
        )

    def channel(self, lead: str) -> np.ndarray:
        """One channel in mV (read-only view)."""
        return self.samples[self.lead_index(lead)]


class BeatWindow(BaseModel):
    """Fixed-width heartbeat window aligned on its R peak."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    r_index: int = Field(ge=0, description="R sample index in the source channel")
    r_offset: int = Field(ge=0, description="R sample index inside the window")
    fs: float = Field(gt=0.0)
    pre_span_ms: float = 250.0
    post_span_ms: float = 420.0
    samples: np.ndarray

    @field_validator("samples", mode="before")
    @classmethod
    def _as_readonly_vector(cls, value: Any) -> np.ndarray:
        arr = np.array(value, dtype=np.float64).ravel()
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def _r_inside(self) -> "BeatWindow":
        if self.r_offset >= self.samples.size:
            raise ValueError("R offset lies outside the window")
        return self


class BeatFiducials(BaseModel):
    """P, Q, R, S, T peaks of one beat; times in ms relative to R, amplitudes in mV."""

    model_config = ConfigDict(frozen=True)

    t_p: float
    t_q: float
    t_s: float
    t_t: float
    a_p: float
    a_q: float
    a_r: float
    a_s: float
    a_t: float

    @model_validator(mode="after")
    def _ordered(self) -> "BeatFiducials":
        if not (self.t_p < self.t_q < 0.0 < self.t_s < self.t_t):
            raise ValueError(
                f"fiducials out of order: P={self.t_p} Q={self.t_q} S={self.t_s} T={self.t_t}"
            )
        return self


class BeatFeatures(NamedTuple):
    """The nine per-beat features, in fragment-vector order."""

    t_p: float
    t_q: float
    t_s: float
    t_t: float
    a_p: float
    a_q: float
    a_r: float
    a_s: float
    a_t: float


class FragmentSource(BaseModel):
    """Where a fragment vector came from."""

    model_config = ConfigDict(frozen=True)

    record_id: str
    lead: str
    start_beat: int = Field(ge=0)


class FeatureVector(BaseModel):
    """Fragment descriptor with its subject label."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    values: np.ndarray
    subject_id: str
    source: FragmentSource | None = None

    @field_validator("values", mode="before")
    @classmethod
    def _finite_vector(cls, value: Any) -> np.ndarray:
        arr = np.array(value, dtype=np.float64).ravel()
        if arr.size == 0:
            raise ValueError("feature vector is empty")
        if not np.all(np.isfinite(arr)):
            raise ValueError("feature vector has non-finite values")
        arr.setflags(write=False)
        return arr

    @property
    def dimension(self) -> int:
        return int(self.values.size)


class Standardizer(BaseModel):
    """Per-feature z-score parameters fitted on a training set."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    mean: np.ndarray
    scale: np.ndarray
    constant: np.ndarray = Field(description="True where the training column was constant")


class Dataset(BaseModel):
    """Ordered, immutable collection of labelled fragment vectors."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    vectors: tuple[FeatureVector, ...] = ()
    scaler: Standardizer | None = None

    @model_validator(mode="after")
    def _uniform_dimension(self) -> "Dataset":
        dims = {v.dimension for v in self.vectors}
        if len(dims) > 1:
            raise ValueError(f"mixed vector dimensions {sorted(dims)}")
        return self

    @classmethod
    def from_arrays(
        cls,
        X: np.ndarray,  # noqa: N803
        y: list[str] | np.ndarray,
        sources: list[FragmentSource | None] | None = None,
    ) -> "Dataset":
        matrix = np.atleast_2d(np.asarray(X, dtype=np.float64))
        labels = [str(label) for label in y]
        if matrix.shape[0] != len(labels):
            raise ValueError("one label per row required")
        srcs = sources or [None] * len(labels)
        return cls(
            vectors=tuple(
                FeatureVector(values=row, subject_id=label, source=src)
                for row, label, src in zip(matrix, labels, srcs, strict=True)
            )
        )

    def __len__(self) -> int:
        return len(self.vectors)

    @property
    def dimension(self) -> int:
        return self.vectors[0].dimension if self.vectors else 0

    @cached_property
    def X(self) -> np.ndarray:  # noqa: N802
        if not self.vectors:
            return np.empty((0, 0))
        return np.vstack([v.values for v in self.vectors])

    @cached_property
    def y(self) -> np.ndarray:
        return np.array([v.subject_id for v in self.vectors], dtype=object)

    @property
    def subjects(self) -> tuple[str, ...]:
        return tuple(sorted({v.subject_id for v in self.vectors}))

    def concat(self, other: "Dataset") -> "Dataset":
        return Dataset(vectors=self.vectors + other.vectors)
