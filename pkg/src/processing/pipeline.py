"""Per-channel processing: detection, segmentation and fiducials in one pass."""

from functools import cached_property
from typing import Any

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.processing.beat_detect import DetectorConfig, detect_r_peaks, segment_beats
from src.processing.features import build_fragment_vector
from src.processing.fiducials import beat_features, locate_fiducials
from src.utils.config import Settings, settings
from src.utils.exceptions import NotEnoughBeats
from src.utils.models import N_BEAT_FEATURES, FeatureVector, FragmentSource, SignalRecord

logger = structlog.get_logger()


class PipelineConfig(BaseModel):
    """Detector and window parameters applied to every channel."""

    model_config = ConfigDict(frozen=True)

    detector: DetectorConfig = Field(default_factory=DetectorConfig)
    pre_span_ms: float = Field(default=250.0, ge=250.0)
    post_span_ms: float = Field(default=420.0, ge=420.0)
    fragment_len: int = Field(default=20, ge=1)

    @classmethod
    def from_settings(cls, cfg: Settings = settings) -> "PipelineConfig":
        return cls(
            detector=DetectorConfig.from_settings(cfg),
            pre_span_ms=cfg.pre_span_ms,
            post_span_ms=cfg.post_span_ms,
            fragment_len=cfg.fragment_len,
        )


class BeatTrack(BaseModel):
    """Beat features of one channel, in beat order, with the R sample of each beat."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    record_id: str
    subject_id: str
    lead: str
    fs: float = Field(gt=0.0)
    r_indices: np.ndarray
    features: np.ndarray
    n_samples: int = Field(default=0, ge=0, description="Length of the source channel")

    @field_validator("r_indices", mode="before")
    @classmethod
    def _indices(cls, value: Any) -> np.ndarray:
        arr = np.array(value, dtype=np.int64).ravel()
        arr.setflags(write=False)
        return arr

    @field_validator("features", mode="before")
    @classmethod
    def _feature_matrix(cls, value: Any) -> np.ndarray:
        arr = np.array(value, dtype=np.float64).reshape(-1, N_BEAT_FEATURES)
        arr.setflags(write=False)
        return arr

    def __len__(self) -> int:
        return int(self.features.shape[0])

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.fs

    @cached_property
    def r_seconds(self) -> np.ndarray:
        return self.r_indices / self.fs

    def first_beat_at_or_after(self, seconds: float) -> int:
        """Index of the first beat whose R peak is at or after the given time."""
        return int(np.searchsorted(self.r_seconds, seconds, side="left"))

    def fragment(self, start: int, fragment_len: int = 20) -> FeatureVector:
        """Fragment vector of beats [start, start + fragment_len).

        Raises:
            NotEnoughBeats: If the track ends before the fragment does
        """
        if start < 0 or start + fragment_len > len(self):
            raise NotEnoughBeats(
                f"{self.record_id}/{self.lead}: beats [{start}, {start + fragment_len}) "
                f"requested, track has {len(self)}"
            )
        return FeatureVector(
            values=build_fragment_vector(self.features[start:], fragment_len),
            subject_id=self.subject_id,
            source=FragmentSource(record_id=self.record_id, lead=self.lead, start_beat=start),
        )


def extract_beat_track(
    record: SignalRecord,
    lead: str,
    subject_id: str | None = None,
    record_id: str | None = None,
    cfg: PipelineConfig | None = None,
) -> BeatTrack:
    """Detect, segment and delineate every beat of one lead."""
    cfg = cfg or PipelineConfig()
    channel = record.channel(lead)
    peaks = detect_r_peaks(channel, record.fs, cfg.detector)
    windows = segment_beats(channel, record.fs, peaks, cfg.pre_span_ms, cfg.post_span_ms)
    features = [beat_features(locate_fiducials(w, record.fs)) for w in windows]

    track = BeatTrack(
        record_id=record_id or record.record_name,
        subject_id=subject_id or record.record_name,
        lead=record.channel_names[record.lead_index(lead)],
        fs=record.fs,
        r_indices=[w.r_index for w in windows],
        features=np.asarray(features, dtype=np.float64).reshape(-1, N_BEAT_FEATURES),
        n_samples=record.n_samples,
    )
    logger.debug(
        "Beat track extracted",
        record=track.record_id,
        lead=track.lead,
        detected=int(peaks.size),
        beats=len(track),
    )
    return track
