"""Declarative train/validation splits and the no-leakage check."""

from collections.abc import Sequence
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.processing.features import build_fragment_vector
from src.processing.pipeline import BeatTrack
from src.utils.exceptions import InsufficientBeats, LeakageError
from src.utils.models import N_BEAT_FEATURES, FeatureVector, FragmentSource

BeatKey = tuple[str, int]


class Scheme(str, Enum):
    LEAD_SWEEP = "lead-sweep"
    HOLTER_DRIFT = "holter-drift"
    DRUG_EFFECT = "drug"
    EVAL = "eval"


class FragmentSelector(BaseModel):
    """The (record, beat index) pairs one fragment is built from."""

    model_config = ConfigDict(frozen=True)

    subject_id: str
    beats: tuple[BeatKey, ...] = Field(min_length=1)

    @classmethod
    def contiguous(
        cls, subject_id: str, record_id: str, start: int, length: int
    ) -> "FragmentSelector":
        return cls(
            subject_id=subject_id,
            beats=tuple((record_id, i) for i in range(start, start + length)),
        )

    @property
    def record_ids(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(record for record, _ in self.beats))


class SplitPlan(BaseModel):
    """Train and validation fragments of one grid condition."""

    model_config = ConfigDict(frozen=True)

    scheme: Scheme
    condition: str
    lead: str
    seed: int
    train: tuple[FragmentSelector, ...]
    validation: tuple[FragmentSelector, ...]

    def shared_beats(self) -> set[BeatKey]:
        train = {key for sel in self.train for key in sel.beats}
        return train.intersection(key for sel in self.validation for key in sel.beats)

    def assert_disjoint(self) -> None:
        """Raises LeakageError if any beat is used for both training and validation."""
        shared = self.shared_beats()
        if shared:
            example = sorted(shared)[:3]
            raise LeakageError(
                f"{self.scheme.value}/{self.condition}: {len(shared)} beats in both train and "
                f"validation, e.g. {example}"
            )


class BeatStream:
    """Beats of a subject's tracks laid end to end in the given order.

    Fragments may cross record boundaries; each beat keeps its (record, index) key.
    """

    def __init__(self, subject_id: str, tracks: Sequence[BeatTrack]) -> None:
        self.subject_id = subject_id
        self.lead = tracks[0].lead if tracks else ""
        self.keys: list[BeatKey] = [(t.record_id, i) for t in tracks for i in range(len(t))]
        self.features = (
            np.vstack([t.features for t in tracks])
            if tracks
            else np.empty((0, N_BEAT_FEATURES))
        )

    def __len__(self) -> int:
        return len(self.keys)

    def fragment(self, start: int, length: int) -> tuple[FeatureVector, FragmentSelector]:
        """Feature vector and selector of stream beats [start, start + length).

        Raises:
            InsufficientBeats: The stream ends before the fragment does
        """
        if start + length > len(self):
            raise InsufficientBeats(
                f"subject {self.subject_id}: needs beats [{start}, {start + length}), "
                f"has {len(self)}",
                subject_id=self.subject_id,
                n_beats=len(self),
            )
        record_id, first_beat = self.keys[start]
        vector = FeatureVector(
            values=build_fragment_vector(self.features[start:], length),
            subject_id=self.subject_id,
            source=FragmentSource(record_id=record_id, lead=self.lead, start_beat=first_beat),
        )
        selector = FragmentSelector(
            subject_id=self.subject_id, beats=tuple(self.keys[start : start + length])
        )
        return vector, selector


def track_fragment(
    track: BeatTrack, start: int, length: int
) -> tuple[FeatureVector, FragmentSelector]:
    """Fragment of one track together with its selector."""
    return (
        track.fragment(start, length),
        FragmentSelector.contiguous(track.subject_id, track.record_id, start, length),
    )


def validation_candidates(
    tracks: Sequence[BeatTrack], length: int, reserved: set[BeatKey]
) -> list[tuple[int, int]]:
    """(track position, start beat) of every fragment that avoids the reserved beats."""
    out = []
    for pos, track in enumerate(tracks):
        for start in range(len(track) - length + 1):
            if all((track.record_id, i) not in reserved for i in range(start, start + length)):
                out.append((pos, start))
    return out
