"""Unit tests for per-channel beat tracks."""

import numpy as np
import pytest

from src.experiments.synth import SynthConfig, synth_generate
from src.processing.pipeline import BeatTrack, PipelineConfig, extract_beat_track
from src.utils.config import Settings
from src.utils.exceptions import NotEnoughBeats

pytestmark = pytest.mark.unit


@pytest.fixture
def track(synth_record) -> BeatTrack:
    return extract_beat_track(synth_record.record, "I", subject_id="subj00", record_id="r0")


class TestExtractBeatTrack:
    def test_one_row_per_segmentable_beat(self, synth_record, track: BeatTrack) -> None:
        """Every generated beat with a full window becomes one nine-feature row."""
        fs = synth_record.record.fs
        n = synth_record.record.n_samples
        truth = synth_record.r_indices
        full = truth[(truth >= 0.25 * fs) & (truth + 0.42 * fs < n)]
        assert track.features.shape == (len(full), 9)
        np.testing.assert_allclose(track.r_indices, full, atol=0.01 * fs)

    @pytest.mark.parametrize("fs", [150.0, 175.0, 147.0, 360.0])
    def test_rates_where_spans_round_unevenly(self, fs: float) -> None:
        synth = synth_generate(SynthConfig(duration_s=60.0, fs=fs), seed=7)
        track = extract_beat_track(synth.record, "I")
        assert len(track) >= 55
        assert np.all(np.isfinite(track.features))

    def test_metadata(self, track: BeatTrack) -> None:
        assert (track.record_id, track.subject_id, track.lead) == ("r0", "subj00", "I")
        assert track.fs == 500.0
        assert track.duration_s == pytest.approx(60.0)

    def test_fragment(self, track: BeatTrack) -> None:
        vector = track.fragment(5)
        assert vector.dimension == 180
        assert vector.subject_id == "subj00"
        assert vector.source is not None and vector.source.start_beat == 5
        np.testing.assert_array_equal(vector.values[:9], track.features[5])

    def test_fragment_past_the_end(self, track: BeatTrack) -> None:
        with pytest.raises(NotEnoughBeats):
            track.fragment(len(track) - 10)

    def test_first_beat_at_or_after(self, track: BeatTrack) -> None:
        i = track.first_beat_at_or_after(30.0)
        assert track.r_seconds[i] >= 30.0
        assert track.r_seconds[i - 1] < 30.0

    def test_lead_name_resolved_case_insensitively(self, synth_record) -> None:
        assert extract_beat_track(synth_record.record, "i").lead == "I"


class TestPipelineConfig:
    def test_from_settings(self) -> None:
        cfg = PipelineConfig.from_settings(Settings(_env_file=None, fragment_len=10))
        assert cfg.fragment_len == 10
        assert cfg.pre_span_ms == 250.0
        assert cfg.detector.integration_window == 150.0
