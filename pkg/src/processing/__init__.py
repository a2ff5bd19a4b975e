"""Signal processing: detection, fiducials and fragment features."""

from src.processing.beat_detect import DetectorConfig, bandpass, detect_r_peaks, segment_beats
from src.processing.features import (
    apply_standardizer,
    build_fragment_vector,
    fit_standardizer,
    fragment_stream,
    read_dataset,
    write_dataset,
)
from src.processing.fiducials import beat_features, locate_fiducials
from src.processing.pipeline import BeatTrack, PipelineConfig, extract_beat_track

__all__ = [
    "BeatTrack",
    "DetectorConfig",
    "PipelineConfig",
    "apply_standardizer",
    "bandpass",
    "beat_features",
    "build_fragment_vector",
    "detect_r_peaks",
    "extract_beat_track",
    "fit_standardizer",
    "fragment_stream",
    "locate_fiducials",
    "read_dataset",
    "segment_beats",
    "write_dataset",
]
