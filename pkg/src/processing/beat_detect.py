"""Band-pass filtering, R-peak detection and R-aligned beat windows.

The detector follows the classic Pan-Tompkins chain: band-pass, derivative,
squaring, moving-window integration and an adaptive dual threshold with
search-back. Every detection is then snapped to the raw-signal maximum.
"""

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.signal import butter, find_peaks, sosfiltfilt

from src.utils.config import Settings, settings
from src.utils.exceptions import InvalidBand, SignalTooShort
from src.utils.models import BeatWindow

logger = structlog.get_logger()

FILTER_ORDER = 2
MIN_FILTER_LENGTH = 8
MIN_DETECT_FS = 100.0
MIN_DETECT_SECONDS = 2.0
REFINE_RADIUS_MS = 50.0
SEARCHBACK_RR_FACTOR = 1.66
RR_HISTORY = 8


class DetectorConfig(BaseModel):
    """R-peak detector parameters."""

    model_config = ConfigDict(frozen=True)

    band_low: float = Field(default=5.0, gt=0.0, description="Hz")
    band_high: float = Field(default=15.0, gt=0.0, description="Hz")
    integration_window: float = Field(default=150.0, gt=0.0, description="ms")
    refractory: float = Field(default=200.0, gt=0.0, description="ms")
    threshold_decay: float = Field(default=0.125, gt=0.0, lt=1.0)

    @model_validator(mode="after")
    def _band_order(self) -> "DetectorConfig":
        if self.band_low >= self.band_high:
            raise ValueError("band_low must be below band_high")
        return self

    @classmethod
    def from_settings(cls, cfg: Settings = settings) -> "DetectorConfig":
        return cls(
            band_low=cfg.band_low_hz,
            band_high=cfg.band_high_hz,
            integration_window=cfg.integration_window_ms,
            refractory=cfg.refractory_ms,
            threshold_decay=cfg.threshold_decay,
        )


def _ms_to_samples(ms: float, fs: float) -> int:
    return round(ms * fs / 1000.0)


def bandpass(channel: np.ndarray, fs: float, low: float, high: float) -> np.ndarray:
    """Zero-phase Butterworth band-pass (second-order sections, forward-backward).

    Raises:
        InvalidBand: Unless 0 < low < high < fs/2
        SignalTooShort: Fewer than 8 samples
    """
    if not 0.0 < low < high < fs / 2.0:
        raise InvalidBand(f"band [{low}, {high}] Hz invalid for fs={fs} Hz")
    x = np.asarray(channel, dtype=np.float64)
    if x.size < MIN_FILTER_LENGTH:
        raise SignalTooShort(f"{x.size} samples; band-pass needs {MIN_FILTER_LENGTH}")

    sos = butter(FILTER_ORDER, [low, high], btype="bandpass", fs=fs, output="sos")
    padlen = min(3 * (2 * len(sos) + 1), x.size - 1)
    return np.asarray(sosfiltfilt(sos, x, padlen=padlen))


def _integrated_energy(channel: np.ndarray, fs: float, cfg: DetectorConfig) -> np.ndarray:
    filtered = bandpass(channel, fs, cfg.band_low, cfg.band_high)
    squared = np.gradient(filtered) ** 2
    width = max(1, _ms_to_samples(cfg.integration_window, fs))
    return np.convolve(squared, np.ones(width) / width, mode="same")


def _adaptive_threshold(
    energy: np.ndarray, candidates: np.ndarray, fs: float, refractory: int, decay: float
) -> list[int]:
    """Dual-threshold classification of integrated-energy peaks into signal and noise."""
    learn = energy[: int(MIN_DETECT_SECONDS * fs)]
    spki = float(learn.max()) / 3.0
    npki = float(learn.mean()) / 2.0

    accepted: list[int] = []
    for i, candidate in enumerate(candidates):
        peak = int(candidate)
        thr1 = npki + 0.25 * (spki - npki)

        # Search back for a missed beat when the gap exceeds 1.66 mean RR
        if len(accepted) >= 2:
            rr = np.diff(accepted[-(RR_HISTORY + 1) :])
            if peak - accepted[-1] > SEARCHBACK_RR_FACTOR * rr.mean():
                start = int(np.searchsorted(candidates, accepted[-1] + refractory))
                missed = candidates[start:i]
                missed = missed[peak - missed >= refractory]
                missed = missed[energy[missed] > 0.5 * thr1]
                if missed.size:
                    best = int(missed[np.argmax(energy[missed])])
                    accepted.append(best)
                    spki = 0.25 * float(energy[best]) + 0.75 * spki
                    thr1 = npki + 0.25 * (spki - npki)

        value = float(energy[peak])
        if value > thr1 and (not accepted or peak - accepted[-1] >= refractory):
            accepted.append(peak)
            spki = decay * value + (1.0 - decay) * spki
        else:
            npki = decay * value + (1.0 - decay) * npki
    return accepted


def _refine_to_raw_max(x: np.ndarray, index: int, radius: int) -> int:
    """Move index uphill to a sample that is the maximum of its own ±radius window."""
    current = index
    while True:
        lo = max(0, current - radius)
        hi = min(x.size, current + radius + 1)
        best = lo + int(np.argmax(x[lo:hi]))
        if best == current or x[best] <= x[current]:
            return current
        current = best


def detect_r_peaks(
    channel: np.ndarray, fs: float, cfg: DetectorConfig | None = None
) -> np.ndarray:
    """Detect R peaks, returning ascending sample indices.

    Indices are at least one refractory period apart and each one is the maximum of
    the raw channel within ±50 ms.

    Raises:
        SignalTooShort: fs below 100 Hz or less than 2 s of signal
    """
    cfg = cfg or DetectorConfig()
    x = np.asarray(channel, dtype=np.float64)
    if fs < MIN_DETECT_FS:
        raise SignalTooShort(f"fs={fs} Hz is below the {MIN_DETECT_FS:.0f} Hz detector minimum")
    if x.size < MIN_DETECT_SECONDS * fs:
        raise SignalTooShort(
            f"{x.size / fs:.2f} s of signal; detector needs {MIN_DETECT_SECONDS} s"
        )

    energy = _integrated_energy(x, fs, cfg)
    peak_energy = float(energy.max())
    if peak_energy <= np.finfo(np.float64).tiny:
        return np.empty(0, dtype=np.int64)

    refractory = max(1, _ms_to_samples(cfg.refractory, fs))
    candidates, _ = find_peaks(energy, distance=refractory, height=0.01 * peak_energy)
    accepted = _adaptive_threshold(energy, candidates, fs, refractory, cfg.threshold_decay)

    radius = _ms_to_samples(REFINE_RADIUS_MS, fs)
    refined = sorted({_refine_to_raw_max(x, p, radius) for p in accepted})

    peaks: list[int] = []
    for idx in refined:
        if peaks and idx - peaks[-1] < refractory:
            if x[idx] > x[peaks[-1]]:
                peaks[-1] = idx
            continue
        peaks.append(idx)
    return np.asarray(peaks, dtype=np.int64)


def window_geometry(fs: float, pre_span_ms: float, post_span_ms: float) -> tuple[int, int]:
    """(samples before R, total window length) for a record's sampling rate."""
    pre = _ms_to_samples(pre_span_ms, fs)
    post = _ms_to_samples(post_span_ms, fs)
    return pre, pre + post + 1


def segment_beats(
    channel: np.ndarray,
    fs: float,
    r_peaks: np.ndarray | list[int],
    pre_span_ms: float = 250.0,
    post_span_ms: float = 420.0,
) -> list[BeatWindow]:
    """Cut one uniform-length window around each R peak.

    Peaks whose window would cross either end of the channel are dropped.
    """
    x = np.asarray(channel, dtype=np.float64)
    pre, total = window_geometry(fs, pre_span_ms, post_span_ms)
    post = total - pre - 1

    windows = []
    dropped = 0
    for r in np.asarray(r_peaks, dtype=np.int64):
        r = int(r)
        if r - pre < 0 or r + post >= x.size:
            dropped += 1
            continue
        windows.append(
            BeatWindow(
                r_index=r,
                r_offset=pre,
                fs=fs,
                pre_span_ms=pre_span_ms,
                post_span_ms=post_span_ms,
                samples=x[r - pre : r + post + 1],
            )
        )
    if dropped:
        logger.debug("Beats dropped at edges", dropped=dropped, kept=len(windows))
    return windows
