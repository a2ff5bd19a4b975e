"""Synthetic ECG: five Gaussian bumps per beat at RR-jittered beat times plus white noise.

Morphology is drawn once per subject from the master seed, so every session of a
subject shares the same waveform; RR jitter and noise are drawn per session.
"""

import math
from pathlib import Path

import numpy as np
import pandas as pd
import structlog
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.ingest.base import RecordRef
from src.ingest.wfdb import write_record
from src.utils.config import Settings, settings
from src.utils.exceptions import InvalidConfig
from src.utils.models import CONVENTIONAL_LEADS, SignalRecord, SignalSpec
from src.utils.seeding import derive_rng

logger = structlog.get_logger()

MIN_BEATS = 40
# T peaks beyond this would leave the fiducial search range
MAX_T_CENTER_MS = 400.0
HR_CLIP = (0.7, 1.3)
BEAT_CHUNK = 2048
PRE_DOSE_TIMEPOINT = -0.5
SYNTH_ARM = "Dofetilide"


class WaveShape(BaseModel):
    """One Gaussian bump: center relative to R (ms), width (ms, sigma) and amplitude (mV)."""

    model_config = ConfigDict(frozen=True)

    center_ms: float
    width_ms: float = Field(gt=0.0)
    amplitude_mv: float


class SubjectMorphology(BaseModel):
    """P, Q, R, S and T bumps of one subject."""

    model_config = ConfigDict(frozen=True)

    p: WaveShape
    q: WaveShape
    r: WaveShape
    s: WaveShape
    t: WaveShape

    @model_validator(mode="after")
    def _ordered(self) -> "SubjectMorphology":
        centers = [w.center_ms for w in self.waves()]
        if not all(a < b for a, b in zip(centers, centers[1:], strict=False)):
            raise ValueError(f"wave centers must be ordered P<Q<R<S<T, got {centers}")
        return self

    def waves(self) -> tuple[WaveShape, ...]:
        return (self.p, self.q, self.r, self.s, self.t)

    def perturbed(self, t_shift_ms: float, t_scale: float) -> "SubjectMorphology":
        """T wave displaced and rescaled (emulated QT prolongation)."""
        t = WaveShape(
            center_ms=self.t.center_ms + t_shift_ms,
            width_ms=self.t.width_ms,
            amplitude_mv=self.t.amplitude_mv * t_scale,
        )
        return SubjectMorphology(p=self.p, q=self.q, r=self.r, s=self.s, t=t)


class SynthConfig(BaseModel):
    """Generator parameters shared by every subject of a synthetic database."""

    model_config = ConfigDict(frozen=True)

    n_subjects: int = Field(default=10, ge=1, le=1000)
    duration_s: float = Field(default=120.0, gt=0.0)
    fs: float = Field(default=500.0, ge=100.0, le=10_000.0)
    heart_rate_bpm: float = Field(default=60.0, ge=30.0, le=220.0)
    heart_rate_std_bpm: float = Field(default=2.0, ge=0.0, description="Per-beat RR jitter")
    noise_rms_mv: float = Field(default=0.01, ge=0.0)
    t_shift_ms: float = Field(default=0.0, description="T-center displacement")
    t_scale: float = Field(default=1.0, gt=0.0, description="T-amplitude multiplier")
    n_leads: int = Field(default=1, ge=1, le=len(CONVENTIONAL_LEADS))
    drift_mv_per_min: float = Field(default=0.0, description="Baseline slope after the onset")
    drift_onset_s: float = Field(default=0.0, ge=0.0)

    @property
    def expected_beats(self) -> float:
        return self.duration_s * self.heart_rate_bpm / 60.0


class SynthRecord(BaseModel):
    """A generated record with its ground truth."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    record: SignalRecord
    subject_id: str
    r_indices: np.ndarray
    morphology: SubjectMorphology
    lead_gains: tuple[float, ...]

    @property
    def r_seconds(self) -> np.ndarray:
        return self.r_indices / self.record.fs


def subject_name(subject: int) -> str:
    return f"subj{subject:02d}"


def draw_morphology(seed: int, subject: int) -> SubjectMorphology:
    """Seeded per-subject waveform; identical for every session of the subject."""
    rng = derive_rng(seed, "subject", subject)
    u = rng.uniform
    return SubjectMorphology(
        p=WaveShape(center_ms=u(-200, -140), width_ms=u(18, 28), amplitude_mv=u(0.08, 0.25)),
        q=WaveShape(center_ms=u(-45, -30), width_ms=u(5, 9), amplitude_mv=u(-0.25, -0.05)),
        r=WaveShape(center_ms=0.0, width_ms=u(6, 10), amplitude_mv=u(0.8, 1.8)),
        s=WaveShape(center_ms=u(25, 40), width_ms=u(5, 9), amplitude_mv=u(-0.45, -0.1)),
        t=WaveShape(center_ms=u(220, 300), width_ms=u(30, 50), amplitude_mv=u(0.15, 0.5)),
    )


def _lead_gains(seed: int, subject: int, n_leads: int) -> tuple[float, ...]:
    rng = derive_rng(seed, "leads", subject)
    return (1.0, *(float(g) for g in rng.uniform(0.7, 1.3, size=n_leads - 1)))


def _beat_samples(cfg: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    """R sample indices: first beat half an RR in, then jittered RR intervals."""
    mean_rr = 60.0 / cfg.heart_rate_bpm
    n_draw = math.ceil(cfg.duration_s / (mean_rr * HR_CLIP[0])) + 2
    rates = rng.normal(cfg.heart_rate_bpm, cfg.heart_rate_std_bpm, size=n_draw)
    rates = np.clip(rates, cfg.heart_rate_bpm * HR_CLIP[0], cfg.heart_rate_bpm * HR_CLIP[1])
    rr = 60.0 / rates
    times = rr[0] / 2.0 + np.concatenate(([0.0], np.cumsum(rr[1:])))
    indices = np.round(times * cfg.fs).astype(np.int64)
    n_samples = round(cfg.duration_s * cfg.fs)
    return indices[indices < n_samples]


def beat_template(morphology: SubjectMorphology, fs: float) -> tuple[np.ndarray, np.ndarray]:
    """(sample offsets relative to R, waveform in mV) covering every bump to 4 sigma."""
    reach_ms = max(abs(w.center_ms) + 4.0 * w.width_ms for w in morphology.waves())
    half = math.ceil(reach_ms * fs / 1000.0)
    offsets = np.arange(-half, half + 1)
    t_ms = offsets * 1000.0 / fs
    wave = np.zeros(offsets.size)
    for w in morphology.waves():
        wave += w.amplitude_mv * np.exp(-0.5 * ((t_ms - w.center_ms) / w.width_ms) ** 2)
    return offsets, wave


def _render(
    n_samples: int, r_indices: np.ndarray, offsets: np.ndarray, wave: np.ndarray
) -> np.ndarray:
    signal = np.zeros(n_samples)
    for lo in range(0, r_indices.size, BEAT_CHUNK):
        idx = r_indices[lo : lo + BEAT_CHUNK, np.newaxis] + offsets[np.newaxis, :]
        values = np.broadcast_to(wave, idx.shape)
        inside = (idx >= 0) & (idx < n_samples)
        np.add.at(signal, idx[inside], values[inside])
    return signal


def synth_generate(
    cfg: SynthConfig,
    seed: int,
    subject: int = 0,
    session: int = 0,
    record_name: str | None = None,
) -> SynthRecord:
    """Generate one record of one subject.

    Raises:
        InvalidConfig: Too short for 40 beats, or the T perturbation breaks wave order
    """
    if cfg.expected_beats < MIN_BEATS:
        raise InvalidConfig(
            f"{cfg.duration_s:g} s at {cfg.heart_rate_bpm:g} bpm gives fewer than {MIN_BEATS} beats"
        )
    try:
        morphology = draw_morphology(seed, subject).perturbed(cfg.t_shift_ms, cfg.t_scale)
    except ValidationError as e:
        raise InvalidConfig(f"t_shift_ms={cfg.t_shift_ms:g} breaks wave order") from e
    if morphology.t.center_ms > MAX_T_CENTER_MS:
        raise InvalidConfig(f"T center {morphology.t.center_ms:.0f} ms exceeds {MAX_T_CENTER_MS:g}")

    rng = derive_rng(seed, "session", subject, session)
    n_samples = round(cfg.duration_s * cfg.fs)
    r_indices = _beat_samples(cfg, rng)
    offsets, wave = beat_template(morphology, cfg.fs)
    clean = _render(n_samples, r_indices, offsets, wave)

    if cfg.drift_mv_per_min:
        t = np.arange(n_samples) / cfg.fs
        clean = clean + cfg.drift_mv_per_min * np.maximum(0.0, t - cfg.drift_onset_s) / 60.0

    gains = _lead_gains(seed, subject, cfg.n_leads)
    channels = np.vstack(
        [gain * clean + rng.normal(0.0, cfg.noise_rms_mv, n_samples) for gain in gains]
    )
    name = record_name or f"{subject_name(subject)}_s{session}"
    record = SignalRecord.from_specs(
        name,
        cfg.fs,
        channels,
        [
            SignalSpec(file_name=f"{name}.dat", description=lead)
            for lead in CONVENTIONAL_LEADS[: cfg.n_leads]
        ],
        comments=(f"subject: {subject_name(subject)}", f"session: {session}", f"seed: {seed}"),
    )
    return SynthRecord(
        record=record,
        subject_id=subject_name(subject),
        r_indices=r_indices,
        morphology=morphology,
        lead_gains=gains,
    )


def synth_database(
    cfg: SynthConfig,
    seed: int,
    out_dir: str | Path,
    sessions: int = 1,
    post_sessions: int = 0,
    post_t_shift_ms: float = 0.0,
    post_t_scale: float = 1.0,
    app_settings: Settings = settings,
) -> list[RecordRef]:
    """Write a WFDB database of generated subjects with ground-truth files.

    Layout: `<out>/subjNN/subjNN_sK.{hea,dat}` with `subjNN_sK.truth.csv` (R samples) and
    `morphology.json` per subject, plus a RECORDS index. When post_sessions > 0 the post-dose
    sessions carry the T perturbation and a clinical table in the configured column names
    marks sessions as pre-dose (negative timepoint) or post-dose.
    """
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    post_cfg = cfg.model_copy(update={"t_shift_ms": post_t_shift_ms, "t_scale": post_t_scale})

    refs: list[RecordRef] = []
    clinical: list[dict[str, str]] = []
    for subject in range(cfg.n_subjects):
        subject_dir = root / subject_name(subject)
        for session in range(sessions + post_sessions):
            post = session >= sessions
            synth = synth_generate(post_cfg if post else cfg, seed, subject, session)
            base = write_record(synth.record, subject_dir, comments=synth.record.header.comments)
            pd.DataFrame(
                {"r_index": synth.r_indices, "r_seconds": synth.r_seconds}
            ).to_csv(base.with_suffix(".truth.csv"), index=False)
            timepoint = float(session - sessions + 1) if post else PRE_DOSE_TIMEPOINT
            refs.append(
                RecordRef(
                    record_id=f"{subject_dir.name}/{base.name}",
                    subject_id=synth.subject_id,
                    path=base,
                    phase=("post" if post else "pre") if post_sessions else None,
                    timepoint_hours=timepoint if post_sessions else None,
                    arm=SYNTH_ARM if post_sessions else None,
                )
            )
            clinical.append(
                {
                    app_settings.drug_subject_column: synth.subject_id,
                    app_settings.drug_record_column: base.name,
                    app_settings.drug_timepoint_column: f"{timepoint:g}",
                    app_settings.drug_arm_column: SYNTH_ARM,
                }
            )
        (subject_dir / "morphology.json").write_text(
            draw_morphology(seed, subject).model_dump_json(indent=2), encoding="utf-8"
        )

    (root / "RECORDS").write_text("".join(f"{r.record_id}\n" for r in refs), encoding="utf-8")
    if post_sessions:
        pd.DataFrame(clinical).to_csv(root / app_settings.drug_metadata_file, index=False)
    logger.info(
        "Synthetic database written", path=str(root), subjects=cfg.n_subjects, records=len(refs)
    )
    return refs
