"""Shared pytest fixtures for all tests."""

from collections.abc import Callable
from pathlib import Path

import numpy as np
import pytest

from src.experiments.synth import SynthConfig, SynthRecord, synth_database, synth_generate
from src.utils.models import Dataset

SYNTH_SEED = 7


@pytest.fixture
def quiet_config() -> SynthConfig:
    """Noise-free 60 bpm, 60 s single-lead generator config without RR jitter."""
    return SynthConfig(
        n_subjects=1,
        duration_s=60.0,
        fs=500.0,
        heart_rate_bpm=60.0,
        heart_rate_std_bpm=0.0,
        noise_rms_mv=0.0,
    )


@pytest.fixture
def synth_record() -> SynthRecord:
    """One noisy 60 s record of subject 0."""
    return synth_generate(SynthConfig(duration_s=60.0, fs=500.0), seed=SYNTH_SEED)


@pytest.fixture
def make_blobs() -> Callable[..., Dataset]:
    """Factory for labelled Gaussian blobs, one blob per class."""

    def _make(
        n_classes: int = 3,
        per_class: int = 20,
        dim: int = 4,
        spread: float = 0.3,
        seed: int = 0,
    ) -> Dataset:
        rng = np.random.default_rng(seed)
        centers = rng.normal(0.0, 5.0, size=(n_classes, dim))
        noise = rng.normal(0.0, spread, size=(n_classes, per_class, dim))
        X = (centers[:, np.newaxis, :] + noise).reshape(-1, dim)  # noqa: N806
        y = [f"s{c}" for c in range(n_classes) for _ in range(per_class)]
        return Dataset.from_arrays(X, y)

    return _make


@pytest.fixture(scope="session")
def lead_db(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """Ten subjects, 12 leads, two 60 s sessions each."""
    root = tmp_path_factory.mktemp("lead_db")
    cfg = SynthConfig(n_subjects=10, duration_s=60.0, fs=500.0, n_leads=12)
    synth_database(cfg, SYNTH_SEED, root, sessions=2)
    return root


@pytest.fixture(scope="session")
def holter_db(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """Ten stationary subjects, one 5 minute record each."""
    root = tmp_path_factory.mktemp("holter_db")
    cfg = SynthConfig(n_subjects=10, duration_s=300.0, fs=500.0)
    synth_database(cfg, SYNTH_SEED, root)
    return root


@pytest.fixture(scope="session")
def drift_db(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """Like holter_db, but the baseline climbs 5 mV/min from 150 s on."""
    root = tmp_path_factory.mktemp("drift_db")
    cfg = SynthConfig(
        n_subjects=10,
        duration_s=300.0,
        fs=500.0,
        drift_mv_per_min=5.0,
        drift_onset_s=150.0,
    )
    synth_database(cfg, SYNTH_SEED, root)
    return root


@pytest.fixture(scope="session")
def drug_db(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """Ten subjects with one pre-dose and one post-dose session; post T delayed 60 ms at 0.5x."""
    root = tmp_path_factory.mktemp("drug_db")
    cfg = SynthConfig(n_subjects=10, duration_s=60.0, fs=500.0)
    synth_database(
        cfg, SYNTH_SEED, root, sessions=1, post_sessions=1, post_t_shift_ms=60.0, post_t_scale=0.5
    )
    return root


@pytest.fixture(scope="session")
def placebo_like_db(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """Pre and post sessions drawn from the same distribution."""
    root = tmp_path_factory.mktemp("placebo_like_db")
    cfg = SynthConfig(n_subjects=10, duration_s=60.0, fs=500.0)
    synth_database(cfg, SYNTH_SEED, root, sessions=1, post_sessions=1)
    return root
