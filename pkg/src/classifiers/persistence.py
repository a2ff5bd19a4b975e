"""Versioned .npz model files: a JSON header plus the estimator's arrays."""

import json
from pathlib import Path

import numpy as np
import structlog
from pydantic import ValidationError

from src.classifiers.base import ClassifierSpec, TrainedModel
from src.classifiers.registry import build_estimator
from src.utils.exceptions import ModelFormatError

logger = structlog.get_logger()

FORMAT_NAME = "heartprint-model"
FORMAT_VERSION = 1
_META_KEY = "__meta__"
_STATE_PREFIX = "state."


def save_model(model: TrainedModel, path: str | Path) -> Path:
    """Write a model; the file never needs pickling to be read back."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    meta = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "spec": model.spec.model_dump(mode="json"),
        "classes": list(model.classes),
        "n_features": model.n_features,
        "train_fingerprint": model.train_fingerprint,
    }
    arrays = {
        f"{_STATE_PREFIX}{name}": np.asarray(value)
        for name, value in model.estimator.get_state().items()
    }
    header = np.frombuffer(json.dumps(meta, sort_keys=True).encode("utf-8"), dtype=np.uint8)
    with out.open("wb") as fh:
        np.savez(fh, **{_META_KEY: header}, **arrays)
    logger.info("Model saved", path=str(out), method=model.spec.name)
    return out


def load_model(path: str | Path) -> TrainedModel:
    """Read a model written by save_model.

    Raises:
        ModelFormatError: Unreadable file, foreign format or unsupported version
    """
    src = Path(path)
    try:
        with np.load(src, allow_pickle=False) as archive:
            meta = json.loads(archive[_META_KEY].tobytes().decode("utf-8"))
            state = {
                key.removeprefix(_STATE_PREFIX): archive[key]
                for key in archive.files
                if key.startswith(_STATE_PREFIX)
            }
    except (OSError, ValueError, KeyError) as e:
        raise ModelFormatError(f"{src}: not a model file ({e})") from e

    if meta.get("format") != FORMAT_NAME:
        raise ModelFormatError(f"{src}: unknown format {meta.get('format')!r}")
    if meta.get("version") != FORMAT_VERSION:
        raise ModelFormatError(f"{src}: unsupported version {meta.get('version')!r}")

    try:
        spec = ClassifierSpec.model_validate(meta["spec"])
        estimator = build_estimator(spec)
        estimator.set_state(state)
        return TrainedModel(
            spec=spec,
            classes=tuple(meta["classes"]),
            n_features=int(meta["n_features"]),
            train_fingerprint=str(meta["train_fingerprint"]),
            estimator=estimator,
        )
    except (KeyError, ValidationError) as e:
        raise ModelFormatError(f"{src}: incomplete model file ({e})") from e
