"""Classifiers implemented from scratch behind one fit/predict contract."""

from src.classifiers.base import (
    ClassifierKind,
    ClassifierSpec,
    TrainedModel,
    accuracy,
    decision_scores,
    fit,
    predict,
    predict_batch,
    predict_proba,
)
from src.classifiers.persistence import load_model, save_model
from src.classifiers.registry import (
    DEFAULT_METHODS,
    EXCLUDED_METHODS,
    make_spec,
    parse_method_names,
    parse_param_overrides,
)

__all__ = [
    "DEFAULT_METHODS",
    "EXCLUDED_METHODS",
    "ClassifierKind",
    "ClassifierSpec",
    "TrainedModel",
    "accuracy",
    "decision_scores",
    "fit",
    "load_model",
    "make_spec",
    "parse_method_names",
    "parse_param_overrides",
    "predict",
    "predict_batch",
    "predict_proba",
    "save_model",
]
