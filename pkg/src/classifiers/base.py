"""Uniform fit/predict contract shared by every classifier."""

import hashlib
import json
from enum import Enum
from typing import Any, ClassVar, Protocol

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.utils.exceptions import (
    ClassifierError,
    DegenerateTrainingSet,
    DimensionMismatch,
    EmptyDataset,
    NonFiniteFeature,
)
from src.utils.models import Dataset

logger = structlog.get_logger()

HyperValue = int | float | str | bool | None


class ClassifierKind(str, Enum):
    """Implemented classifier families, valued by their CLI names."""

    KNN = "knn"
    NEAREST_CENTROID = "centroid"
    GAUSSIAN_NB = "gaussian-nb"
    BERNOULLI_NB = "bernoulli-nb"
    LOGISTIC_REGRESSION = "logreg"
    LDA = "lda"
    RIDGE = "ridge"
    DECISION_TREE = "tree"
    RANDOM_FOREST = "forest"
    EXTRA_TREES = "extra-trees"
    MLP = "mlp"


class Estimator(Protocol):
    """Fitted state and scoring of one classifier family.

    Estimators see integer class indices 0..n_classes-1; label handling lives in
    TrainedModel.
    """

    Params: ClassVar[type[BaseModel]]

    def fit(
        self, X: np.ndarray, y: np.ndarray, n_classes: int, rng: np.random.Generator  # noqa: N803
    ) -> None: ...

    def decision_scores(self, X: np.ndarray) -> np.ndarray:  # noqa: N803
        """(n_queries, n_classes) scores; larger is more likely."""
        ...

    def get_state(self) -> dict[str, np.ndarray]: ...

    def set_state(self, state: dict[str, np.ndarray]) -> None: ...


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return np.asarray(exp / exp.sum(axis=1, keepdims=True))


def one_hot(y: np.ndarray, n_classes: int) -> np.ndarray:
    return np.eye(n_classes)[np.asarray(y, dtype=np.int64)]


class ClassifierSpec(BaseModel):
    """Classifier family, hyperparameters and seed."""

    model_config = ConfigDict(frozen=True)

    kind: ClassifierKind
    hyperparameters: dict[str, HyperValue] = Field(default_factory=dict)
    seed: int = Field(default=0, ge=0, lt=2**64)

    @model_validator(mode="after")
    def _validate_hyperparameters(self) -> "ClassifierSpec":
        from src.classifiers.registry import validate_params

        validate_params(self.kind, self.hyperparameters)
        return self

    def with_seed(self, seed: int) -> "ClassifierSpec":
        return self.model_copy(update={"seed": seed})

    @property
    def name(self) -> str:
        return self.kind.value


class TrainedModel(BaseModel):
    """A fitted classifier; immutable and safe to share across threads."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    spec: ClassifierSpec
    classes: tuple[str, ...] = Field(min_length=2)
    n_features: int = Field(ge=1)
    train_fingerprint: str
    estimator: Any = Field(repr=False)

    @model_validator(mode="after")
    def _sorted_classes(self) -> "TrainedModel":
        if list(self.classes) != sorted(self.classes):
            raise ValueError("classes must be sorted")
        return self


def training_fingerprint(
    spec: ClassifierSpec, X: np.ndarray, labels: np.ndarray  # noqa: N803
) -> str:
    """sha256 over the spec, the feature bytes and the labels."""
    digest = hashlib.sha256()
    digest.update(json.dumps(spec.model_dump(mode="json"), sort_keys=True).encode())
    digest.update(np.ascontiguousarray(X, dtype=np.float64).tobytes())
    digest.update("\x1f".join(str(label) for label in labels).encode())
    return digest.hexdigest()


def fit(spec: ClassifierSpec, train: Dataset) -> TrainedModel:
    """Fit a classifier; deterministic given (spec, seed, train).

    Raises:
        EmptyDataset: No training vectors
        DegenerateTrainingSet: Fewer than two classes
        NonFiniteFeature: NaN or infinite features
    """
    from src.classifiers.registry import build_estimator

    if len(train) == 0:
        raise EmptyDataset("training set is empty")
    X = train.X  # noqa: N806
    if not np.all(np.isfinite(X)):
        raise NonFiniteFeature("training features must be finite")
    classes = tuple(sorted({str(label) for label in train.y}))
    if len(classes) < 2:
        raise DegenerateTrainingSet(f"need at least two classes, got {list(classes)}")

    y = np.searchsorted(np.array(classes, dtype=object), train.y).astype(np.int64)
    estimator = build_estimator(spec)
    estimator.fit(X, y, len(classes), np.random.default_rng(spec.seed))

    model = TrainedModel(
        spec=spec,
        classes=classes,
        n_features=X.shape[1],
        train_fingerprint=training_fingerprint(spec, X, train.y),
        estimator=estimator,
    )
    logger.debug(
        "Classifier fitted", method=spec.name, classes=len(classes), vectors=len(train)
    )
    return model


def _as_queries(model: TrainedModel, x: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(x, dtype=np.float64))  # noqa: N806
    if X.shape[1] != model.n_features:
        raise DimensionMismatch(
            f"query has {X.shape[1]} features, model was trained on {model.n_features}"
        )
    if not np.all(np.isfinite(X)):
        raise NonFiniteFeature("query features must be finite")
    return X


def decision_scores(model: TrainedModel, x: np.ndarray) -> np.ndarray:
    """Per-class scores, aligned with model.classes (1-D for a single query)."""
    X = _as_queries(model, x)  # noqa: N806
    scores = np.asarray(model.estimator.decision_scores(X), dtype=np.float64)
    return scores[0] if np.ndim(x) == 1 else scores


def predict_batch(model: TrainedModel, X: np.ndarray) -> list[str]:  # noqa: N803
    """Labels for a batch; score ties go to the class earliest in sorted order."""
    scores = model.estimator.decision_scores(_as_queries(model, X))
    return [model.classes[i] for i in np.argmax(scores, axis=1)]


def predict(model: TrainedModel, x: np.ndarray) -> str:
    """Label of one feature vector.

    Raises:
        DimensionMismatch: If x has a different dimension than the training set
    """
    return predict_batch(model, np.asarray(x, dtype=np.float64).reshape(1, -1))[0]


def predict_proba(model: TrainedModel, x: np.ndarray) -> np.ndarray:
    """Class probabilities for softmax-based models (logistic regression, MLP)."""
    proba = getattr(model.estimator, "predict_proba", None)
    if proba is None:
        raise ClassifierError(f"{model.spec.name} has no probability outputs")
    out = np.asarray(proba(_as_queries(model, x)))
    return out[0] if np.ndim(x) == 1 else out


def accuracy(model: TrainedModel, data: Dataset) -> float:
    """Fraction of vectors whose predicted label equals their subject.

    Raises:
        EmptyDataset: If data has no vectors
    """
    if len(data) == 0:
        raise EmptyDataset("cannot score an empty dataset")
    predicted = predict_batch(model, data.X)
    correct = sum(p == str(t) for p, t in zip(predicted, data.y, strict=True))
    return correct / len(data)
