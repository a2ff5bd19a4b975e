"""Registry of classifier families, their parameter models and CLI names."""

import json
from collections.abc import Iterable

import structlog
from pydantic import BaseModel, ValidationError

from src.classifiers.base import ClassifierKind, ClassifierSpec, Estimator, HyperValue
from src.classifiers.linear import LinearDiscriminant, LogisticRegression, RidgeClassifier
from src.classifiers.mlp import Mlp
from src.classifiers.naive_bayes import BernoulliNB, GaussianNB
from src.classifiers.neighbors import Knn, NearestCentroid
from src.classifiers.trees import DecisionTree, ExtraTrees, RandomForest
from src.utils.exceptions import ConfigurationError, InvalidHyperparameter

logger = structlog.get_logger()

ESTIMATORS: dict[ClassifierKind, type] = {
    ClassifierKind.KNN: Knn,
    ClassifierKind.NEAREST_CENTROID: NearestCentroid,
    ClassifierKind.GAUSSIAN_NB: GaussianNB,
    ClassifierKind.BERNOULLI_NB: BernoulliNB,
    ClassifierKind.LOGISTIC_REGRESSION: LogisticRegression,
    ClassifierKind.LDA: LinearDiscriminant,
    ClassifierKind.RIDGE: RidgeClassifier,
    ClassifierKind.DECISION_TREE: DecisionTree,
    ClassifierKind.RANDOM_FOREST: RandomForest,
    ClassifierKind.EXTRA_TREES: ExtraTrees,
    ClassifierKind.MLP: Mlp,
}

DISPLAY_NAMES: dict[str, str] = {
    "mlp": "multi-layer perceptron",
    "bernoulli-nb": "naive Bayes (Bernoulli)",
    "gaussian-nb": "naive Bayes (Gaussian)",
    "tree": "decision tree",
    "extra-trees": "extra-trees",
    "knn": "k-nearest neighbours",
    "lda": "linear discriminant analysis",
    "linear-svc": "linear support vector classifier",
    "logreg": "logistic regression",
    "centroid": "nearest centroid",
    "forest": "random forest",
    "ridge": "ridge classifier",
    "svm": "support vector machine",
    "gmm": "Gaussian mixture model",
    "ridge-cv": "ridge classifier with cross-validation",
}

# Accepted as method names; they produce not-implemented report rows
EXCLUDED_METHODS: tuple[str, ...] = ("linear-svc", "svm", "gmm", "ridge-cv")

DEFAULT_METHODS: tuple[str, ...] = tuple(kind.value for kind in ClassifierKind)


def validate_params(kind: ClassifierKind, hyperparameters: dict[str, HyperValue]) -> BaseModel:
    """Validate hyperparameters against the family's parameter model.

    Raises:
        InvalidHyperparameter: Unknown names or out-of-range values
    """
    params_model: type[BaseModel] = ESTIMATORS[kind].Params
    try:
        return params_model(**hyperparameters)
    except ValidationError as e:
        raise InvalidHyperparameter(f"{kind.value}: {e}") from e


def build_estimator(spec: ClassifierSpec) -> Estimator:
    cls = ESTIMATORS[spec.kind]
    estimator: Estimator = cls(validate_params(spec.kind, spec.hyperparameters))
    return estimator


def is_excluded(name: str) -> bool:
    return name in EXCLUDED_METHODS


def parse_method_names(names: str | Iterable[str]) -> list[str]:
    """Split and check method names, keeping order and dropping duplicates.

    Raises:
        ConfigurationError: Unknown method name (message lists the valid ones)
    """
    items = names.split(",") if isinstance(names, str) else list(names)
    valid = set(DEFAULT_METHODS) | set(EXCLUDED_METHODS)
    out: list[str] = []
    for raw in items:
        name = raw.strip().lower()
        if not name:
            continue
        if name == "all":
            out.extend(m for m in DEFAULT_METHODS if m not in out)
            continue
        if name not in valid:
            raise ConfigurationError(
                f"unknown method '{name}'; valid methods: "
                f"{', '.join((*DEFAULT_METHODS, *EXCLUDED_METHODS))}"
            )
        if name not in out:
            out.append(name)
    if not out:
        raise ConfigurationError("no methods given")
    return out


def _coerce(text: str) -> HyperValue:
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        return text
    if isinstance(value, int | float | str | bool) or value is None:
        return value
    return text


def parse_param_overrides(items: Iterable[str]) -> dict[str, dict[str, HyperValue]]:
    """Parse `method.key=value` overrides into per-method hyperparameter maps.

    Raises:
        ConfigurationError: Malformed item or unknown method
    """
    overrides: dict[str, dict[str, HyperValue]] = {}
    for item in items:
        target, sep, raw_value = item.partition("=")
        method, dot, key = target.partition(".")
        if not sep or not dot or not key:
            raise ConfigurationError(f"expected METHOD.KEY=VALUE, got '{item}'")
        method = method.strip().lower()
        if method not in DEFAULT_METHODS:
            raise ConfigurationError(f"--param names unknown method '{method}'")
        overrides.setdefault(method, {})[key.strip()] = _coerce(raw_value.strip())
    return overrides


def make_spec(
    name: str,
    overrides: dict[str, dict[str, HyperValue]] | None = None,
    seed: int = 0,
) -> ClassifierSpec:
    """ClassifierSpec for an implemented method name."""
    hyper = (overrides or {}).get(name, {})
    try:
        return ClassifierSpec(kind=ClassifierKind(name), hyperparameters=hyper, seed=seed)
    except ValidationError as e:
        raise InvalidHyperparameter(f"{name}: {e}") from e
