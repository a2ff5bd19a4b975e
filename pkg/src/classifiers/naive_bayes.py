"""Gaussian and Bernoulli naive Bayes."""

from typing import ClassVar

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


def _log_priors(y: np.ndarray, n_classes: int) -> np.ndarray:
    counts = np.bincount(y, minlength=n_classes).astype(np.float64)
    return np.asarray(np.log(counts / counts.sum()))


class GaussianNBParams(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    var_smoothing: float = Field(default=1e-9, gt=0.0)


class GaussianNB:
    """Per-class independent normal likelihoods.

    Every class variance has var_smoothing times the largest feature variance added to it,
    so a constant feature gets exactly that epsilon.
    """

    Params: ClassVar[type[BaseModel]] = GaussianNBParams

    def __init__(self, params: GaussianNBParams) -> None:
        self.params = params
        self.theta = np.empty((0, 0))
        self.var = np.empty((0, 0))
        self.log_prior = np.empty(0)

    def fit(
        self, X: np.ndarray, y: np.ndarray, n_classes: int, rng: np.random.Generator  # noqa: N803
    ) -> None:
        max_var = float(X.var(axis=0).max())
        epsilon = self.params.var_smoothing * (max_var if max_var > 0 else 1.0)
        self.theta = np.vstack([X[y == c].mean(axis=0) for c in range(n_classes)])
        self.var = np.vstack([X[y == c].var(axis=0) for c in range(n_classes)]) + epsilon
        self.log_prior = _log_priors(y, n_classes)

    def decision_scores(self, X: np.ndarray) -> np.ndarray:  # noqa: N803
        norm = -0.5 * np.log(2.0 * np.pi * self.var).sum(axis=1)
        precision = 1.0 / self.var
        quad = (
            (X**2) @ precision.T
            - 2.0 * X @ (self.theta * precision).T
            + (self.theta**2 * precision).sum(axis=1)
        )
        return np.asarray(self.log_prior + norm - 0.5 * quad)

    def get_state(self) -> dict[str, np.ndarray]:
        return {"theta": self.theta, "var": self.var, "log_prior": self.log_prior}

    def set_state(self, state: dict[str, np.ndarray]) -> None:
        self.theta = state["theta"]
        self.var = state["var"]
        self.log_prior = state["log_prior"]


class BernoulliNBParams(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    alpha: float = Field(default=1.0, gt=0.0, description="Laplace smoothing")


class BernoulliNB:
    """Multivariate Bernoulli naive Bayes on features binarised at the training median."""

    Params: ClassVar[type[BaseModel]] = BernoulliNBParams

    def __init__(self, params: BernoulliNBParams) -> None:
        self.params = params
        self.threshold = np.empty(0)
        self.log_p = np.empty((0, 0))
        self.log_not_p = np.empty((0, 0))
        self.log_prior = np.empty(0)

    def binarize(self, X: np.ndarray) -> np.ndarray:  # noqa: N803
        return (X > self.threshold).astype(np.float64)

    def fit(
        self, X: np.ndarray, y: np.ndarray, n_classes: int, rng: np.random.Generator  # noqa: N803
    ) -> None:
        self.threshold = np.median(X, axis=0)
        B = self.binarize(X)  # noqa: N806
        alpha = self.params.alpha
        ones = np.vstack([B[y == c].sum(axis=0) for c in range(n_classes)])
        counts = np.bincount(y, minlength=n_classes).astype(np.float64)[:, np.newaxis]
        p = (ones + alpha) / (counts + 2.0 * alpha)
        self.log_p = np.log(p)
        self.log_not_p = np.log1p(-p)
        self.log_prior = _log_priors(y, n_classes)

    def decision_scores(self, X: np.ndarray) -> np.ndarray:  # noqa: N803
        B = self.binarize(X)  # noqa: N806
        return np.asarray(
            self.log_prior + B @ self.log_p.T + (1.0 - B) @ self.log_not_p.T
        )

    def get_state(self) -> dict[str, np.ndarray]:
        return {
            "threshold": self.threshold,
            "log_p": self.log_p,
            "log_not_p": self.log_not_p,
            "log_prior": self.log_prior,
        }

    def set_state(self, state: dict[str, np.ndarray]) -> None:
        self.threshold = state["threshold"]
        self.log_p = state["log_p"]
        self.log_not_p = state["log_not_p"]
        self.log_prior = state["log_prior"]
