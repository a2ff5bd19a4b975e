"""Linear classifiers: multinomial logistic regression, shrinkage LDA and ridge."""

from typing import ClassVar

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field

from src.classifiers.base import one_hot, softmax

logger = structlog.get_logger()


def _with_bias(X: np.ndarray) -> np.ndarray:  # noqa: N803
    return np.hstack([np.ones((X.shape[0], 1)), X])


def loss_and_gradient(
    W: np.ndarray,  # noqa: N803
    X: np.ndarray,  # noqa: N803
    Y: np.ndarray,  # noqa: N803
    l2: float,
) -> tuple[float, np.ndarray]:
    """Mean cross-entropy plus (l2/2)·||W||² over non-bias rows, and its gradient.

    W has shape (d + 1, n_classes); row 0 is the bias.
    """
    Xb = _with_bias(X)  # noqa: N806
    logits = Xb @ W
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_proba = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    n = X.shape[0]

    penalty = W.copy()
    penalty[0] = 0.0
    loss = -float((Y * log_proba).sum()) / n + 0.5 * l2 * float((penalty**2).sum())
    grad = Xb.T @ (np.exp(log_proba) - Y) / n + l2 * penalty
    return loss, grad


class LogisticRegressionParams(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    learning_rate: float = Field(
        default=1.0, gt=0.0, le=2.0, description="Step as a fraction of 1/Lipschitz"
    )
    max_iter: int = Field(default=5000, ge=1)
    tol: float = Field(default=1e-6, gt=0.0, description="Gradient-norm stopping threshold")
    l2: float | None = Field(default=None, ge=0.0, description="None means 1/n_train")


class LogisticRegression:
    """Multinomial softmax regression fitted by full-batch gradient descent."""

    Params: ClassVar[type[BaseModel]] = LogisticRegressionParams

    def __init__(self, params: LogisticRegressionParams) -> None:
        self.params = params
        self.W = np.empty((0, 0))
        self.n_iter = 0

    def fit(
        self, X: np.ndarray, y: np.ndarray, n_classes: int, rng: np.random.Generator  # noqa: N803
    ) -> None:
        n = X.shape[0]
        Y = one_hot(y, n_classes)  # noqa: N806
        l2 = self.params.l2 if self.params.l2 is not None else 1.0 / n
        lipschitz = 0.5 * float(np.linalg.norm(_with_bias(X), 2)) ** 2 / n + l2
        step = self.params.learning_rate / lipschitz

        W = np.zeros((X.shape[1] + 1, n_classes))  # noqa: N806
        grad_norm = np.inf
        iteration = 0
        for iteration in range(1, self.params.max_iter + 1):
            _, grad = loss_and_gradient(W, X, Y, l2)
            grad_norm = float(np.linalg.norm(grad))
            if grad_norm < self.params.tol:
                break
            W -= step * grad
        self.W = W
        self.n_iter = iteration
        logger.debug("Logistic regression fitted", iterations=iteration, grad_norm=grad_norm)

    def decision_scores(self, X: np.ndarray) -> np.ndarray:  # noqa: N803
        return np.asarray(_with_bias(X) @ self.W)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:  # noqa: N803
        return softmax(self.decision_scores(X))

    def get_state(self) -> dict[str, np.ndarray]:
        return {"W": self.W}

    def set_state(self, state: dict[str, np.ndarray]) -> None:
        self.W = state["W"]


class LdaParams(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    shrinkage: float = Field(default=0.1, ge=0.0, le=1.0)


class LinearDiscriminant:
    """Linear discriminant analysis with the pooled covariance shrunk toward a scaled identity.

    A pooled covariance with zero trace (one vector per class) is replaced by the identity.
    """

    Params: ClassVar[type[BaseModel]] = LdaParams

    def __init__(self, params: LdaParams) -> None:
        self.params = params
        self.coef = np.empty((0, 0))
        self.intercept = np.empty(0)

    def fit(
        self, X: np.ndarray, y: np.ndarray, n_classes: int, rng: np.random.Generator  # noqa: N803
    ) -> None:
        n, d = X.shape
        means = np.vstack([X[y == c].mean(axis=0) for c in range(n_classes)])
        centered = X - means[y]
        pooled = centered.T @ centered / n
        trace = float(np.trace(pooled))
        if trace > 0:
            gamma = self.params.shrinkage
            sigma = (1.0 - gamma) * pooled + gamma * trace / d * np.eye(d)
        else:
            sigma = np.eye(d)

        counts = np.bincount(y, minlength=n_classes).astype(np.float64)
        solved = np.linalg.solve(sigma, means.T)  # (d, k)
        self.coef = solved
        self.intercept = -0.5 * np.einsum("kd,dk->k", means, solved) + np.log(counts / n)

    def decision_scores(self, X: np.ndarray) -> np.ndarray:  # noqa: N803
        return np.asarray(X @ self.coef + self.intercept)

    def get_state(self) -> dict[str, np.ndarray]:
        return {"coef": self.coef, "intercept": self.intercept}

    def set_state(self, state: dict[str, np.ndarray]) -> None:
        self.coef = state["coef"]
        self.intercept = state["intercept"]


class RidgeParams(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    alpha: float = Field(default=1.0, gt=0.0)


class RidgeClassifier:
    """One-vs-rest least squares on ±1 targets with an unpenalised intercept."""

    Params: ClassVar[type[BaseModel]] = RidgeParams

    def __init__(self, params: RidgeParams) -> None:
        self.params = params
        self.coef = np.empty((0, 0))
        self.intercept = np.empty(0)

    def fit(
        self, X: np.ndarray, y: np.ndarray, n_classes: int, rng: np.random.Generator  # noqa: N803
    ) -> None:
        n, d = X.shape
        Y = 2.0 * one_hot(y, n_classes) - 1.0  # noqa: N806
        x_mean = X.mean(axis=0)
        y_mean = Y.mean(axis=0)
        Xc = X - x_mean  # noqa: N806
        Yc = Y - y_mean  # noqa: N806
        alpha = self.params.alpha
        if n < d:
            # Dual form: the n x n system is smaller
            self.coef = Xc.T @ np.linalg.solve(Xc @ Xc.T + alpha * np.eye(n), Yc)
        else:
            self.coef = np.linalg.solve(Xc.T @ Xc + alpha * np.eye(d), Xc.T @ Yc)
        self.intercept = y_mean - x_mean @ self.coef

    def decision_scores(self, X: np.ndarray) -> np.ndarray:  # noqa: N803
        return np.asarray(X @ self.coef + self.intercept)

    def get_state(self) -> dict[str, np.ndarray]:
        return {"coef": self.coef, "intercept": self.intercept}

    def set_state(self, state: dict[str, np.ndarray]) -> None:
        self.coef = state["coef"]
        self.intercept = state["intercept"]
