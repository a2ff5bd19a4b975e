"""One-hidden-layer perceptron with ReLU units and a softmax output."""

from typing import ClassVar, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.classifiers.base import one_hot, softmax

PARAM_NAMES = ("W1", "b1", "W2", "b2")
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


def init_params(
    n_features: int, hidden: int, n_classes: int, rng: np.random.Generator
) -> dict[str, np.ndarray]:
    """Normal weights scaled by 1/sqrt(fan-in), zero biases."""
    return {
        "W1": rng.standard_normal((n_features, hidden)) / np.sqrt(n_features),
        "b1": np.zeros(hidden),
        "W2": rng.standard_normal((hidden, n_classes)) / np.sqrt(hidden),
        "b2": np.zeros(n_classes),
    }


def forward(
    params: dict[str, np.ndarray], X: np.ndarray  # noqa: N803
) -> tuple[np.ndarray, np.ndarray]:
    """(hidden pre-activations, output logits)."""
    z1 = X @ params["W1"] + params["b1"]
    logits = np.maximum(z1, 0.0) @ params["W2"] + params["b2"]
    return z1, logits


def loss_and_gradients(
    params: dict[str, np.ndarray],
    X: np.ndarray,  # noqa: N803
    Y: np.ndarray,  # noqa: N803
    alpha: float,
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean cross-entropy plus (alpha/2)·(||W1||² + ||W2||²) and its gradients."""
    n = X.shape[0]
    z1, logits = forward(params, X)
    hidden = np.maximum(z1, 0.0)
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_proba = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))

    w1, w2 = params["W1"], params["W2"]
    loss = -float((Y * log_proba).sum()) / n + 0.5 * alpha * float(
        (w1**2).sum() + (w2**2).sum()
    )

    d_logits = (np.exp(log_proba) - Y) / n
    d_hidden = (d_logits @ w2.T) * (z1 > 0.0)
    grads = {
        "W1": X.T @ d_hidden + alpha * w1,
        "b1": d_hidden.sum(axis=0),
        "W2": hidden.T @ d_logits + alpha * w2,
        "b2": d_logits.sum(axis=0),
    }
    return loss, grads


class MlpParams(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    hidden_units: int = Field(default=100, ge=1)
    learning_rate: float = Field(default=1e-3, gt=0.0)
    epochs: int = Field(default=200, ge=1)
    batch_size: int = Field(default=32, ge=1)
    alpha: float = Field(default=1e-4, ge=0.0, description="L2 penalty")
    solver: Literal["adam", "sgd"] = "adam"


class Mlp:
    """Mini-batch trained perceptron; Adam by default, plain SGD selectable."""

    Params: ClassVar[type[BaseModel]] = MlpParams

    def __init__(self, params: MlpParams) -> None:
        self.params = params
        self.weights: dict[str, np.ndarray] = {}

    def fit(
        self, X: np.ndarray, y: np.ndarray, n_classes: int, rng: np.random.Generator  # noqa: N803
    ) -> None:
        p = self.params
        n = X.shape[0]
        Y = one_hot(y, n_classes)  # noqa: N806
        weights = init_params(X.shape[1], p.hidden_units, n_classes, rng)
        m = {k: np.zeros_like(v) for k, v in weights.items()}
        v = {k: np.zeros_like(w) for k, w in weights.items()}
        step = 0

        for _ in range(p.epochs):
            order = rng.permutation(n)
            for start in range(0, n, p.batch_size):
                batch = order[start : start + p.batch_size]
                _, grads = loss_and_gradients(weights, X[batch], Y[batch], p.alpha)
                step += 1
                for name in PARAM_NAMES:
                    g = grads[name]
                    if p.solver == "sgd":
                        weights[name] -= p.learning_rate * g
                        continue
                    m[name] = ADAM_BETA1 * m[name] + (1.0 - ADAM_BETA1) * g
                    v[name] = ADAM_BETA2 * v[name] + (1.0 - ADAM_BETA2) * g**2
                    m_hat = m[name] / (1.0 - ADAM_BETA1**step)
                    v_hat = v[name] / (1.0 - ADAM_BETA2**step)
                    weights[name] -= p.learning_rate * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
        self.weights = weights

    def decision_scores(self, X: np.ndarray) -> np.ndarray:  # noqa: N803
        return forward(self.weights, X)[1]

    def predict_proba(self, X: np.ndarray) -> np.ndarray:  # noqa: N803
        return softmax(self.decision_scores(X))

    def get_state(self) -> dict[str, np.ndarray]:
        return dict(self.weights)

    def set_state(self, state: dict[str, np.ndarray]) -> None:
        self.weights = {name: state[name] for name in PARAM_NAMES}
