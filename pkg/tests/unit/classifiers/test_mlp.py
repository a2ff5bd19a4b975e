"""Unit tests for the multi-layer perceptron."""

import numpy as np
import pytest

from src.classifiers.base import ClassifierKind, ClassifierSpec, accuracy, fit, one_hot
from src.classifiers.mlp import PARAM_NAMES, forward, init_params, loss_and_gradients
from src.utils.exceptions import InvalidHyperparameter

pytestmark = pytest.mark.unit


class TestGradients:
    """Backpropagation against central differences."""

    @pytest.mark.parametrize("alpha", [0.0, 0.05])
    def test_matches_finite_differences(self, alpha: float) -> None:
        rng = np.random.default_rng(17)
        X = rng.normal(size=(8, 3))  # noqa: N806
        Y = one_hot(rng.integers(0, 4, size=8), 4)  # noqa: N806
        params = init_params(3, 5, 4, rng)
        params["b1"] = rng.normal(scale=0.1, size=5)
        _, grads = loss_and_gradients(params, X, Y, alpha)

        h = 1e-6
        for name in PARAM_NAMES:
            numeric = np.zeros_like(params[name])
            for idx in np.ndindex(params[name].shape):
                plus = {k: v.copy() for k, v in params.items()}
                minus = {k: v.copy() for k, v in params.items()}
                plus[name][idx] += h
                minus[name][idx] -= h
                numeric[idx] = (
                    loss_and_gradients(plus, X, Y, alpha)[0]
                    - loss_and_gradients(minus, X, Y, alpha)[0]
                ) / (2 * h)
            rel = np.linalg.norm(numeric - grads[name]) / max(
                np.linalg.norm(numeric + grads[name]), 1e-12
            )
            assert rel < 1e-4, name

    def test_init_shapes(self) -> None:
        params = init_params(180, 100, 13, np.random.default_rng(0))
        assert params["W1"].shape == (180, 100)
        assert params["W2"].shape == (100, 13)
        assert not params["b1"].any()
        _, logits = forward(params, np.zeros((2, 180)))
        assert logits.shape == (2, 13)


class TestTraining:
    def test_learns_blobs(self, make_blobs) -> None:
        data = make_blobs(n_classes=4, per_class=25, dim=6, spread=1.0, seed=3)
        spec = ClassifierSpec(
            kind=ClassifierKind.MLP,
            hyperparameters={"epochs": 300, "learning_rate": 0.01},
            seed=2,
        )
        assert accuracy(fit(spec, data), data) >= 0.95

    def test_sgd_solver_lowers_the_loss(self, make_blobs) -> None:
        data = make_blobs(spread=2.0, seed=4)
        y = np.searchsorted(np.array(sorted(set(data.y)), dtype=object), data.y)
        Y = one_hot(y, 3)  # noqa: N806

        def trained_loss(epochs: int) -> float:
            spec = ClassifierSpec(
                kind=ClassifierKind.MLP,
                hyperparameters={"solver": "sgd", "epochs": epochs, "learning_rate": 0.01},
                seed=1,
            )
            return loss_and_gradients(fit(spec, data).estimator.weights, data.X, Y, 0.0)[0]

        assert trained_loss(50) < trained_loss(1)

    def test_unknown_solver(self) -> None:
        with pytest.raises(InvalidHyperparameter):
            ClassifierSpec(kind=ClassifierKind.MLP, hyperparameters={"solver": "lbfgs"})
