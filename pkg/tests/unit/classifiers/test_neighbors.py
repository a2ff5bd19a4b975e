"""Unit tests for k-nearest neighbours and nearest centroid."""

import numpy as np
import pytest

from src.classifiers.base import (
    ClassifierKind,
    ClassifierSpec,
    decision_scores,
    fit,
    predict,
    predict_batch,
)
from src.classifiers.neighbors import squared_distances
from src.utils.exceptions import InvalidHyperparameter
from src.utils.models import Dataset

pytestmark = pytest.mark.unit


def _line(points: list[float], labels: list[str]) -> Dataset:
    return Dataset.from_arrays(np.array(points).reshape(-1, 1), labels)


class TestSquaredDistances:
    def test_matches_broadcast_formula(self) -> None:
        rng = np.random.default_rng(0)
        queries = rng.normal(size=(150, 6))  # spans several chunks
        points = rng.normal(size=(20, 6))
        expected = ((queries[:, None, :] - points[None, :, :]) ** 2).sum(axis=2)
        np.testing.assert_allclose(squared_distances(queries, points), expected, rtol=1e-12)


class TestKnn:
    """Tests for majority voting."""

    def test_one_neighbour_is_nearest_point(self) -> None:
        data = _line([0.0, 1.0, 5.0], ["a", "b", "c"])
        model = fit(ClassifierSpec(kind=ClassifierKind.KNN, hyperparameters={"k": 1}), data)
        assert predict_batch(model, np.array([[0.2], [0.8], [3.5], [9.0]])) == [
            "a",
            "b",
            "c",
            "c",
        ]

    def test_majority_wins(self) -> None:
        data = _line([0.0, 0.1, 0.2, 0.3, 5.0], ["a", "b", "b", "b", "a"])
        model = fit(ClassifierSpec(kind=ClassifierKind.KNN, hyperparameters={"k": 3}), data)
        # nearest three to 0.0 are a, b, b
        assert predict(model, np.array([0.0])) == "b"

    @pytest.mark.parametrize("query", [0.1, 0.4, 0.6, 0.9])
    def test_vote_tie_goes_to_first_sorted_class(self, query: float) -> None:
        """One vote each for a and b: a wins wherever the query sits."""
        data = _line([1.0, 0.0], ["b", "a"])
        model = fit(ClassifierSpec(kind=ClassifierKind.KNN, hyperparameters={"k": 2}), data)
        assert predict(model, np.array([query])) == "a"

    def test_tie_scores_are_plain_votes(self) -> None:
        data = _line([0.0, 1.0, 10.0, -9.0], ["a", "b", "a", "b"])
        model = fit(ClassifierSpec(kind=ClassifierKind.KNN, hyperparameters={"k": 2}), data)
        np.testing.assert_array_equal(decision_scores(model, np.array([0.9])), [1.0, 1.0])

    def test_feature_scale_changes_the_vote(self) -> None:
        """Distances are raw Euclidean, so rescaling one feature can flip the answer."""
        X = np.array([[0.0, 0.0], [1.0, 10.0]])  # noqa: N806
        query = np.array([0.6, 0.0])
        spec = ClassifierSpec(kind=ClassifierKind.KNN, hyperparameters={"k": 1})

        model = fit(spec, Dataset.from_arrays(X, ["a", "b"]))
        assert predict(model, query) == "a"

        scale = np.array([1.0, 0.01])
        rescaled = fit(spec, Dataset.from_arrays(X * scale, ["a", "b"]))
        assert predict(rescaled, query * scale) == "b"

    def test_k_larger_than_training_set(self) -> None:
        data = _line([0.0, 1.0, 2.0], ["a", "a", "b"])
        model = fit(ClassifierSpec(kind=ClassifierKind.KNN, hyperparameters={"k": 50}), data)
        assert predict(model, np.array([2.0])) == "a"

    def test_k_must_be_positive(self) -> None:
        with pytest.raises(InvalidHyperparameter):
            ClassifierSpec(kind=ClassifierKind.KNN, hyperparameters={"k": 0})


class TestNearestCentroid:
    def test_equivalent_to_one_nn_on_class_means(self, make_blobs) -> None:
        """Predictions equal 1-NN against the per-class means over random queries."""
        data = make_blobs(n_classes=5, per_class=15, dim=3, spread=2.0, seed=11)
        model = fit(ClassifierSpec(kind=ClassifierKind.NEAREST_CENTROID), data)

        classes = sorted(set(data.y))
        means = np.vstack([data.X[data.y == c].mean(axis=0) for c in classes])
        queries = np.random.default_rng(12).normal(0.0, 8.0, size=(1000, 3))
        nearest = np.argmin(((queries[:, None, :] - means[None]) ** 2).sum(axis=2), axis=1)

        assert predict_batch(model, queries) == [classes[i] for i in nearest]

    def test_training_means_classify_themselves(self, make_blobs) -> None:
        data = make_blobs(n_classes=4, spread=3.0, seed=3)
        model = fit(ClassifierSpec(kind=ClassifierKind.NEAREST_CENTROID), data)
        for label in model.classes:
            assert predict(model, data.X[data.y == label].mean(axis=0)) == label
