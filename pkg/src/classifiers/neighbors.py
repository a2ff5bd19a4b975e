"""Distance-based classifiers: k-nearest neighbours and nearest centroid."""

from typing import ClassVar

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

QUERY_CHUNK = 64


def squared_distances(queries: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Exact squared Euclidean distances (n_queries, n_points), computed by differences."""
    out = np.empty((queries.shape[0], points.shape[0]))
    for start in range(0, queries.shape[0], QUERY_CHUNK):
        block = queries[start : start + QUERY_CHUNK]
        diff = block[:, np.newaxis, :] - points[np.newaxis, :, :]
        out[start : start + QUERY_CHUNK] = np.einsum("ijk,ijk->ij", diff, diff)
    return out


class KnnParams(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    k: int = Field(default=5, ge=1)


class Knn:
    """Majority vote of the k nearest training vectors.

    Vote ties go to the class that comes first in sorted class order.
    """

    Params: ClassVar[type[BaseModel]] = KnnParams

    def __init__(self, params: KnnParams) -> None:
        self.params = params
        self.X_train = np.empty((0, 0))
        self.y_train = np.empty(0, dtype=np.int64)
        self.n_classes = 0

    def fit(
        self, X: np.ndarray, y: np.ndarray, n_classes: int, rng: np.random.Generator  # noqa: N803
    ) -> None:
        self.X_train = np.array(X, dtype=np.float64)
        self.y_train = np.array(y, dtype=np.int64)
        self.n_classes = n_classes

    def decision_scores(self, X: np.ndarray) -> np.ndarray:  # noqa: N803
        k = min(self.params.k, self.X_train.shape[0])
        d2 = squared_distances(X, self.X_train)
        nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
        labels = self.y_train[nearest]

        rows = np.arange(X.shape[0])
        votes = np.zeros((X.shape[0], self.n_classes))
        for rank in range(k):
            votes[rows, labels[:, rank]] += 1.0
        return votes

    def get_state(self) -> dict[str, np.ndarray]:
        return {
            "X_train": self.X_train,
            "y_train": self.y_train,
            "n_classes": np.array(self.n_classes),
        }

    def set_state(self, state: dict[str, np.ndarray]) -> None:
        self.X_train = state["X_train"]
        self.y_train = state["y_train"].astype(np.int64)
        self.n_classes = int(state["n_classes"])


class NearestCentroidParams(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class NearestCentroid:
    """Per-class mean vectors; the closest centroid wins."""

    Params: ClassVar[type[BaseModel]] = NearestCentroidParams

    def __init__(self, params: NearestCentroidParams) -> None:
        self.params = params
        self.centroids = np.empty((0, 0))

    def fit(
        self, X: np.ndarray, y: np.ndarray, n_classes: int, rng: np.random.Generator  # noqa: N803
    ) -> None:
        self.centroids = np.vstack([X[y == c].mean(axis=0) for c in range(n_classes)])

    def decision_scores(self, X: np.ndarray) -> np.ndarray:  # noqa: N803
        return -squared_distances(X, self.centroids)

    def get_state(self) -> dict[str, np.ndarray]:
        return {"centroids": self.centroids}

    def set_state(self, state: dict[str, np.ndarray]) -> None:
        self.centroids = state["centroids"]
