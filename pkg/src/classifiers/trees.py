"""CART decision tree, random forest and extremely randomised trees.

Trees are stored as flat node arrays. A node sends a query left when
x[feature] <= threshold; leaves have left == right == -1 and keep the class
distribution of their training samples.
"""

import math
from typing import ClassVar, NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

LEAF = -1


class TreeArrays(NamedTuple):
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray


def _weighted_gini(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Size-weighted Gini impurity of candidate splits given per-class counts (…, k)."""
    n_left = left.sum(axis=-1)
    n_right = right.sum(axis=-1)
    total = n_left + n_right
    with np.errstate(divide="ignore", invalid="ignore"):
        gini_left = 1.0 - ((left / n_left[..., np.newaxis]) ** 2).sum(axis=-1)
        gini_right = 1.0 - ((right / n_right[..., np.newaxis]) ** 2).sum(axis=-1)
    return np.asarray((n_left * gini_left + n_right * gini_right) / total)


class TreeBuilder:
    """Grows one tree on (X, y) with Gini splits."""

    def __init__(
        self,
        n_classes: int,
        rng: np.random.Generator,
        max_features: int | None = None,
        max_depth: int | None = None,
        min_samples_split: int = 2,
        random_thresholds: bool = False,
    ) -> None:
        self.n_classes = n_classes
        self.rng = rng
        self.max_features = max_features
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.random_thresholds = random_thresholds

    def _exact_split(self, col: np.ndarray, y: np.ndarray) -> tuple[float, float] | None:
        order = np.argsort(col, kind="stable")
        xs = col[order]
        valid = xs[:-1] < xs[1:]
        if not valid.any():
            return None
        _, local = np.unique(y[order], return_inverse=True)
        counts = np.eye(int(local.max()) + 1)[local]
        left = np.cumsum(counts, axis=0)[:-1]
        right = counts.sum(axis=0) - left
        impurity = np.where(valid, _weighted_gini(left, right), np.inf)
        i = int(np.argmin(impurity))
        return float(impurity[i]), float(xs[i])

    def _random_split(self, col: np.ndarray, y: np.ndarray) -> tuple[float, float] | None:
        lo, hi = float(col.min()), float(col.max())
        if lo == hi:
            return None
        threshold = float(self.rng.uniform(lo, hi))
        goes_left = col <= threshold
        left = np.bincount(y[goes_left], minlength=self.n_classes).astype(np.float64)
        right = np.bincount(y[~goes_left], minlength=self.n_classes).astype(np.float64)
        return float(_weighted_gini(left[np.newaxis], right[np.newaxis])[0]), threshold

    def _search(
        self, X: np.ndarray, y: np.ndarray, features: np.ndarray  # noqa: N803
    ) -> tuple[int, float] | None:
        best: tuple[float, int, float] | None = None
        split_on = self._random_split if self.random_thresholds else self._exact_split
        for f in features:
            found = split_on(X[:, f], y)
            if found is not None and (best is None or found[0] < best[0]):
                best = (found[0], int(f), found[1])
        return None if best is None else (best[1], best[2])

    def _best_split(self, X: np.ndarray, y: np.ndarray) -> tuple[int, float] | None:  # noqa: N803
        d = X.shape[1]
        if self.max_features is None or self.max_features >= d:
            return self._search(X, y, np.arange(d))
        chosen = self.rng.choice(d, size=self.max_features, replace=False)
        split = self._search(X, y, chosen)
        if split is None:
            # No usable feature in the subset: fall back to the rest
            split = self._search(X, y, np.setdiff1d(np.arange(d), chosen))
        return split

    def build(self, X: np.ndarray, y: np.ndarray) -> TreeArrays:  # noqa: N803
        feature: list[int] = []
        threshold: list[float] = []
        left: list[int] = []
        right: list[int] = []
        value: list[np.ndarray] = []

        def new_node(indices: np.ndarray) -> int:
            counts = np.bincount(y[indices], minlength=self.n_classes).astype(np.float64)
            feature.append(LEAF)
            threshold.append(0.0)
            left.append(LEAF)
            right.append(LEAF)
            value.append(counts / counts.sum())
            return len(value) - 1

        stack = [(new_node(np.arange(y.size)), np.arange(y.size), 0)]
        while stack:
            node, indices, depth = stack.pop()
            pure = np.count_nonzero(value[node]) == 1
            if (
                pure
                or indices.size < self.min_samples_split
                or (self.max_depth is not None and depth >= self.max_depth)
            ):
                continue
            split = self._best_split(X[indices], y[indices])
            if split is None:
                continue
            f, thr = split
            goes_left = X[indices, f] <= thr
            left_idx, right_idx = indices[goes_left], indices[~goes_left]
            feature[node] = f
            threshold[node] = thr
            left[node] = new_node(left_idx)
            right[node] = new_node(right_idx)
            stack.append((right[node], right_idx, depth + 1))
            stack.append((left[node], left_idx, depth + 1))

        return TreeArrays(
            feature=np.array(feature, dtype=np.int64),
            threshold=np.array(threshold, dtype=np.float64),
            left=np.array(left, dtype=np.int64),
            right=np.array(right, dtype=np.int64),
            value=np.vstack(value),
        )


def apply_tree(nodes: TreeArrays, X: np.ndarray, root: int = 0) -> np.ndarray:  # noqa: N803
    """Leaf index reached by every query."""
    node = np.full(X.shape[0], root, dtype=np.int64)
    rows = np.arange(X.shape[0])
    while True:
        internal = nodes.left[node] != LEAF
        if not internal.any():
            return node
        current = node[internal]
        goes_left = X[rows[internal], nodes.feature[current]] <= nodes.threshold[current]
        node[internal] = np.where(goes_left, nodes.left[current], nodes.right[current])


def _state(nodes: TreeArrays) -> dict[str, np.ndarray]:
    return dict(nodes._asdict())


def _nodes(state: dict[str, np.ndarray]) -> TreeArrays:
    return TreeArrays(**{name: state[name] for name in TreeArrays._fields})


class DecisionTreeParams(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    max_depth: int | None = Field(default=None, ge=1)
    min_samples_split: int = Field(default=2, ge=2)
    max_features: int | None = Field(default=None, ge=1, description="None means all")


class DecisionTree:
    """CART with Gini impurity, grown until leaves are pure."""

    Params: ClassVar[type[BaseModel]] = DecisionTreeParams

    def __init__(self, params: DecisionTreeParams) -> None:
        self.params = params
        self.nodes: TreeArrays | None = None

    def fit(
        self, X: np.ndarray, y: np.ndarray, n_classes: int, rng: np.random.Generator  # noqa: N803
    ) -> None:
        builder = TreeBuilder(
            n_classes,
            rng,
            max_features=self.params.max_features,
            max_depth=self.params.max_depth,
            min_samples_split=self.params.min_samples_split,
        )
        self.nodes = builder.build(X, y)

    def decision_scores(self, X: np.ndarray) -> np.ndarray:  # noqa: N803
        assert self.nodes is not None
        return np.asarray(self.nodes.value[apply_tree(self.nodes, X)])

    def get_state(self) -> dict[str, np.ndarray]:
        assert self.nodes is not None
        return _state(self.nodes)

    def set_state(self, state: dict[str, np.ndarray]) -> None:
        self.nodes = _nodes(state)


class RandomForestParams(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    n_trees: int = Field(default=100, ge=1)
    max_features: int | None = Field(default=None, ge=1, description="None means sqrt(d)")
    max_depth: int | None = Field(default=None, ge=1)
    min_samples_split: int = Field(default=2, ge=2)
    bootstrap: bool = True


class ExtraTreesParams(RandomForestParams):
    bootstrap: bool = False


class RandomForest:
    """Bagged CART trees on random feature subsets; scores are vote fractions."""

    Params: ClassVar[type[BaseModel]] = RandomForestParams
    random_thresholds: ClassVar[bool] = False

    def __init__(self, params: RandomForestParams) -> None:
        self.params = params
        self.nodes: TreeArrays | None = None
        self.roots = np.empty(0, dtype=np.int64)
        self.n_classes = 0

    def fit(
        self, X: np.ndarray, y: np.ndarray, n_classes: int, rng: np.random.Generator  # noqa: N803
    ) -> None:
        n, d = X.shape
        max_features = self.params.max_features or max(1, round(math.sqrt(d)))
        seeds = rng.integers(0, 2**63 - 1, size=self.params.n_trees)

        trees: list[TreeArrays] = []
        for seed in seeds:
            tree_rng = np.random.default_rng(int(seed))
            rows = tree_rng.integers(0, n, size=n) if self.params.bootstrap else np.arange(n)
            builder = TreeBuilder(
                n_classes,
                tree_rng,
                max_features=max_features,
                max_depth=self.params.max_depth,
                min_samples_split=self.params.min_samples_split,
                random_thresholds=self.random_thresholds,
            )
            trees.append(builder.build(X[rows], y[rows]))

        offsets = np.cumsum([0] + [t.feature.size for t in trees[:-1]])

        def linked(child: str) -> np.ndarray:
            return np.concatenate(
                [
                    np.where(getattr(t, child) == LEAF, LEAF, getattr(t, child) + off)
                    for t, off in zip(trees, offsets, strict=True)
                ]
            )

        self.nodes = TreeArrays(
            feature=np.concatenate([t.feature for t in trees]),
            threshold=np.concatenate([t.threshold for t in trees]),
            left=linked("left"),
            right=linked("right"),
            value=np.vstack([t.value for t in trees]),
        )
        self.roots = offsets.astype(np.int64)
        self.n_classes = n_classes

    def decision_scores(self, X: np.ndarray) -> np.ndarray:  # noqa: N803
        assert self.nodes is not None
        votes = np.zeros((X.shape[0], self.n_classes))
        rows = np.arange(X.shape[0])
        for root in self.roots:
            leaves = apply_tree(self.nodes, X, int(root))
            votes[rows, np.argmax(self.nodes.value[leaves], axis=1)] += 1.0
        return votes / self.roots.size

    def get_state(self) -> dict[str, np.ndarray]:
        assert self.nodes is not None
        return {**_state(self.nodes), "roots": self.roots, "n_classes": np.array(self.n_classes)}

    def set_state(self, state: dict[str, np.ndarray]) -> None:
        self.nodes = _nodes(state)
        self.roots = state["roots"].astype(np.int64)
        self.n_classes = int(state["n_classes"])


class ExtraTrees(RandomForest):
    """Extremely randomised trees: uniform random thresholds, no bootstrap by default."""

    Params: ClassVar[type[BaseModel]] = ExtraTreesParams
    random_thresholds: ClassVar[bool] = True
