"""Random forest with axis-aligned splits, Gini impurity, bootstrap sampling
and per-node random feature subsets of size ceil(sqrt(d))."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError
from .base import LabeledDataset, as_matrix


@dataclass
class Tree:
    """Flat array encoding; node i is a leaf iff children[i] == (-1, -1)."""

    feature: np.ndarray  # (nodes,) int, -1 for leaves
    threshold: np.ndarray  # (nodes,) float
    left: np.ndarray  # (nodes,) int
    right: np.ndarray  # (nodes,) int
    leaf_class: np.ndarray  # (nodes,) int, majority class at the node

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            idx = np.nonzero(active)[0]
            cur = node[idx]
            goes_left = X[idx, self.feature[cur]] < self.threshold[cur]
            node[idx] = np.where(goes_left, self.left[cur], self.right[cur])
            active = self.feature[node] >= 0
        return self.leaf_class[node]

    def to_json(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "leaf_class": self.leaf_class.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Tree":
        return cls(
            np.array(obj["feature"], dtype=np.int64),
            np.array(obj["threshold"], dtype=np.float64),
            np.array(obj["left"], dtype=np.int64),
            np.array(obj["right"], dtype=np.int64),
            np.array(obj["leaf_class"], dtype=np.int64),
        )


def _gini(counts: np.ndarray) -> float:
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return 1.0 - float((p * p).sum())


def _best_split(X, y, idx, features, k):
    """Best (feature, threshold, decrease) over candidate features at a node."""
    n = idx.size
    counts = np.bincount(y[idx], minlength=k).astype(np.float64)
    g_node = _gini(counts)
    if g_node == 0.0:
        return None
    best = None
    for f in features:
        x = X[idx, f]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        if xs[0] == xs[-1]:
            continue
        onehot = np.zeros((n, k))
        onehot[np.arange(n), y[idx][order]] = 1.0
        cum = np.cumsum(onehot, axis=0)
        sizes_l = np.arange(1, n, dtype=np.float64)
        valid = xs[1:] > xs[:-1]
        if not valid.any():
            continue
        left_sq = (cum[:-1] ** 2).sum(axis=1)
        right_counts = counts[None, :] - cum[:-1]
        right_sq = (right_counts**2).sum(axis=1)
        sizes_r = n - sizes_l
        g_l = 1.0 - left_sq / (sizes_l**2)
        g_r = 1.0 - right_sq / (sizes_r**2)
        weighted = (sizes_l * g_l + sizes_r * g_r) / n
        weighted[~valid] = np.inf
        pos = int(np.argmin(weighted))
        decrease = g_node - weighted[pos]
        if decrease > 1e-12 and (best is None or decrease > best[2]):
            best = (int(f), 0.5 * (xs[pos] + xs[pos + 1]), float(decrease))
    return best


def _grow_tree(X, y, k, rng, max_features, max_depth, min_samples_split, importance):
    n_total = X.shape[0]
    feature, threshold, left, right, leaf_class = [], [], [], [], []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        leaf_class.append(-1)
        return len(feature) - 1

    stack = [(new_node(), np.arange(n_total), 0)]
    while stack:
        node, idx, depth = stack.pop()
        counts = np.bincount(y[idx], minlength=k)
        majority = int(np.argmax(counts))  # argmax breaks ties toward lower ids
        leaf_class[node] = majority
        if (
            idx.size < min_samples_split
            or counts.max() == idx.size
            or (max_depth is not None and depth >= max_depth)
        ):
            continue
        candidates = rng.choice(X.shape[1], size=max_features, replace=False)
        split = _best_split(X, y, idx, candidates, k)
        if split is None:
            continue
        f, thr, decrease = split
        importance[f] += idx.size / n_total * decrease
        goes_left = X[idx, f] < thr
        feature[node] = f
        threshold[node] = thr
        left_id, right_id = new_node(), new_node()
        left[node], right[node] = left_id, right_id
        # push right first so the left branch is grown first (fixed order)
        stack.append((right_id, idx[~goes_left], depth + 1))
        stack.append((left_id, idx[goes_left], depth + 1))
    return Tree(
        np.array(feature, dtype=np.int64),
        np.array(threshold, dtype=np.float64),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(leaf_class, dtype=np.int64),
    )


@dataclass
class ForestModel:
    kind = "forest"

    trees: list[Tree]
    feature_importances_: np.ndarray
    n_features: int
    class_names: list[str]
    seed: int = 0
    feature_mask: object = None
    norm_stats: object = None

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def predict(self, X) -> np.ndarray:
        X = as_matrix(X, self.n_features)
        votes = np.zeros((X.shape[0], len(self.class_names)), dtype=np.int64)
        for tree in self.trees:
            preds = tree.predict(X)
            votes[np.arange(X.shape[0]), preds] += 1
        return np.argmax(votes, axis=1)  # vote ties go to the lowest class id

    def config_json(self) -> dict:
        return {"n_trees": self.n_trees, "seed": self.seed, "n_features": self.n_features}

    def params_json(self) -> dict:
        return {
            "trees": [t.to_json() for t in self.trees],
            "feature_importances": self.feature_importances_.tolist(),
        }

    @classmethod
    def from_file_json(cls, obj, preprocessing) -> "ForestModel":
        return cls(
            [Tree.from_json(t) for t in obj["params"]["trees"]],
            np.array(obj["params"]["feature_importances"], dtype=np.float64),
            int(obj["config"]["n_features"]),
            list(obj["class_names"]),
            seed=int(obj["config"]["seed"]),
            **preprocessing,
        )


def feature_importances(model: ForestModel) -> np.ndarray:
    """Per-feature normalized total Gini decrease; non-negative, sums to 1."""
    return model.feature_importances_


def train_forest(
    ds: LabeledDataset,
    n_trees: int = 1000,
    seed: int = 0,
    max_depth: int | None = None,
    min_samples_split: int = 2,
) -> ForestModel:
    """Fit ``n_trees`` trees, each on a bootstrap resample of the training set.

    Each node draws ceil(sqrt(d)) candidate features.  Importances accumulate
    the sample-weighted Gini decrease of every split and are normalized to
    sum 1 over the forest; when no split ever occurs (e.g. a single-class
    dataset) the importance vector falls back to uniform.
    """
    if n_trees < 1:
        raise DataError("n_trees must be >= 1")
    if ds.n < 2:
        raise DataError("need at least 2 samples to fit a forest")
    X, y, k, d = ds.features, ds.labels, ds.n_classes, ds.d
    max_features = min(d, math.ceil(math.sqrt(d)))
    trees = []
    importance = np.zeros(d)
    for child_seed in np.random.SeedSequence(seed).spawn(n_trees):
        rng = np.random.default_rng(child_seed)
        sample = rng.integers(0, ds.n, size=ds.n)
        trees.append(
            _grow_tree(X[sample], y[sample], k, rng, max_features, max_depth,
                       min_samples_split, importance)
        )
    total = importance.sum()
    importances = importance / total if total > 0 else np.full(d, 1.0 / d)
    return ForestModel(trees, importances, d, ds.class_names, seed=seed)
