from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .base import TransitionModel, check_xy, encode_labels, register
from .tree import DecisionTree, grow_tree


@register
class RandomForest(TransitionModel):
    """Bagged CART trees combined by majority vote (ties -> lowest class code)."""

    kind = "forest"

    def __init__(self, classes, feature_width, trees, params=None):
        super().__init__(classes, feature_width, params)
        self.trees = list(trees)

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def vote_counts(self, X) -> np.ndarray:
        X = self._check_x(X)
        votes = np.zeros((X.shape[0], self.n_classes), dtype=np.int64)
        rows = np.arange(X.shape[0])
        for tree in self.trees:
            np.add.at(votes, (rows, tree.predict_index(X)), 1)
        return votes

    def predict_index(self, X):
        return np.argmax(self.vote_counts(X), axis=1)

    def _write_payload(self, w):
        w.u32(self.n_trees)
        for tree in self.trees:
            tree._write_payload(w)

    @classmethod
    def _read_payload(cls, r, classes, feature_width, params):
        trees = [DecisionTree._read_payload(r, classes, feature_width, {})
                 for _ in range(r.u32())]
        return cls(classes, feature_width, trees, params)


def train_forest(X, y, n_trees=100, max_depth=None, seed=0, max_features="sqrt", bootstrap=True,
                 min_leaf=1, n_categorical=0, n_jobs=1, kernels=None):
    """Fit ``n_trees`` CART trees on bootstrap resamples.

    Each tree draws from its own generator spawned from ``seed`` before any
    training starts, so ``n_jobs > 1`` yields exactly the serial result.
    """
    X, y = check_xy(X, y)
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    classes, yidx = encode_labels(y)
    n = X.shape[0]
    children = np.random.SeedSequence(seed).spawn(n_trees)

    def fit_one(ss):
        rng = np.random.default_rng(ss)
        idx = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        # max_features=None with no bootstrap reproduces a plain tree exactly
        feat_rng = None if max_features is None else rng
        arrays = grow_tree(X, yidx, len(classes), idx, max_depth, min_leaf, rng=feat_rng,
                           max_features=max_features, kernels=kernels)
        return DecisionTree(classes, X.shape[1], *arrays, n_categorical=n_categorical)

    if n_jobs and n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            trees = list(pool.map(fit_one, children))
    else:
        trees = [fit_one(ss) for ss in children]
    params = {"n_trees": n_trees, "max_depth": max_depth, "seed": seed,
              "max_features": max_features, "bootstrap": bootstrap, "min_leaf": min_leaf}
    return RandomForest(classes, X.shape[1], trees, params)
