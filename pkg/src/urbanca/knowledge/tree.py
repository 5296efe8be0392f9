"""CART classification trees grown greedily on Gini impurity."""
from __future__ import annotations

import math

import numpy as np

from ._backend import kernels as _default_kernels
from .base import TransitionModel, check_xy, encode_labels, register


def gini(counts) -> float:
    counts = np.asarray(counts, dtype=np.float64)
    if counts.ndim != 1 or (counts < 0).any():
        raise ValueError("counts must be a non-negative vector")
    n = counts.sum()
    if n <= 0:
        raise ValueError("gini of an empty node is undefined")
    p = counts / n
    return float(1.0 - np.sum(p * p))


@register
class DecisionTree(TransitionModel):
    """Flat array tree; node 0 is the root and ids follow pre-order.

    ``feature[i] == -1`` marks a leaf. Rows with ``x[feature] <=
    threshold`` go left. Built-up columns (the first ``n_categorical``
    features) only take values -1 and +1, so their threshold of 0 is the
    equality test ``x == -1``.
    """

    kind = "tree"

    def __init__(self, classes, feature_width, feature, threshold, left, right, counts,
                 gain=None, n_categorical=0, params=None):
        super().__init__(classes, feature_width, params)
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.counts = np.asarray(counts, dtype=np.int64).reshape(len(self.feature), -1)
        self.gain = np.zeros(len(self.feature)) if gain is None else np.asarray(gain, dtype=np.float64)
        self.n_categorical = int(n_categorical)
        self.leaf_class = np.argmax(self.counts, axis=1)

    @property
    def node_count(self) -> int:
        return len(self.feature)

    @property
    def depth(self) -> int:
        depths = np.zeros(self.node_count, dtype=np.int64)
        for i in range(self.node_count):
            if self.feature[i] >= 0:
                depths[self.left[i]] = depths[self.right[i]] = depths[i] + 1
        return int(depths.max())

    def apply(self, X, kernels=None) -> np.ndarray:
        k = kernels or _default_kernels
        return k.apply_tree(np.ascontiguousarray(X, dtype=np.float64),
                            self.feature, self.threshold, self.left, self.right)

    def predict_index(self, X):
        return self.leaf_class[self.apply(X)]

    def rules(self, names=None):
        """Human-readable root-to-leaf rules, one string per leaf."""
        out = []
        stack = [(0, [])]
        while stack:
            node, conds = stack.pop()
            f = self.feature[node]
            if f < 0:
                cls = int(self.classes[self.leaf_class[node]])
                out.append(" AND ".join(conds or ["TRUE"]) + f" => {cls}")
                continue
            name = names[f] if names else f"x{f}"
            if f < self.n_categorical:
                lo, hi = f"{name} == -1", f"{name} == +1"
            else:
                lo, hi = f"{name} <= {self.threshold[node]:.6g}", f"{name} > {self.threshold[node]:.6g}"
            stack.append((self.right[node], conds + [hi]))
            stack.append((self.left[node], conds + [lo]))
        return out

    def _write_payload(self, w):
        w.u32(self.n_categorical)
        w.u32(self.node_count)
        for i in range(self.node_count):
            f = int(self.feature[i])
            if f < 0:
                w.u8(0)
            else:
                w.u8(1)
                w.i32(f)
                w.f64(float(self.threshold[i]))
                w.f64(float(self.gain[i]))
            for c in self.counts[i]:
                w.u32(int(c))

    @classmethod
    def _read_payload(cls, r, classes, feature_width, params):
        n_cat = r.u32()
        n_nodes = r.u32()
        K = len(classes)
        feature = np.full(n_nodes, -1, dtype=np.int64)
        threshold = np.zeros(n_nodes)
        gain = np.zeros(n_nodes)
        counts = np.zeros((n_nodes, K), dtype=np.int64)
        internal = np.zeros(n_nodes, dtype=bool)
        for i in range(n_nodes):
            if r.u8():
                internal[i] = True
                feature[i] = r.i32()
                threshold[i] = r.f64()
                gain[i] = r.f64()
            for k in range(K):
                counts[i, k] = r.u32()
        left, right = _link_preorder(internal)
        return cls(classes, feature_width, feature, threshold, left, right, counts, gain,
                   n_categorical=n_cat, params=params)


def _link_preorder(internal):
    n = len(internal)
    left = np.full(n, -1, dtype=np.int64)
    right = np.full(n, -1, dtype=np.int64)
    pending = []  # internal nodes still waiting for a right child
    for i in range(n):
        if i > 0:
            parent = pending[-1]
            if left[parent] < 0:
                left[parent] = i
            else:
                right[parent] = i
                pending.pop()
        if internal[i]:
            pending.append(i)
    return left, right


def resolve_max_features(max_features, n_features):
    if max_features is None:
        return n_features
    if max_features == "sqrt":
        return max(1, math.ceil(math.sqrt(n_features)))
    return max(1, min(int(max_features), n_features))


def grow_tree(X, yidx, n_classes, idx, max_depth=None, min_leaf=1, rng=None, max_features=None,
              kernels=None):
    """Grow node arrays for the rows ``idx`` (which may contain repeats).

    Without ``rng`` every feature is scanned in index order. With ``rng``,
    each node visits a fresh random permutation of the features until
    ``max_features`` non-constant ones were evaluated.
    """
    k = kernels or _default_kernels
    n_feat = X.shape[1]
    mtry = resolve_max_features(max_features, n_feat)
    all_features = np.arange(n_feat, dtype=np.int64)
    feature, threshold, left, right, counts, gains = [], [], [], [], [], []
    stack = [(np.asarray(idx, dtype=np.int64), 0, -1, False)]
    while stack:
        node_idx, depth, parent, is_right = stack.pop()
        nid = len(feature)
        if parent >= 0:
            (right if is_right else left)[parent] = nid
        c = np.bincount(yidx[node_idx], minlength=n_classes)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append(c)
        gains.append(0.0)
        if np.count_nonzero(c) <= 1 or (max_depth is not None and depth >= max_depth):
            continue
        if rng is None:
            feats, visits = all_features, n_feat
        else:
            feats, visits = rng.permutation(n_feat).astype(np.int64), mtry
        f, t, g = k.best_split(X, yidx, node_idx, feats, visits, n_classes, min_leaf)
        if f < 0:
            continue
        feature[nid], threshold[nid], gains[nid] = f, t, g
        mask = X[node_idx, f] <= t
        stack.append((node_idx[~mask], depth + 1, nid, True))
        stack.append((node_idx[mask], depth + 1, nid, False))
    return (np.array(feature, dtype=np.int64), np.array(threshold), np.array(left, dtype=np.int64),
            np.array(right, dtype=np.int64), np.array(counts, dtype=np.int64).reshape(-1, n_classes),
            np.array(gains))


def train_tree(X, y, max_depth=None, min_leaf=1, seed=0, n_categorical=0, kernels=None):
    """Fit a single CART tree.

    ``max_depth=None`` grows until leaves are pure or no split reduces
    impurity. ``seed`` is accepted for interface symmetry; a single tree scans
    every feature so training is fully deterministic.
    """
    X, y = check_xy(X, y)
    if min_leaf < 1:
        raise ValueError("min_leaf must be >= 1")
    classes, yidx = encode_labels(y)
    arrays = grow_tree(X, yidx, len(classes), np.arange(X.shape[0]), max_depth, min_leaf,
                       kernels=kernels)
    params = {"max_depth": max_depth, "min_leaf": min_leaf, "seed": seed}
    return DecisionTree(classes, X.shape[1], *arrays, n_categorical=n_categorical, params=params)
