"""Data and label matrices for learning the transition rule.

Each grid cell becomes one row, in row-major order::

    [l_p, neighbor labels..., encoding of the raster neighborhood...]

and its label is the transition class between two built-up maps.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ShapeError
from .raster_io import (
    BUILT,
    MOORE_1,
    NON_BUILT,
    BuiltUpMap,
    NeighborhoodSpec,
    NormalizedRaster,
    neighborhood_matrix,
)

# transition class codes
NB_NB = 0
B_B = 1
NB_B = 2
B_NB = 3
CLASS_NAMES = {NB_NB: "NB->NB", B_B: "B->B", NB_B: "NB->B", B_NB: "B->NB"}


def label_transition(l_t: int, l_t1: int, merge_bnb: bool = True) -> int:
    if l_t not in (NON_BUILT, BUILT) or l_t1 not in (NON_BUILT, BUILT):
        raise ValueError(f"labels must be -1 or +1, got ({l_t}, {l_t1})")
    if l_t == NON_BUILT:
        return NB_NB if l_t1 == NON_BUILT else NB_B
    if l_t1 == BUILT:
        return B_B
    return B_B if merge_bnb else B_NB


def transition_labels(b_t: BuiltUpMap, b_t1: BuiltUpMap, merge_bnb: bool = True) -> np.ndarray:
    """Vectorized :func:`label_transition` over two maps, flattened row-major."""
    if b_t.shape != b_t1.shape:
        raise ShapeError(f"built-up maps differ in shape: {b_t.shape} vs {b_t1.shape}")
    was = b_t.labels.ravel() == BUILT
    now = b_t1.labels.ravel() == BUILT
    y = np.full(was.shape, NB_NB, dtype=np.int64)
    y[was & now] = B_B
    y[~was & now] = NB_B
    y[was & ~now] = B_B if merge_bnb else B_NB
    return y


def raster_neighborhoods(r: NormalizedRaster, spec: NeighborhoodSpec = MOORE_1) -> np.ndarray:
    """Autoencoder training matrix: one neighborhood vector per cell."""
    return neighborhood_matrix(r, spec)


def encode_raster(r: NormalizedRaster, enc, spec: NeighborhoodSpec = MOORE_1) -> np.ndarray:
    X_R = raster_neighborhoods(r, spec)
    if X_R.shape[1] != enc.input_width:
        raise ShapeError(
            f"encoder expects {enc.input_width} inputs, raster neighborhood has {X_R.shape[1]}"
        )
    return enc.encode(X_R)


def feature_matrix(b_t: BuiltUpMap, r: NormalizedRaster, enc, spec=MOORE_1, encodings=None):
    """Rows ``[l, N(l), encoding]`` for every cell of ``b_t``.

    ``encodings`` may carry a precomputed :func:`encode_raster` result; the
    raster is fixed during simulation so it only needs encoding once.
    """
    if (b_t.height, b_t.width) != (r.height, r.width):
        raise ShapeError(
            f"built-up map {b_t.shape} and raster {(r.height, r.width)} differ in shape"
        )
    if encodings is None:
        encodings = encode_raster(r, enc, spec)
    XB = neighborhood_matrix(b_t, spec).astype(np.float64)
    return np.hstack([XB, encodings])


def build_matrices(
    b_t: BuiltUpMap,
    b_t1: BuiltUpMap,
    r: NormalizedRaster,
    enc,
    spec: NeighborhoodSpec = MOORE_1,
    merge_bnb: bool = True,
):
    """Return ``(X, y)`` for the interval ``t -> t+1``."""
    if b_t.shape != b_t1.shape:
        raise ShapeError(f"built-up maps differ in shape: {b_t.shape} vs {b_t1.shape}")
    X = feature_matrix(b_t, r, enc, spec)
    y = transition_labels(b_t, b_t1, merge_bnb)
    return X, y


def class_histogram(y) -> dict:
    y = np.asarray(y)
    counts = np.bincount(y.astype(np.int64), minlength=4) if y.size else np.zeros(4, int)
    return {code: int(counts[code]) for code in range(4)}


def transition_counts(b_t: BuiltUpMap, b_t1: BuiltUpMap) -> tuple:
    """``(transformed, persistent)`` cell counts between two maps."""
    changed = int(np.count_nonzero(b_t.labels != b_t1.labels))
    return changed, b_t.labels.size - changed


@dataclass(frozen=True, eq=False)
class FoldPlan:
    k: int
    assignment: np.ndarray
    seed: int

    def sizes(self):
        return np.bincount(self.assignment, minlength=self.k)

    def splits(self):
        """Yield ``(train_idx, test_idx)`` per fold."""
        for f in range(self.k):
            test = np.flatnonzero(self.assignment == f)
            train = np.flatnonzero(self.assignment != f)
            yield train, test

    def __eq__(self, other):
        return (
            isinstance(other, FoldPlan)
            and self.k == other.k
            and self.seed == other.seed
            and np.array_equal(self.assignment, other.assignment)
        )


def make_folds(n: int, k: int = 10, seed: int = 0, stratify=None) -> FoldPlan:
    """Random balanced partition of ``n`` rows into ``k`` folds.

    With ``stratify`` (a label vector), rows are dealt round-robin class by
    class so every fold gets a near-equal share of each class.
    """
    if k < 2:
        raise ValueError("need at least 2 folds")
    if k > n:
        raise ValueError(f"cannot split {n} rows into {k} folds")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    if stratify is not None:
        labels = np.asarray(stratify)
        if labels.shape != (n,):
            raise ShapeError("stratify labels must have one entry per row")
        order = order[np.argsort(labels[order], kind="stable")]
    assignment = np.empty(n, dtype=np.int64)
    assignment[order] = np.arange(n) % k
    assignment.setflags(write=False)
    return FoldPlan(k, assignment, seed)


def csv_header(n_neighbors: int, code_width: int):
    return (
        ["l0"]
        + [f"n{i}" for i in range(1, n_neighbors + 1)]
        + [f"e{i}" for i in range(1, code_width + 1)]
        + ["label"]
    )


def dump_csv(X, y, path, n_neighbors: int = 8) -> None:
    X = np.asarray(X)
    code_width = X.shape[1] - 1 - n_neighbors
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(csv_header(n_neighbors, code_width))
        nb = 1 + n_neighbors
        for row, label in zip(X, y):
            w.writerow([int(v) for v in row[:nb]] + [repr(float(v)) for v in row[nb:]] + [int(label)])


def save_matrices(X, y, directory) -> dict:
    directory = Path(directory)
    paths = {"X": directory / "X.npy", "y": directory / "y.npy"}
    np.save(paths["X"], np.ascontiguousarray(X, dtype=np.float64))
    np.save(paths["y"], np.ascontiguousarray(y, dtype=np.int64))
    return paths


def load_matrices(directory):
    directory = Path(directory)
    return np.load(directory / "X.npy"), np.load(directory / "y.npy")
