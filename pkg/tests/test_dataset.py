import numpy as np
import pytest

from urbanca import dataset
from urbanca.encoder import new_autoencoder
from urbanca.errors import ShapeError
from urbanca.raster_io import MOORE_1, BuiltUpMap, NormalizedRaster, window


@pytest.mark.parametrize("a,b,merge,code", [
    (-1, -1, True, 0), (1, 1, True, 1), (-1, 1, True, 2), (1, -1, True, 1), (1, -1, False, 3),
])
def test_label_transition(a, b, merge, code):
    assert dataset.label_transition(a, b, merge) == code


def test_label_transition_rejects_other_values():
    with pytest.raises(ValueError):
        dataset.label_transition(0, 1)


def test_transition_labels_vectorized_matches_scalar():
    rng = np.random.default_rng(0)
    a = BuiltUpMap(np.where(rng.random((6, 5)) > 0.5, 1, -1))
    b = BuiltUpMap(np.where(rng.random((6, 5)) > 0.5, 1, -1))
    for merge in (True, False):
        y = dataset.transition_labels(a, b, merge)
        expect = [dataset.label_transition(int(p), int(q), merge)
                  for p, q in zip(a.labels.ravel(), b.labels.ravel())]
        assert y.tolist() == expect


def _setup(h=6, w=7, bands=2, length=4, seed=0):
    rng = np.random.default_rng(seed)
    r = NormalizedRaster(rng.uniform(-1, 1, size=(h, w, bands)))
    b_t = BuiltUpMap(np.where(rng.random((h, w)) > 0.6, 1, -1))
    b_t1 = BuiltUpMap(np.where((b_t.labels == 1) | (rng.random((h, w)) > 0.8), 1, -1))
    enc = new_autoencoder(bands * 9, length, seed=seed)
    return r, b_t, b_t1, enc


def test_matrix_shape_and_rows():
    r, b_t, b_t1, enc = _setup()
    X, y = dataset.build_matrices(b_t, b_t1, r, enc)
    assert X.shape == (42, 1 + 8 + 4) and y.shape == (42,)
    i, j = 2, 3
    row = X[i * 7 + j]
    assert np.array_equal(row[:9], window(b_t, (i, j)))
    assert np.allclose(row[9:], enc.encode(window(r, (i, j))))


def test_shape_mismatch():
    r, b_t, b_t1, enc = _setup()
    with pytest.raises(ShapeError):
        dataset.build_matrices(b_t, BuiltUpMap(np.ones((3, 3))), r, enc)
    with pytest.raises(ShapeError):
        dataset.feature_matrix(b_t, NormalizedRaster(np.zeros((2, 2, 2))), enc)


def test_class_histogram_and_counts():
    a = BuiltUpMap(np.array([[-1, -1], [1, 1]]))
    b = BuiltUpMap(np.array([[-1, 1], [1, -1]]))
    assert dataset.class_histogram(dataset.transition_labels(a, b, False)) == {0: 1, 1: 1, 2: 1, 3: 1}
    assert dataset.transition_counts(a, b) == (2, 2)


def test_folds_balanced_and_disjoint():
    plan = dataset.make_folds(103, 10, seed=4)
    assert set(plan.sizes().tolist()) == {10, 11}
    seen = np.zeros(103, int)
    for train, test in plan.splits():
        assert len(np.intersect1d(train, test)) == 0
        assert len(train) + len(test) == 103
        seen[test] += 1
    assert (seen == 1).all()
    assert plan == dataset.make_folds(103, 10, seed=4)
    assert plan != dataset.make_folds(103, 10, seed=5)


def test_stratified_folds():
    y = np.array([0] * 50 + [2] * 20)
    plan = dataset.make_folds(70, 10, seed=0, stratify=y)
    for _, test in plan.splits():
        assert np.count_nonzero(y[test] == 2) == 2


def test_folds_invalid():
    with pytest.raises(ValueError):
        dataset.make_folds(5, 10)
    with pytest.raises(ValueError):
        dataset.make_folds(5, 1)


def test_csv_and_npy(tmp_path):
    r, b_t, b_t1, enc = _setup()
    X, y = dataset.build_matrices(b_t, b_t1, r, enc)
    dataset.dump_csv(X, y, tmp_path / "m.csv")
    lines = (tmp_path / "m.csv").read_text().splitlines()
    assert lines[0].split(",") == dataset.csv_header(8, 4)
    assert len(lines) == 43
    first = lines[1].split(",")
    assert float(first[10]) == X[0, 10] and int(first[-1]) == y[0]
    dataset.save_matrices(X, y, tmp_path)
    X2, y2 = dataset.load_matrices(tmp_path)
    assert np.array_equal(X, X2) and np.array_equal(y, y2)
