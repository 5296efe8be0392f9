import numpy as np
import pytest

from urbanca.knowledge import _backend
from urbanca.knowledge import gini, load_model, model_from_bytes, train_forest, train_tree
from urbanca.knowledge.tree import DecisionTree

BACKENDS = [_backend.python_kernels] + ([_backend.compiled_kernels] if _backend.compiled_kernels else [])


def test_gini_values():
    assert gini([3, 1]) == pytest.approx(0.375)
    assert gini([5, 0, 0]) == 0.0
    assert gini([1, 1, 1, 1]) == pytest.approx(0.75)
    with pytest.raises(ValueError):
        gini([0, 0])


def brute_force_split(X, y):
    """Largest weighted-Gini decrease over every feature and midpoint threshold."""
    n = len(y)
    classes = np.unique(y)
    def g(labels):
        return gini([np.sum(labels == c) for c in classes])
    parent = g(y)
    best = 0.0
    for f in range(X.shape[1]):
        vals = np.unique(X[:, f])
        for a, b in zip(vals[:-1], vals[1:]):
            m = X[:, f] <= (a + b) / 2
            dec = parent - (m.sum() / n) * g(y[m]) - ((~m).sum() / n) * g(y[~m])
            best = max(best, dec)
    return best


@pytest.mark.parametrize("kernels", BACKENDS, ids=lambda k: k.BACKEND)
def test_best_split_matches_brute_force(kernels):
    rng = np.random.default_rng(11)
    for trial in range(20):
        n, d = int(rng.integers(5, 40)), int(rng.integers(1, 5))
        X = np.round(rng.normal(size=(n, d)), 1)
        y = rng.integers(0, 3, size=n)
        _, yidx = np.unique(y, return_inverse=True)
        f, t, gain = kernels.best_split(X, yidx.astype(np.int64), np.arange(n, dtype=np.int64),
                                        np.arange(d, dtype=np.int64), d, int(yidx.max()) + 1, 1)
        expect = brute_force_split(X, y)
        assert gain == pytest.approx(expect, abs=1e-12)
        if expect > 0:
            m = X[:, f] <= t
            parent = gini(np.bincount(yidx))
            child = (m.sum() * gini(np.bincount(yidx[m])) + (~m).sum() * gini(np.bincount(yidx[~m]))) / n
            assert parent - child == pytest.approx(gain, abs=1e-12)


def test_backends_identical():
    if len(BACKENDS) < 2:
        pytest.skip("compiled kernels not built")
    rng = np.random.default_rng(2)
    X = np.hstack([np.where(rng.random((400, 3)) > 0.5, 1.0, -1.0), rng.normal(size=(400, 4))])
    y = (X[:, 0] > 0).astype(int) + 2 * (X[:, 4] > 0.3)
    py = train_forest(X, y, n_trees=5, seed=1, kernels=BACKENDS[0])
    cy = train_forest(X, y, n_trees=5, seed=1, kernels=BACKENDS[1])
    assert py.to_bytes() == cy.to_bytes()


def separable(n=300, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1, 1, size=(n, 3))
    y = (X[:, 0] > 0.1).astype(int) * 2 + (X[:, 2] > -0.3).astype(int)
    return X, y


def test_tree_fits_separable_and_gains_positive():
    X, y = separable()
    tree = train_tree(X, y)
    assert np.array_equal(tree.predict(X), y)
    internal = tree.feature >= 0
    assert (tree.gain[internal] > 0).all()
    # children partition their parent's rows
    for i in np.flatnonzero(internal):
        assert np.array_equal(tree.counts[tree.left[i]] + tree.counts[tree.right[i]], tree.counts[i])


def test_max_depth_and_min_leaf():
    X, y = separable()
    stump = train_tree(X, y, max_depth=1)
    assert stump.depth == 1 and stump.node_count == 3
    t = train_tree(X, y, min_leaf=20)
    leaves = t.feature < 0
    assert t.counts[leaves].sum(axis=1).min() >= 20


def test_pure_and_constant_data():
    X = np.ones((10, 2))
    assert train_tree(X, np.zeros(10, int)).node_count == 1
    t = train_tree(X, np.array([0, 1] * 5))
    assert t.node_count == 1 and t.predict(X[:1])[0] == 0


def test_rules_and_categorical():
    X = np.array([[-1.0], [1.0], [-1.0], [1.0]])
    t = train_tree(X, np.array([0, 2, 0, 2]), n_categorical=1)
    assert sorted(t.rules()) == ["x0 == +1 => 2", "x0 == -1 => 0"]


def test_tree_serialization(tmp_path):
    X, y = separable()
    tree = train_tree(X, y + 5)
    data = tree.to_bytes()
    back = model_from_bytes(data)
    assert isinstance(back, DecisionTree)
    assert back.to_bytes() == data
    assert np.array_equal(back.left, tree.left) and np.array_equal(back.right, tree.right)
    assert np.array_equal(back.predict(X), tree.predict(X))


def test_forest_without_randomness_equals_tree():
    X, y = separable()
    tree = train_tree(X, y)
    forest = train_forest(X, y, n_trees=3, max_features=None, bootstrap=False)
    assert all(np.array_equal(t.feature, tree.feature) for t in forest.trees)
    assert np.array_equal(forest.predict(X), tree.predict(X))


def test_forest_vote_tie_goes_to_lowest_class():
    X = np.array([[0.0], [1.0]])
    a = train_tree(X, np.array([0, 1]))
    b = train_tree(X, np.array([1, 0]))
    from urbanca.knowledge import RandomForest
    f = RandomForest(a.classes, 1, [a, b])
    assert f.vote_counts(X).tolist() == [[1, 1], [1, 1]]
    assert f.predict(X).tolist() == [0, 0]


def test_forest_deterministic_and_parallel_equal(tmp_path):
    X, y = separable(200, seed=1)
    a = train_forest(X, y, n_trees=6, seed=3)
    b = train_forest(X, y, n_trees=6, seed=3, n_jobs=3)
    c = train_forest(X, y, n_trees=6, seed=4)
    assert a.to_bytes() == b.to_bytes()
    assert a.to_bytes() != c.to_bytes()
    a.save(tmp_path / "f.ucam")
    assert load_model(tmp_path / "f.ucam").to_bytes() == a.to_bytes()
    assert (a.predict(X) == y).mean() > 0.95
