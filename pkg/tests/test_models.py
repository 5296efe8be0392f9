import numpy as np
import pytest

from urbanca.errors import FormatError, ShapeError
from urbanca.knowledge import (
    DEFAULT_ROSTER,
    expand_grid,
    model_from_bytes,
    predict,
    train_all,
    train_gnb,
    train_logreg,
    train_mlp,
)
from urbanca.knowledge.linear import ovr_objective
from urbanca.knowledge.mlp import new_mlp

from helpers import central_diff_check


def blobs(n=300, seed=0):
    rng = np.random.default_rng(seed)
    centers = np.array([[-2.0, 0.0], [2.0, 0.0], [0.0, 2.5]])
    y = rng.integers(0, 3, size=n)
    return centers[y] + rng.normal(scale=0.4, size=(n, 2)), y


def test_logreg_gradient():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(30, 5))
    T = np.eye(3)[rng.integers(0, 3, 30)]
    W, b = rng.normal(size=(5, 3)), rng.normal(size=3)
    _, dW, db = ovr_objective(W, b, X, T, 0.7)
    err = central_diff_check(lambda: ovr_objective(W, b, X, T, 0.7)[0], [W, b], [dW, db], 100, rng)
    assert err < 1e-4


def test_logreg_fits_blobs_and_shrinks_with_l2():
    X, y = blobs()
    m = train_logreg(X, y + 1)
    assert (m.predict(X) == y + 1).mean() > 0.95
    strong = train_logreg(X, y, l2=1e6)
    assert np.abs(strong.W).max() < 1e-2 * np.abs(m.W).max()


def test_gnb_hand_computed():
    X = np.array([[0.0, 1.0], [2.0, 1.0], [4.0, 3.0], [6.0, 5.0]])
    y = np.array([0, 0, 1, 1])
    m = train_gnb(X, y)
    assert np.allclose(m.priors, [0.5, 0.5])
    assert np.allclose(m.means, [[1.0, 1.0], [5.0, 4.0]])
    floor = 1e-9 * np.var(X, axis=0).max()
    assert np.allclose(m.variances, [[1.0, floor], [1.0, 1.0]])
    # log N(3; 1, 1) + log N(2; 1, floor) vs class 1
    x = np.array([[3.0, 1.0]])
    jll = m.joint_log_likelihood(x)[0]
    def lognorm(v, mu, var):
        return -0.5 * np.log(2 * np.pi * var) - (v - mu) ** 2 / (2 * var)
    expect0 = np.log(0.5) + lognorm(3, 1, 1) + lognorm(1, 1, floor)
    expect1 = np.log(0.5) + lognorm(3, 5, 1) + lognorm(1, 4, 1)
    assert jll == pytest.approx([expect0, expect1])
    assert m.predict(x)[0] == 0
    assert np.allclose(m.predict_proba(X).sum(axis=1), 1.0)


def test_mlp_gradient():
    rng = np.random.default_rng(2)
    m = new_mlp(np.arange(3), 4, hidden=(6, 5), seed=1)
    X = rng.normal(size=(25, 4))
    yi = rng.integers(0, 3, 25)
    _, grads = m.loss_and_grads(X, yi)
    err = central_diff_check(lambda: m.loss_and_grads(X, yi)[0], m.params_list(), grads, 100, rng)
    assert err < 1e-4


def test_mlp_learns_xor():
    X = np.array([[-1, -1], [-1, 1], [1, -1], [1, 1]] * 50, dtype=float)
    y = (X[:, 0] != X[:, 1]).astype(int)
    m, losses = train_mlp(X, y, hidden=(8,), epochs=200, lr=0.1, batch_size=20, seed=0,
                          return_losses=True)
    assert np.array_equal(m.predict(X), y)
    assert losses[-1] < losses[0]


@pytest.mark.parametrize("trainer", [train_logreg, train_gnb, train_mlp])
def test_roundtrip(trainer):
    X, y = blobs(120)
    m = trainer(X, y)
    back = model_from_bytes(m.to_bytes())
    assert type(back) is type(m)
    assert back.to_bytes() == m.to_bytes()
    assert np.array_equal(back.predict(X), m.predict(X))


def test_model_file_errors():
    X, y = blobs(50)
    data = train_gnb(X, y).to_bytes()
    with pytest.raises(FormatError):
        model_from_bytes(b"XXXX" + data[4:])
    with pytest.raises(FormatError):
        model_from_bytes(data[:-3])
    with pytest.raises(FormatError):
        model_from_bytes(data[:6] + b"\x63" + data[7:])


def test_width_checked():
    X, y = blobs(50)
    m = train_gnb(X, y)
    with pytest.raises(ShapeError):
        m.predict(np.zeros((2, 3)))
    assert predict(m, X[0]) == m.predict(X[:1])[0]


def test_expand_grid():
    entries = expand_grid([{"kind": "forest", "params": {"n_trees": [10, 100], "max_depth": 5}},
                           {"kind": "mlp", "params": {"hidden": [[20, 15], [10]]}}, "gnb"])
    assert [e.name for e in entries] == ["forest[n_trees=10]", "forest[n_trees=100]",
                                         "mlp[hidden=20-15]", "mlp[hidden=10]", "gnb"]
    with pytest.raises(ValueError):
        expand_grid([{"kind": "svm"}])


def test_train_all_reports_failures():
    X, y = blobs(100)
    res = train_all(X, y, [{"kind": "tree"}, {"kind": "forest", "params": {"n_trees": 0}},
                           {"kind": "gnb"}])
    assert [r.ok for r in res] == [True, False, True]
    assert "n_trees" in res[1].error


def test_default_roster_trains():
    X, y = blobs(150)
    roster = [dict(e) for e in DEFAULT_ROSTER]
    roster[1] = {"kind": "forest", "params": {"n_trees": 5}}
    res = train_all(X, y, roster)
    assert all(r.ok for r in res)
    for r in res:
        assert (r.model.predict(X) == y).mean() > 0.9, r.entry.name


def test_search_grid_expands():
    from urbanca.knowledge import SEARCH_GRID
    names = [e.name for e in expand_grid(SEARCH_GRID)]
    assert len(names) == 16
    assert "tree[max_depth=None]" in names and "mlp[hidden=20-15-10-5-3]" in names


def test_mlp_zero_lr_keeps_loss():
    X, y = blobs(60)
    _, losses = train_mlp(X, y, lr=0.0, epochs=4, return_losses=True)
    assert len(set(losses)) == 1


def test_logreg_huge_l2_predicts_majority():
    X, y = blobs(200)
    y = np.where(np.arange(200) < 140, 0, y)
    m = train_logreg(X, y, l2=1e6)
    majority = np.bincount(y).argmax()
    assert (m.predict(X) == majority).all()
