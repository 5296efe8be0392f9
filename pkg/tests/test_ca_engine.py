import json

import numpy as np
import pytest

from urbanca import dataset
from urbanca.ca_engine import CellState, labels_from_transitions, simulate, step, write_run
from urbanca.encoder import new_autoencoder
from urbanca.errors import ShapeError
from urbanca.knowledge import train_forest, train_tree
from urbanca.raster_io import MOORE_1, BuiltUpMap, NormalizedRaster, read_builtup


@pytest.fixture(scope="module")
def world():
    rng = np.random.default_rng(0)
    r = NormalizedRaster(rng.uniform(-1, 1, size=(12, 10, 2)))
    b0 = BuiltUpMap(np.where(rng.random((12, 10)) > 0.7, 1, -1))
    b1 = BuiltUpMap(np.where((b0.labels == 1) | (rng.random((12, 10)) > 0.8), 1, -1))
    enc = new_autoencoder(18, 3, seed=0)
    X, y = dataset.build_matrices(b0, b1, r, enc)
    model = train_forest(X, y, n_trees=5, seed=0, n_categorical=9)
    return r, b0, enc, model, X.shape[1]


def test_cell_state():
    CellState(1, 2)
    CellState(-1, 0)
    with pytest.raises(ValueError):
        CellState(-1, 1)
    assert labels_from_transitions([0, 1, 2, 3]).tolist() == [-1, 1, 1, -1]


def test_step_matches_model(world):
    r, b0, enc, model, _ = world
    b1, tau = step(b0, r, model, enc)
    X = dataset.feature_matrix(b0, r, enc)
    assert np.array_equal(tau.ravel(), model.predict(X))
    assert np.array_equal(b1.labels, labels_from_transitions(tau))


def test_order_independent(world):
    r, b0, enc, model, _ = world
    base, tau = step(b0, r, model, enc)
    for seed in range(3):
        order = np.random.default_rng(seed).permutation(b0.labels.size)
        other, tau2 = step(b0, r, model, enc, order=order)
        assert other.labels.tobytes() == base.labels.tobytes()
        assert tau2.tobytes() == tau.tobytes()


def test_simulate_composes(world):
    r, b0, enc, model, _ = world
    run = simulate(b0, r, model, enc, steps=2)
    once, _ = step(b0, r, model, enc)
    twice, _ = step(once, r, model, enc)
    assert run.maps[1].labels.tobytes() == twice.labels.tobytes()
    assert run.last is run.maps[-1]
    with pytest.raises(ValueError):
        simulate(b0, r, model, enc, steps=0)


@pytest.mark.parametrize("code,label", [(2, 1), (1, 1), (0, -1)])
def test_constant_models(world, code, label):
    r, b0, enc, _, width = world
    const = train_tree(np.zeros((2, width)), np.array([code, code]))
    out, _ = step(b0, r, const, enc)
    assert (out.labels == label).all()


def test_width_mismatch(world):
    r, b0, enc, model, _ = world
    with pytest.raises(ShapeError):
        step(b0, r, model, new_autoencoder(18, 4))


def test_write_run(world, tmp_path):
    r, b0, enc, model, _ = world
    run = simulate(b0, r, model, enc, steps=6, seed=9)
    meta = write_run(run, tmp_path, start_year=1991, years_per_step=10, metadata={"note": "x"})
    years = [o["year"] for o in meta["outputs"]]
    assert years == [2001, 2011, 2021, 2031, 2041, 2051]
    assert (tmp_path / "builtup_2051.pgm").exists() and (tmp_path / "transitions_2051.pgm").exists()
    assert np.array_equal(read_builtup(tmp_path / "builtup_2051.pgm").labels, run.last.labels)
    side = json.loads((tmp_path / "run.json").read_text())
    assert side["seed"] == 9 and side["note"] == "x"
