import json

import numpy as np
import pytest

from urbanca.raster_io import BuiltUpMap, read_builtup, read_raster
from urbanca.synthkit import (
    SynthScenario,
    box_smooth,
    generate,
    grow,
    imbalance_of,
    rule_violations,
    write_scenario,
)


def test_rule_consistency_default():
    sc = SynthScenario(width=48, height=48, steps=3)
    raster, maps = generate(sc)
    assert rule_violations(raster, maps, sc.theta, sc.min_neighbors) == 0


def test_frozen_rule():
    sc = SynthScenario(width=32, height=32, min_neighbors=9)
    raster, maps = generate(sc)
    assert all(np.array_equal(m.labels, maps[0].labels) for m in maps)
    assert imbalance_of(maps) == [0.0, 0.0]


def test_dilation_rule():
    sc = SynthScenario(width=20, height=20, min_neighbors=1, theta=-1.0)
    seed = np.full((20, 20), -1)
    seed[10, 10] = 1
    _, maps = generate(sc, seed_map=BuiltUpMap(seed))
    assert np.count_nonzero(maps[1].labels == 1) == 9
    assert np.count_nonzero(maps[2].labels == 1) == 25


def test_grow_counts_offgrid_as_nonbuilt():
    b = BuiltUpMap(np.array([[1, -1], [-1, -1]]))
    out = grow(b, np.ones((2, 2), bool), 2)
    assert out.labels.tolist() == [[1, -1], [-1, -1]]


def test_imbalance_values():
    a = BuiltUpMap(-np.ones((3, 3)))
    b = BuiltUpMap(np.ones((3, 3)))
    assert imbalance_of([a, a]) == [0.0]
    assert imbalance_of([a, b]) == [1.0]


def test_default_imbalance_in_range():
    for seed in range(3):
        _, maps = generate(SynthScenario(seed=seed))
        assert all(0.05 <= f <= 0.15 for f in imbalance_of(maps))


def test_degenerate_theta():
    with pytest.raises(ValueError):
        generate(SynthScenario(width=16, height=16, theta=1.0))
    _, maps = generate(SynthScenario(width=16, height=16, theta=1.0), allow_degenerate=True)
    assert np.array_equal(maps[0].labels, maps[-1].labels)
    with pytest.raises(ValueError):
        generate(SynthScenario(steps=1))


def test_deterministic_and_seed_sensitive():
    a = generate(SynthScenario(width=24, height=24, seed=5))
    b = generate(SynthScenario(width=24, height=24, seed=5))
    c = generate(SynthScenario(width=24, height=24, seed=6))
    assert a[0] == b[0] and a[0] != c[0]
    assert all(np.array_equal(x.labels, y.labels) for x, y in zip(a[1], b[1]))


def test_box_smooth_preserves_constant():
    assert np.allclose(box_smooth(np.full((5, 4), 3.0), 3), 3.0)


def test_write_scenario(tmp_path):
    sc = SynthScenario(width=16, height=12, seed=2)
    raster, maps = generate(sc)
    write_scenario(sc, raster, maps, tmp_path)
    assert read_raster(tmp_path / "raster.ppm") == raster
    assert np.array_equal(read_builtup(tmp_path / "builtup_2.pgm").labels, maps[2].labels)
    assert SynthScenario.from_json((tmp_path / "scenario.json").read_text()) == sc
    assert json.loads(sc.to_json())["width"] == 16
