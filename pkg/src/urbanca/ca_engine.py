"""Synchronous cellular-automaton update driven by a learned transition model."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import B_B, NB_B, encode_raster, feature_matrix
from .errors import ShapeError
from .raster_io import (
    BUILT,
    MOORE_1,
    NON_BUILT,
    BuiltUpMap,
    NeighborhoodSpec,
    NormalizedRaster,
    RasterGrid,
    write_builtup,
    write_raster,
)

GROWTH_CLASSES = (NB_B, B_B)


@dataclass(frozen=True)
class CellState:
    label: int
    transition: int

    def __post_init__(self):
        expected = BUILT if self.transition in GROWTH_CLASSES else NON_BUILT
        if self.label != expected:
            raise ValueError(f"label {self.label} inconsistent with transition class {self.transition}")


def labels_from_transitions(tau) -> np.ndarray:
    tau = np.asarray(tau)
    return np.where(np.isin(tau, GROWTH_CLASSES), BUILT, NON_BUILT).astype(np.int8)


def _check_widths(model, enc, spec):
    expected = 1 + spec.size + enc.code_width
    if model.feature_width != expected:
        raise ShapeError(
            f"model takes {model.feature_width} features but the neighborhood and encoder give {expected}"
        )


def step(b_t: BuiltUpMap, r: NormalizedRaster, model, enc, spec: NeighborhoodSpec = MOORE_1,
         encodings=None, order=None):
    """Advance one time step; return the new map and its transition-class grid.

    Every cell reads the old map only. ``order`` optionally permutes the
    sequence in which cells are evaluated (the result does not depend on it).
    """
    _check_widths(model, enc, spec)
    X = feature_matrix(b_t, r, enc, spec, encodings)
    if order is None:
        tau = model.predict(X)
    else:
        order = np.asarray(order)
        tau = np.empty(X.shape[0], dtype=np.int64)
        tau[order] = model.predict(X[order])
    tau = tau.reshape(b_t.shape).astype(np.int8)
    return BuiltUpMap(labels_from_transitions(tau)), tau


@dataclass
class SimulationRun:
    start: BuiltUpMap
    maps: list = field(default_factory=list)
    transitions: list = field(default_factory=list)
    steps: int = 0
    seed: int = 0

    @property
    def last(self) -> BuiltUpMap:
        return self.maps[-1] if self.maps else self.start


def simulate(b_0: BuiltUpMap, r: NormalizedRaster, model, enc, spec: NeighborhoodSpec = MOORE_1,
             steps: int = 1, seed: int = 0) -> SimulationRun:
    """Apply :func:`step` ``steps`` times, feeding each predicted map back in.

    The raster is held fixed, so its encodings are computed once.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    _check_widths(model, enc, spec)
    encodings = encode_raster(r, enc, spec)
    run = SimulationRun(start=b_0, steps=steps, seed=seed)
    current = b_0
    for _ in range(steps):
        current, tau = step(current, r, model, enc, spec, encodings=encodings)
        run.maps.append(current)
        run.transitions.append(tau)
    return run


def transition_raster(tau) -> RasterGrid:
    """Class codes 0..3 scaled to grey levels 0, 85, 170, 255."""
    return RasterGrid(np.asarray(tau, dtype=np.int64) * 85, maxval=255)


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def write_run(run: SimulationRun, out_dir, start_year=0, years_per_step=1, prefix="",
              metadata=None) -> dict:
    """Write one built-up PGM and one transition-class PGM per step plus a JSON sidecar."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    for k, (bmap, tau) in enumerate(zip(run.maps, run.transitions), start=1):
        year = start_year + k * years_per_step
        bpath = out_dir / f"{prefix}builtup_{year}.pgm"
        tpath = out_dir / f"{prefix}transitions_{year}.pgm"
        write_builtup(bmap, bpath)
        write_raster(transition_raster(tau), tpath)
        files.append({"step": k, "year": year, "builtup": bpath.name, "transitions": tpath.name,
                      "sha256": sha256_bytes(bpath.read_bytes())})
    meta = {
        "steps": run.steps,
        "seed": run.seed,
        "start_year": start_year,
        "years_per_step": years_per_step,
        "outputs": files,
    }
    meta.update(metadata or {})
    (out_dir / f"{prefix}run.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return meta
