"""Synthetic rasters and built-up sequences grown by a known local rule.

A cell is built at ``t+1`` iff it is built at ``t``, or it has at least
``min_neighbors`` built Moore neighbors at ``t`` and its normalized band-0
value exceeds ``theta``. Off-grid neighbors count as non built-up.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .raster_io import (
    BUILT,
    MOORE_1,
    NON_BUILT,
    BuiltUpMap,
    RasterGrid,
    neighborhood_matrix,
    normalize,
    write_builtup,
    write_raster,
)

# terrain samples stay inside this raw range so theta = -1 admits every cell
RAW_LOW, RAW_HIGH = 16, 239


@dataclass(frozen=True)
class SynthScenario:
    width: int = 128
    height: int = 128
    bands: int = 3
    min_neighbors: int = 2
    theta: float = -0.2
    steps: int = 2
    seed: int = 0
    lattice: int = 16
    smoothing: int = 4
    initial_fraction: float = 0.3
    seed_lattice: int = 3

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "SynthScenario":
        return cls(**json.loads(text))


def box_smooth(field: np.ndarray, passes: int) -> np.ndarray:
    """Repeated 3x3 mean filter with edge replication."""
    out = field.astype(np.float64)
    h, w = out.shape
    for _ in range(passes):
        p = np.pad(out, 1, mode="edge")
        out = sum(p[dr:dr + h, dc:dc + w] for dr in range(3) for dc in range(3)) / 9.0
    return out


def value_noise(height, width, lattice, rng) -> np.ndarray:
    """Random values on a coarse lattice, bilinearly interpolated to the grid."""
    gh, gw = height // lattice + 2, width // lattice + 2
    grid = rng.random((gh, gw))
    ys = np.arange(height) / lattice
    xs = np.arange(width) / lattice
    y0, x0 = np.floor(ys).astype(int), np.floor(xs).astype(int)
    fy, fx = (ys - y0)[:, None], (xs - x0)[None, :]
    g00 = grid[np.ix_(y0, x0)]
    g01 = grid[np.ix_(y0, x0 + 1)]
    g10 = grid[np.ix_(y0 + 1, x0)]
    g11 = grid[np.ix_(y0 + 1, x0 + 1)]
    return (g00 * (1 - fy) * (1 - fx) + g01 * (1 - fy) * fx
            + g10 * fy * (1 - fx) + g11 * fy * fx)


def _rescale(field, low=RAW_LOW, high=RAW_HIGH):
    lo, hi = field.min(), field.max()
    unit = (field - lo) / (hi - lo) if hi > lo else np.zeros_like(field)
    return np.rint(low + unit * (high - low)).astype(np.int64)


def make_terrain(sc: SynthScenario, rng) -> RasterGrid:
    bands = [
        _rescale(box_smooth(value_noise(sc.height, sc.width, sc.lattice, rng), sc.smoothing))
        for _ in range(sc.bands)
    ]
    return RasterGrid(np.stack(bands, axis=2), maxval=255)


def make_seed_map(sc: SynthScenario, rng) -> BuiltUpMap:
    field = box_smooth(value_noise(sc.height, sc.width, sc.seed_lattice, rng), sc.smoothing)
    cut = np.quantile(field, 1.0 - sc.initial_fraction)
    built = field > cut
    if not built.any():
        built.flat[int(np.argmax(field))] = True
    return BuiltUpMap(np.where(built, BUILT, NON_BUILT))


def developable(raster: RasterGrid, theta: float) -> np.ndarray:
    return normalize(raster).values[:, :, 0] > theta


def grow(bmap: BuiltUpMap, allowed: np.ndarray, min_neighbors: int) -> BuiltUpMap:
    """One application of the growth rule."""
    nb = neighborhood_matrix(bmap, MOORE_1)[:, 1:]
    count = (nb == BUILT).sum(axis=1).reshape(bmap.shape)
    built = bmap.labels == BUILT
    new = built | ((count >= min_neighbors) & allowed)
    return BuiltUpMap(np.where(new, BUILT, NON_BUILT))


def generate(sc: SynthScenario, seed_map: BuiltUpMap | None = None, allow_degenerate=False):
    """Return ``(raster, [B_0, ..., B_steps])``.

    Raises ``ValueError`` when ``theta`` leaves no developable cell, unless
    ``allow_degenerate`` is set.
    """
    if sc.steps < 2:
        raise ValueError("a scenario needs at least 2 steps (training and held-out interval)")
    rng = np.random.default_rng(sc.seed)
    raster = make_terrain(sc, rng)
    b0 = make_seed_map(sc, rng) if seed_map is None else seed_map
    if b0.shape != (sc.height, sc.width):
        raise ValueError("seed map does not match scenario dimensions")
    if not (b0.labels == BUILT).any():
        raise ValueError("scenario needs at least one built seed cell")
    allowed = developable(raster, sc.theta)
    if not allowed.any() and not allow_degenerate:
        raise ValueError(f"degenerate scenario: theta={sc.theta} excludes every cell")
    maps = [b0]
    for _ in range(sc.steps):
        maps.append(grow(maps[-1], allowed, sc.min_neighbors))
    return raster, maps


def rule_violations(raster: RasterGrid, maps, theta: float, min_neighbors: int) -> int:
    """Count cells where a consecutive pair disagrees with the growth rule (cell-by-cell check)."""
    norm0 = normalize(raster).values[:, :, 0]
    h, w = maps[0].shape
    bad = 0
    for prev, nxt in zip(maps[:-1], maps[1:]):
        P, N = prev.labels, nxt.labels
        for r in range(h):
            for c in range(w):
                count = 0
                for dr in (-1, 0, 1):
                    for dc in (-1, 0, 1):
                        if (dr or dc) and 0 <= r + dr < h and 0 <= c + dc < w:
                            count += P[r + dr, c + dc] == BUILT
                expect = P[r, c] == BUILT or (count >= min_neighbors and norm0[r, c] > theta)
                bad += int(expect != (N[r, c] == BUILT))
    return bad


def imbalance_of(maps) -> list:
    """Fraction of cells that changed label between each consecutive pair."""
    return [float(np.count_nonzero(a.labels != b.labels)) / a.labels.size
            for a, b in zip(maps[:-1], maps[1:])]


def write_scenario(sc: SynthScenario, raster, maps, out_dir) -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {"raster": out_dir / "raster.ppm", "scenario": out_dir / "scenario.json", "builtup": []}
    write_raster(raster, paths["raster"])
    for k, m in enumerate(maps):
        p = out_dir / f"builtup_{k}.pgm"
        write_builtup(m, p)
        paths["builtup"].append(p)
    paths["scenario"].write_text(sc.to_json())
    return paths
