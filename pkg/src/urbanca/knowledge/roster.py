"""Train a roster of transition models on one data matrix."""
from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .bayes import train_gnb
from .forest import train_forest
from .linear import train_logreg
from .mlp import train_mlp
from .tree import train_tree

log = logging.getLogger(__name__)

TRAINERS = {
    "tree": train_tree,
    "forest": train_forest,
    "logreg": train_logreg,
    "gnb": train_gnb,
    "mlp": train_mlp,
}
SEEDED = {"tree", "forest", "logreg", "mlp"}

DEFAULT_ROSTER = (
    {"kind": "tree"},
    {"kind": "forest", "params": {"n_trees": 100}},
    {"kind": "logreg"},
    {"kind": "gnb"},
    {"kind": "mlp"},
)

# every setting searched per classifier in the reference experiments;
# expand_grid turns this into 4 + 3 + 3 + 1 + 5 entries
SEARCH_GRID = (
    {"kind": "tree", "params": {"max_depth": [10, 100, 200, None]}},
    {"kind": "forest", "params": {"n_trees": [10, 100, 1000]}},
    {"kind": "logreg", "params": {"l2": [0.01, 1.0, 100.0]}},
    {"kind": "gnb"},
    {"kind": "mlp", "params": {"hidden": [[10], [20, 15], [20, 15, 10], [20, 15, 10, 5],
                                          [20, 15, 10, 5, 3]]}},
)


@dataclass
class RosterEntry:
    kind: str
    params: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        if self.kind not in TRAINERS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if not self.name:
            self.name = self.kind


@dataclass
class TrainedModel:
    entry: RosterEntry
    model: object = None
    train_seconds: float = float("nan")
    error: str = ""

    @property
    def ok(self) -> bool:
        return self.model is not None


def _as_entry(item) -> RosterEntry:
    if isinstance(item, RosterEntry):
        return item
    if isinstance(item, str):
        return RosterEntry(item)
    if isinstance(item, tuple):
        kind, params = item
        return RosterEntry(kind, dict(params))
    return RosterEntry(item["kind"], dict(item.get("params", {})), item.get("name", ""))


def expand_grid(roster):
    """Expand list-valued parameters into one entry per combination.

    ``{"kind": "forest", "params": {"n_trees": [10, 100]}}`` becomes two
    entries named ``forest[n_trees=10]`` and ``forest[n_trees=100]``.
    Tuples stay scalar so MLP layer shapes can be given as ``(20, 15)``;
    in JSON configs list-of-lists plays that role.
    """
    out = []
    for item in roster:
        e = _as_entry(item)
        grid_keys = [k for k, v in e.params.items() if isinstance(v, list)]
        if not grid_keys:
            out.append(e)
            continue
        for combo in itertools.product(*(e.params[k] for k in grid_keys)):
            params = dict(e.params)
            params.update(zip(grid_keys, combo))
            label = ",".join(f"{k}={_fmt(v)}" for k, v in zip(grid_keys, combo))
            out.append(RosterEntry(e.kind, params, f"{e.name}[{label}]"))
    return out


def _fmt(v):
    if isinstance(v, (list, tuple)):
        return "-".join(map(str, v))
    return str(v)


def train_entry(entry, X, y, seed=0, n_categorical=0):
    entry = _as_entry(entry)
    params = dict(entry.params)
    if entry.kind in SEEDED:
        params.setdefault("seed", seed)
    if entry.kind in ("tree", "forest"):
        params.setdefault("n_categorical", n_categorical)
    if entry.kind == "mlp" and "hidden" in params:
        params["hidden"] = tuple(params["hidden"])
    return TRAINERS[entry.kind](X, y, **params)


def train_all(X, y, roster=DEFAULT_ROSTER, seed=0, n_categorical=0):
    """Train every roster entry, timing each; failures are recorded, not raised."""
    entries = expand_grid(roster)
    if not entries:
        raise ValueError("roster is empty")
    results = []
    for e in entries:
        t0 = time.perf_counter()
        try:
            model = train_entry(e, X, y, seed=seed, n_categorical=n_categorical)
        except Exception as exc:  # noqa: BLE001 - one bad model must not sink the roster
            log.warning("training %s failed: %s", e.name, exc)
            results.append(TrainedModel(e, None, time.perf_counter() - t0, f"{type(exc).__name__}: {exc}"))
            continue
        results.append(TrainedModel(e, model, time.perf_counter() - t0))
    return results


def predict(model, x) -> int:
    """Transition class code for a single feature row."""
    return model.predict_one(np.asarray(x, dtype=np.float64))
