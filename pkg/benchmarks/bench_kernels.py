"""Compare the compiled and pure-Python tree kernels on one synthetic data matrix.

Usage: python3 benchmarks/bench_kernels.py [--size 128] [--trees 10] [--repeat 3]
"""
import argparse
import time

import numpy as np

from urbanca import dataset
from urbanca.encoder import new_autoencoder, train_autoencoder
from urbanca.knowledge import _backend
from urbanca.knowledge.forest import train_forest
from urbanca.knowledge.tree import train_tree
from urbanca.raster_io import MOORE_1, normalize
from urbanca.synthkit import SynthScenario, generate


def build(size, seed=0):
    raster, maps = generate(SynthScenario(width=size, height=size, seed=seed))
    r = normalize(raster)
    XR = dataset.raster_neighborhoods(r, MOORE_1)
    enc = new_autoencoder(XR.shape[1], 10, seed=seed)
    train_autoencoder(enc, XR, epochs=5, seed=seed)
    return dataset.build_matrices(maps[0], maps[1], r, enc, MOORE_1)


def timed(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=128)
    ap.add_argument("--trees", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    X, y = build(args.size)
    print(f"data matrix {X.shape[0]} x {X.shape[1]}")
    backends = {"python": _backend.python_kernels}
    if _backend.compiled_kernels is not None:
        backends["cython"] = _backend.compiled_kernels
    else:
        print("compiled kernels not built; timing the Python fallback only")

    results = {}
    for name, k in backends.items():
        t_tree, tree = timed(lambda: train_tree(X, y, n_categorical=9, kernels=k), args.repeat)
        t_forest, forest = timed(
            lambda: train_forest(X, y, n_trees=args.trees, n_categorical=9, kernels=k), args.repeat)
        results[name] = (t_tree, t_forest, tree.to_bytes(), forest.to_bytes())
        print(f"{name:>7}: tree {t_tree:7.3f} s   forest({args.trees}) {t_forest:7.3f} s")

    if len(results) == 2:
        py, cy = results["python"], results["cython"]
        print(f"speedup: tree x{py[0] / cy[0]:.1f}, forest x{py[1] / cy[1]:.1f}")
        same = py[2] == cy[2] and py[3] == cy[3]
        print("serialized models identical across backends:", same)


if __name__ == "__main__":
    main()
