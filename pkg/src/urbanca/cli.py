"""Command line entry point: ``urbanca {prepare,train,simulate,evaluate,sweep,synth}``.

Settings come from an optional JSON config file (``--config``) and are
overridden by command-line flags. Every command writes the resolved config
next to its outputs.

Exit codes: 0 success, 2 invalid input, 3 numeric divergence, 4 I/O error.
"""
from __future__ import annotations

import argparse
import copy
import hashlib
import json
import logging
import re
import sys
import time
import warnings
from pathlib import Path

from . import dataset, metrics
from .ca_engine import simulate, step, write_run
from .encoder import Autoencoder, new_autoencoder, train_autoencoder
from .errors import DivergenceError, FormatError, ShapeError, UrbanCAError
from .knowledge import DEFAULT_ROSTER, SEARCH_GRID, load_model, train_all
from .knowledge.roster import train_entry
from .raster_io import NeighborhoodSpec, normalize, read_builtup, read_raster, write_builtup
from .synthkit import SynthScenario, generate, imbalance_of, write_scenario

log = logging.getLogger("urbanca")

EXIT_OK, EXIT_INPUT, EXIT_DIVERGENCE, EXIT_IO = 0, 2, 3, 4

DEFAULT_CONFIG = {
    "raster": None,
    "builtup_t": None,
    "builtup_t1": None,
    "builtup_t2": None,
    "start": None,
    "out": "run",
    "neighborhood": {"kind": "moore", "radius": 1},
    "code_length": 10,
    "autoencoder": {"hidden": None, "epochs": 50, "batch_size": 1000, "lr": 0.05,
                    "activation": "tanh"},
    "roster": [dict(e) for e in DEFAULT_ROSTER],
    "folds": 10,
    "stratify": False,
    "seed": 0,
    "merge_bnb": True,
    "start_year": 0,
    "years_per_step": 10,
    "steps": 1,
    "model": None,
    "lengths": [5, 10, 15, 20, 25],
    "sweep_model": {"kind": "forest", "params": {"n_trees": 100}},
}


# -- config -----------------------------------------------------------------

# sections merged key by key; any other value (model specs included) is replaced whole
_MERGED = ("neighborhood", "autoencoder")


def _merge(base, override):
    out = copy.deepcopy(base)
    for k, v in override.items():
        if k in _MERGED and isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def load_config(path=None, overrides=None) -> dict:
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if path:
        cfg = _merge(cfg, json.loads(Path(path).read_text()))
    unknown = set(cfg) - set(DEFAULT_CONFIG)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return _merge(cfg, {k: v for k, v in (overrides or {}).items() if v is not None})


def _spec(cfg) -> NeighborhoodSpec:
    nb = cfg["neighborhood"]
    return NeighborhoodSpec(nb.get("kind", "moore"), int(nb.get("radius", 1)))


def _require(cfg, *keys):
    missing = [k for k in keys if not cfg.get(k)]
    if missing:
        raise ValueError(f"missing required setting(s): {', '.join(missing)}")


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n")


def _safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name.replace("=", "-")).strip("_")


def _load_inputs(cfg):
    _require(cfg, "raster", "builtup_t", "builtup_t1")
    raster = read_raster(cfg["raster"])
    b_t = read_builtup(cfg["builtup_t"])
    b_t1 = read_builtup(cfg["builtup_t1"])
    b_t2 = read_builtup(cfg["builtup_t2"]) if cfg.get("builtup_t2") else None
    for m in (b_t1, b_t2):
        if m is not None and m.shape != b_t.shape:
            raise ShapeError("built-up maps differ in shape")
    if (raster.height, raster.width) != b_t.shape:
        raise ShapeError(f"raster {raster.height}x{raster.width} does not match built-up map {b_t.shape}")
    return raster, b_t, b_t1, b_t2


# -- pipeline pieces reused by several commands --------------------------------

def fit_encoder(r, cfg, code_length=None):
    spec = _spec(cfg)
    ae = cfg["autoencoder"]
    X_R = dataset.raster_neighborhoods(r, spec)
    length = int(code_length or cfg["code_length"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        enc = new_autoencoder(X_R.shape[1], length, hidden=ae.get("hidden"), seed=cfg["seed"],
                              activation=ae.get("activation", "tanh"))
    report = train_autoencoder(enc, X_R, epochs=ae["epochs"], batch_size=ae["batch_size"],
                               lr=ae["lr"], seed=cfg["seed"])
    return enc, report


def evaluation_pair(cfg, b_t, b_t1, b_t2):
    """Maps ``(start, observed_next)`` used to score a model.

    The held-out interval ``t1 -> t2`` when ``builtup_t2`` is configured,
    otherwise the training interval.
    """
    return (b_t1, b_t2) if b_t2 is not None else (b_t, b_t1)


# -- commands -------------------------------------------------------------------

def cmd_prepare(cfg) -> dict:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    spec = _spec(cfg)
    raster, b_t, b_t1, _ = _load_inputs(cfg)
    r = normalize(raster)
    enc, report = fit_encoder(r, cfg)
    X, y = dataset.build_matrices(b_t, b_t1, r, enc, spec, cfg["merge_bnb"])
    enc.save(out / "encoder.ucae")
    dataset.save_matrices(X, y, out)

    transformed, persistent = dataset.transition_counts(b_t, b_t1)
    (out / "counts.csv").write_text(
        "time_step,pixels_transformed,pixels_persistent\n"
        f"{_interval_label(cfg)},{transformed},{persistent}\n"
    )
    hist = dataset.class_histogram(y)
    (out / "class_histogram.csv").write_text(
        "class,name,count\n" + "".join(f"{c},{dataset.CLASS_NAMES[c]},{n}\n" for c, n in hist.items())
    )
    (out / "encoder_losses.csv").write_text(
        "epoch,loss\n" + "".join(f"{i},{v!r}\n" for i, v in enumerate(report.epoch_losses, 1))
    )
    if cfg.get("dump_csv"):
        dataset.dump_csv(X, y, out / "matrix.csv", n_neighbors=spec.size)
    artifacts = ["encoder.ucae", "X.npy", "y.npy", "counts.csv", "class_histogram.csv",
                 "encoder_losses.csv"]
    manifest = {
        "stage": "prepare",
        "inputs": {k: _sha256(cfg[k]) for k in ("raster", "builtup_t", "builtup_t1") if cfg.get(k)},
        "artifacts": {a: _sha256(out / a) for a in artifacts},
        "shape": list(X.shape),
    }
    _write_json(out / "prepare_manifest.json", manifest)
    _write_json(out / "config.resolved.json", cfg)
    log.info("prepared %d x %d data matrix; transformed=%d persistent=%d",
             X.shape[0], X.shape[1], transformed, persistent)
    return manifest


def _interval_label(cfg):
    y0 = cfg.get("start_year") or 0
    if y0:
        return f"{y0}-{y0 + cfg['years_per_step']}"
    return "t-t1"


def cmd_train(cfg) -> list:
    out = Path(cfg["out"])
    spec = _spec(cfg)
    X, y = dataset.load_matrices(out)
    enc = Autoencoder.load(out / "encoder.ucae")
    n_cat = 1 + spec.size
    eval_maps = None
    if cfg.get("raster") and cfg.get("builtup_t") and cfg.get("builtup_t1"):
        raster, b_t, b_t1, b_t2 = _load_inputs(cfg)
        r = normalize(raster)
        start, observed = evaluation_pair(cfg, b_t, b_t1, b_t2)
        eval_maps = (r, start, observed)

    models_dir = out / "models"
    models_dir.mkdir(exist_ok=True)
    k = int(cfg["folds"])
    plan = None
    if k >= 2:
        plan = dataset.make_folds(len(y), k, cfg["seed"], stratify=y if cfg["stratify"] else None)

    roster = cfg["roster"]
    if roster == "grid":
        roster = SEARCH_GRID
    results = train_all(X, y, roster, seed=cfg["seed"], n_categorical=n_cat)
    rows, model_hashes = [], {}
    for res in results:
        row = {"kind": res.entry.name, "train_s": res.train_seconds}
        if not res.ok:
            row["error"] = res.error
            log.error("model %s failed: %s", res.entry.name, res.error)
            rows.append(row)
            continue
        path = models_dir / f"{_safe_name(res.entry.name)}.ucam"
        res.model.save(path)
        model_hashes[path.name] = _sha256(path)
        if plan is not None:
            cv = metrics.cross_validate(
                X, y, plan,
                lambda Xt, yt, e=res.entry: train_entry(e, Xt, yt, seed=cfg["seed"], n_categorical=n_cat),
            )
            row.update(cv_mean=cv.mean, cv_spread=cv.spread, cv_accuracies=cv.accuracies)
        else:
            row.update(cv_mean=float("nan"), cv_spread=float("nan"))
        if eval_maps is not None:
            r, start, observed = eval_maps
            t0 = time.perf_counter()
            pred, _ = step(start, r, res.model, enc, spec)
            row["predict_s"] = time.perf_counter() - t0
            row.update(metrics.validate(start, observed, pred, cfg["merge_bnb"]).as_dict())
        else:
            t0 = time.perf_counter()
            res.model.predict(X)
            row["predict_s"] = time.perf_counter() - t0
        rows.append(row)

    metrics.write_report_csv(rows, out / "report.csv")
    ok_rows = [r for r in rows if "error" not in r]
    (out / "cv_table.txt").write_text(metrics.format_cv_table(ok_rows))
    _write_json(out / "cv_folds.json", {r["kind"]: r.get("cv_accuracies", []) for r in ok_rows})
    _write_json(out / "train_manifest.json", {"stage": "train", "models": model_hashes,
                                              "errors": {r["kind"]: r["error"] for r in rows if "error" in r}})
    _write_json(out / "config.resolved.json", cfg)
    return rows


def cmd_simulate(cfg) -> dict:
    _require(cfg, "raster", "model")
    out = Path(cfg["out"])
    spec = _spec(cfg)
    start_path = cfg.get("start") or cfg.get("builtup_t1") or cfg.get("builtup_t")
    if not start_path:
        raise ValueError("missing start map (start, builtup_t1 or builtup_t)")
    raster = read_raster(cfg["raster"])
    start = read_builtup(start_path)
    enc_path = cfg.get("encoder") or out / "encoder.ucae"
    enc = Autoencoder.load(enc_path)
    model = load_model(cfg["model"])
    steps = int(cfg["steps"])
    run = simulate(start, normalize(raster), model, enc, spec, steps=steps, seed=cfg["seed"])
    sim_dir = out / "simulation"
    meta = write_run(
        run, sim_dir, start_year=cfg.get("start_year") or 0, years_per_step=cfg["years_per_step"],
        metadata={
            "model": str(cfg["model"]), "model_sha256": _sha256(cfg["model"]),
            "encoder_sha256": _sha256(enc_path), "start_map": str(start_path),
            "start_sha256": _sha256(start_path),
        },
    )
    _write_json(sim_dir / "config.resolved.json", cfg)
    return meta


def cmd_evaluate(obs_t, obs_t1, pred_t1, out_csv, merge_bnb=True) -> metrics.ValidationReport:
    rep = metrics.validate(read_builtup(obs_t), read_builtup(obs_t1), read_builtup(pred_t1), merge_bnb)
    acc = rep.accounting
    vals = {k: metrics._cell(v) for k, v in rep.as_dict().items()}
    Path(out_csv).parent.mkdir(parents=True, exist_ok=True)
    Path(out_csv).write_text(
        "A,B,C,D,E,FoM,PA,UA,OA\n"
        f"{acc.A},{acc.B},{acc.C},{acc.D},{acc.E},{vals['FoM']},{vals['PA']},{vals['UA']},{vals['OA']}\n"
    )
    return rep


def cmd_sweep(cfg) -> list:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    spec = _spec(cfg)
    raster, b_t, b_t1, b_t2 = _load_inputs(cfg)
    r = normalize(raster)
    start, observed = evaluation_pair(cfg, b_t, b_t1, b_t2)
    entry = cfg["sweep_model"]
    rows = []
    for length in cfg["lengths"]:
        enc, report = fit_encoder(r, cfg, code_length=length)
        X, y = dataset.build_matrices(b_t, b_t1, r, enc, spec, cfg["merge_bnb"])
        model = train_entry(entry, X, y, seed=cfg["seed"], n_categorical=1 + spec.size)
        pred, _ = step(start, r, model, enc, spec)
        rep = metrics.validate(start, observed, pred, cfg["merge_bnb"])
        rows.append({"length": int(length), "ae_loss": report.final_loss, **rep.as_dict()})
    with open(out / "sweep.csv", "w") as fh:
        fh.write("length,ae_loss,FoM,PA,UA,OA\n")
        for row in rows:
            fh.write(",".join([str(row["length"])] + [metrics._cell(row[k]) for k in
                                                      ("ae_loss", "FoM", "PA", "UA", "OA")]) + "\n")
    _write_json(out / "config.resolved.json", cfg)
    return rows


def cmd_synth(scenario: SynthScenario, out_dir) -> dict:
    raster, maps = generate(scenario)
    paths = write_scenario(scenario, raster, maps, out_dir)
    fractions = imbalance_of(maps)
    (Path(out_dir) / "imbalance.csv").write_text(
        "step,transition_fraction\n" + "".join(f"{i},{f!r}\n" for i, f in enumerate(fractions, 1))
    )
    return {"paths": paths, "imbalance": fractions}


# -- argument parsing ---------------------------------------------------------------

def _common(p):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")


def _inputs(p):
    p.add_argument("--raster", help="multi-band raster (PPM/PGM)")
    p.add_argument("--builtup-t", dest="builtup_t", help="built-up map at t (PGM)")
    p.add_argument("--builtup-t1", dest="builtup_t1", help="built-up map at t+1 (PGM)")
    p.add_argument("--builtup-t2", dest="builtup_t2", help="optional held-out map at t+2 (PGM)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="urbanca", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="train the encoder and build data/label matrices")
    _common(p)
    _inputs(p)
    p.add_argument("--code-length", dest="code_length", type=int)
    p.add_argument("--dump-csv", dest="dump_csv", action="store_true", default=None)

    p = sub.add_parser("train", help="train the classifier roster on prepared matrices")
    _common(p)
    _inputs(p)
    p.add_argument("--folds", type=int)
    p.add_argument("--kinds", help="comma-separated model kinds, replacing the configured roster")

    p = sub.add_parser("simulate", help="run the automaton forward from a built-up map")
    _common(p)
    p.add_argument("--raster")
    p.add_argument("--start", help="built-up map to start from")
    p.add_argument("--model", help="trained model file (.ucam)")
    p.add_argument("--encoder", help="encoder file (default <out>/encoder.ucae)")
    p.add_argument("--steps", type=int)
    p.add_argument("--start-year", dest="start_year", type=int)
    p.add_argument("--years-per-step", dest="years_per_step", type=int)

    p = sub.add_parser("evaluate", help="FoM/PA/UA/OA of a predicted map")
    p.add_argument("obs_t")
    p.add_argument("obs_t1")
    p.add_argument("pred_t1")
    p.add_argument("--out", default="evaluation.csv", help="output CSV path")
    p.add_argument("--no-merge", action="store_true", help="count built-up loss as change")
    p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("sweep", help="metrics as a function of encoding length")
    _common(p)
    _inputs(p)
    p.add_argument("--lengths", help="comma-separated encoding lengths, e.g. 5,10,15")

    p = sub.add_parser("synth", help="write a synthetic scenario")
    p.add_argument("--scenario", help="scenario JSON file")
    p.add_argument("--out", default="synth")
    p.add_argument("--seed", type=int)
    p.add_argument("--size", type=int, help="grid width and height")
    p.add_argument("--steps", type=int)
    p.add_argument("--theta", type=float)
    p.add_argument("--min-neighbors", dest="min_neighbors", type=int)
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


_CONFIG_FLAGS = ("seed", "out", "raster", "builtup_t", "builtup_t1", "builtup_t2", "code_length",
                 "dump_csv", "folds", "start", "model", "steps", "start_year", "years_per_step")


def _config_from_args(args) -> dict:
    overrides = {k: getattr(args, k) for k in _CONFIG_FLAGS if hasattr(args, k)}
    if getattr(args, "lengths", None):
        overrides["lengths"] = [int(v) for v in args.lengths.split(",") if v.strip()]
    if getattr(args, "kinds", None):
        overrides["roster"] = [{"kind": k.strip()} for k in args.kinds.split(",") if k.strip()]
    cfg = load_config(args.config, {k: v for k, v in overrides.items() if k != "dump_csv"})
    if getattr(args, "dump_csv", None):
        cfg["dump_csv"] = True
    if getattr(args, "encoder", None):
        cfg["encoder"] = args.encoder
    return cfg


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "evaluate":
            rep = cmd_evaluate(args.obs_t, args.obs_t1, args.pred_t1, args.out, not args.no_merge)
            print(" ".join(f"{k}={metrics._cell(v)}" for k, v in rep.as_dict().items()))
        elif args.command == "synth":
            sc = SynthScenario()
            if args.scenario:
                sc = SynthScenario.from_json(Path(args.scenario).read_text())
            fields = {k: getattr(args, k) for k in ("seed", "steps", "theta", "min_neighbors")
                      if getattr(args, k) is not None}
            if args.size:
                fields.update(width=args.size, height=args.size)
            sc = SynthScenario(**{**sc.__dict__, **fields})
            res = cmd_synth(sc, args.out)
            print("transition fraction per step: " + ", ".join(f"{f:.4f}" for f in res["imbalance"]))
        else:
            cfg = _config_from_args(args)
            if args.command == "prepare":
                m = cmd_prepare(cfg)
                print(f"data matrix {m['shape'][0]} x {m['shape'][1]} written to {cfg['out']}")
            elif args.command == "train":
                rows = cmd_train(cfg)
                print(metrics.format_cv_table([r for r in rows if "error" not in r]), end="")
                if any("error" in r for r in rows):
                    print("some models failed; see report.csv", file=sys.stderr)
            elif args.command == "simulate":
                meta = cmd_simulate(cfg)
                for o in meta["outputs"]:
                    print(f"step {o['step']}: {o['builtup']}")
            elif args.command == "sweep":
                for row in cmd_sweep(cfg):
                    print(f"len={row['length']:>3} loss={row['ae_loss']:.5f} "
                          + " ".join(f"{k}={metrics._cell(row[k])}" for k in ("FoM", "PA", "UA", "OA")))
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (FormatError, ShapeError, UrbanCAError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
