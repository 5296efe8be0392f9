"""Independent oracles and the synthetic benchmark pipeline shared by the tests."""
import numpy as np

from urbanca import dataset, metrics
from urbanca.ca_engine import step
from urbanca.encoder import new_autoencoder, train_autoencoder
from urbanca.knowledge import train_forest
from urbanca.raster_io import MOORE_1, normalize
from urbanca.synthkit import SynthScenario, generate

BENCH_SEEDS = (0, 1, 2)


def tally(obs_t, obs_t1, pred_t1):
    """Per-pixel A-E tally written out with plain loops (growth-only change)."""
    A = B = C = D = E = 0
    for a, b, p in zip(np.ravel(obs_t).tolist(), np.ravel(obs_t1).tolist(), np.ravel(pred_t1).tolist()):
        obs_change = a == -1 and b == 1
        pred_change = a == -1 and p == 1
        if obs_change and pred_change:
            if p == b:
                B += 1
            else:
                C += 1
        elif obs_change:
            A += 1
        elif pred_change:
            D += 1
        else:
            E += 1
    return A, B, C, D, E


def tally_metrics(A, B, C, D, E):
    """Metric ratios as (numerator, denominator) pairs; ``None`` when undefined."""
    pairs = {"FoM": (B, A + B + C + D), "PA": (B, A + B + C), "UA": (B, B + C + D),
             "OA": (B + E, A + B + C + D + E)}
    return {k: (None if d == 0 else n / d) for k, (n, d) in pairs.items()}


def central_diff_check(f, params, grads, n_coords, rng, h=1e-6):
    """Worst relative error between analytic and central-difference gradients.

    ``f()`` evaluates the loss with ``params`` modified in place.
    Coordinates are drawn across all arrays, weighted by their size.
    """
    sizes = np.array([p.size for p in params])
    which = rng.choice(len(params), size=n_coords, p=sizes / sizes.sum())
    worst = 0.0
    for k in which:
        p, g = params[k], grads[k]
        i = int(rng.integers(p.size))
        flat = p.reshape(-1)
        old = flat[i]
        flat[i] = old + h
        fp = f()
        flat[i] = old - h
        fm = f()
        flat[i] = old
        num = (fp - fm) / (2 * h)
        ana = g.reshape(-1)[i]
        err = abs(num - ana) / max(abs(num) + abs(ana), 1e-7)
        worst = max(worst, err)
    return worst


def fit_pipeline(seed=0, code_length=10, n_trees=100, scenario=None):
    """prepare -> train(forest) -> step on the held-out interval.

    Returns ``(report, ae_final_loss)``.
    """
    sc = scenario or SynthScenario(seed=seed)
    raster, maps = generate(sc)
    r = normalize(raster)
    enc, loss = fit_encoder(r, code_length, seed)
    X, y = dataset.build_matrices(maps[0], maps[1], r, enc, MOORE_1)
    model = train_forest(X, y, n_trees=n_trees, seed=seed, n_categorical=1 + MOORE_1.size)
    pred, _ = step(maps[1], r, model, enc, MOORE_1)
    return metrics.validate(maps[1], maps[2], pred), loss


def fit_encoder(r, code_length, seed):
    XR = dataset.raster_neighborhoods(r, MOORE_1)
    enc = new_autoencoder(XR.shape[1], code_length, seed=seed)
    report = train_autoencoder(enc, XR, seed=seed)
    return enc, report.final_loss
