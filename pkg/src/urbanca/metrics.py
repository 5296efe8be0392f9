"""Land-change validation: A-E accounting, FoM/PA/UA/OA, cross-validation reports.

Accounting categories for each cell, given the map at ``t``, the observed
map at ``t+1`` and a predicted map at ``t+1``:

A  observed change, predicted persistence
B  observed change, predicted change
C  observed change, predicted change to a different gaining category
D  observed persistence, predicted change
E  observed persistence, predicted persistence

With two land classes a predicted change can only land on the observed
category, so C is always 0.
"""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ShapeError, UndefinedMetricError
from .raster_io import BUILT, NON_BUILT, BuiltUpMap


@dataclass(frozen=True)
class ChangeAccounting:
    A: int
    B: int
    C: int
    D: int
    E: int

    @property
    def total(self) -> int:
        return self.A + self.B + self.C + self.D + self.E


def _labels(m):
    return m.labels if isinstance(m, BuiltUpMap) else np.asarray(m)


def change_masks(obs_t, obs_t1, pred_t1, merge_bnb=True):
    """Boolean ``(observed_change, predicted_change)`` masks.

    With ``merge_bnb`` only non built-up -> built-up counts as change; loss of
    built-up (observed or predicted) is treated as built-up persistence, in
    line with merging that transition into B->B when labeling.
    """
    a, b, p = _labels(obs_t), _labels(obs_t1), _labels(pred_t1)
    if not (a.shape == b.shape == p.shape):
        raise ShapeError(f"map shapes differ: {a.shape}, {b.shape}, {p.shape}")
    if merge_bnb:
        was_nb = a == NON_BUILT
        return was_nb & (b == BUILT), was_nb & (p == BUILT)
    return a != b, a != p


def account(obs_t, obs_t1, pred_t1, merge_bnb=True) -> ChangeAccounting:
    obs_change, pred_change = change_masks(obs_t, obs_t1, pred_t1, merge_bnb)
    b, p = _labels(obs_t1), _labels(pred_t1)
    A = int(np.count_nonzero(obs_change & ~pred_change))
    hit = obs_change & pred_change
    B = int(np.count_nonzero(hit & (p == b)))
    C = int(np.count_nonzero(hit & (p != b)))
    D = int(np.count_nonzero(~obs_change & pred_change))
    E = int(np.count_nonzero(~obs_change & ~pred_change))
    acc = ChangeAccounting(A, B, C, D, E)
    if acc.total != obs_change.size:
        raise AssertionError("accounting categories do not cover the map")
    return acc


def _ratio(num, den, name) -> float:
    if den == 0:
        raise UndefinedMetricError(f"{name} is undefined: zero denominator")
    return float(Fraction(num, den))


def fom(acc: ChangeAccounting) -> float:
    return _ratio(acc.B, acc.A + acc.B + acc.C + acc.D, "FoM")


def pa(acc: ChangeAccounting) -> float:
    return _ratio(acc.B, acc.A + acc.B + acc.C, "PA")


def ua(acc: ChangeAccounting) -> float:
    return _ratio(acc.B, acc.B + acc.C + acc.D, "UA")


def oa(acc: ChangeAccounting) -> float:
    return _ratio(acc.B + acc.E, acc.total, "OA")


METRICS = {"FoM": fom, "PA": pa, "UA": ua, "OA": oa}


@dataclass(frozen=True)
class ValidationReport:
    """Metrics of one prediction; an undefined metric is ``None``."""

    FoM: float | None
    PA: float | None
    UA: float | None
    OA: float | None
    accounting: ChangeAccounting

    def as_dict(self):
        return {k: getattr(self, k) for k in METRICS}


def validate(obs_t, obs_t1, pred_t1, merge_bnb=True) -> ValidationReport:
    acc = account(obs_t, obs_t1, pred_t1, merge_bnb)
    values = {}
    for name, fn in METRICS.items():
        try:
            values[name] = fn(acc)
        except UndefinedMetricError:
            values[name] = None
    return ValidationReport(accounting=acc, **values)


def improvement(report_a: ValidationReport, report_b: ValidationReport) -> dict:
    """Percentage-point change from ``report_a`` to ``report_b`` per metric."""
    out = {}
    for name in METRICS:
        a, b = getattr(report_a, name), getattr(report_b, name)
        if a is None or b is None:
            raise UndefinedMetricError(f"{name} undefined in one of the reports")
        out[name] = 100.0 * (b - a)
    return out


# -- cross-validation ----------------------------------------------------------

@dataclass
class CrossValReport:
    """Held-out accuracy per fold; ``spread`` is twice the population std of the folds."""

    accuracies: list = field(default_factory=list)
    train_seconds: list = field(default_factory=list)
    predict_seconds: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    @property
    def mean(self) -> float:
        return float(np.mean(self.accuracies)) if self.accuracies else math.nan

    @property
    def spread(self) -> float:
        return float(2.0 * np.std(self.accuracies)) if self.accuracies else math.nan

    def summary(self) -> str:
        return f"{self.mean:.6f} (+/- {self.spread:.6f})"


def fold_accuracy(y_true, y_pred) -> float:
    y_true, y_pred = np.asarray(y_true), np.asarray(y_pred)
    return float(Fraction(int(np.count_nonzero(y_true == y_pred)), y_true.size))


def cross_validate(X, y, plan, trainer) -> CrossValReport:
    """Train on k-1 folds and score the held-out fold, for every fold.

    ``trainer(X_train, y_train)`` must return an object with ``predict``.
    A fold whose trainer raises is recorded in ``errors`` and skipped.
    """
    X, y = np.asarray(X), np.asarray(y)
    if plan.assignment.shape[0] != X.shape[0]:
        raise ShapeError("fold plan does not cover the data matrix")
    report = CrossValReport()
    for fold, (train, test) in enumerate(plan.splits()):
        t0 = time.perf_counter()
        try:
            model = trainer(X[train], y[train])
        except Exception as exc:  # noqa: BLE001 - reported per fold
            report.errors.append((fold, f"{type(exc).__name__}: {exc}"))
            continue
        t1 = time.perf_counter()
        pred = model.predict(X[test])
        t2 = time.perf_counter()
        report.accuracies.append(fold_accuracy(y[test], pred))
        report.train_seconds.append(t1 - t0)
        report.predict_seconds.append(t2 - t1)
    return report


REPORT_COLUMNS = ["kind", "FoM", "PA", "UA", "OA", "cv_mean", "cv_spread", "train_s", "predict_s"]


def _cell(v):
    if v is None:
        return "undefined"
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.6f}"
    return str(v)


def write_report_csv(rows, path) -> None:
    """One row per model with :data:`REPORT_COLUMNS` (extra keys are ignored)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(REPORT_COLUMNS)
        for row in rows:
            w.writerow([_cell(row.get(c)) for c in REPORT_COLUMNS])


def format_cv_table(rows) -> str:
    """Plain-text table: classifier, CV ``mean (+/- 2 std)``, training and prediction seconds."""
    lines = [f"{'Classifier':<32} {'Cross-validation mean (+/- 2 std)':<36} {'Train (s)':>10} {'Predict (s)':>12}"]
    for row in rows:
        cv = f"{row['cv_mean']:.6f} (+/- {row['cv_spread']:.6f})"
        lines.append(f"{row['kind']:<32} {cv:<36} {row['train_s']:>10.2f} {row['predict_s']:>12.2f}")
    return "\n".join(lines) + "\n"
