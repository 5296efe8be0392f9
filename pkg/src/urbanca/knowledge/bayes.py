from __future__ import annotations

import numpy as np

from .base import TransitionModel, check_xy, encode_labels, register

_LOG_2PI = np.log(2.0 * np.pi)


@register
class GaussianNB(TransitionModel):
    """Per-class independent Gaussians with maximum-likelihood parameters."""

    kind = "gnb"

    def __init__(self, classes, feature_width, means, variances, priors, params=None):
        super().__init__(classes, feature_width, params)
        self.means = np.asarray(means, dtype=np.float64)
        self.variances = np.asarray(variances, dtype=np.float64)
        self.priors = np.asarray(priors, dtype=np.float64)

    def joint_log_likelihood(self, X):
        out = np.empty((X.shape[0], self.n_classes))
        for k in range(self.n_classes):
            var = self.variances[k]
            ll = -0.5 * np.sum(_LOG_2PI + np.log(var)) - 0.5 * np.sum((X - self.means[k]) ** 2 / var, axis=1)
            out[:, k] = np.log(self.priors[k]) + ll
        return out

    def predict_proba(self, X):
        jll = self.joint_log_likelihood(self._check_x(X))
        jll -= jll.max(axis=1, keepdims=True)
        p = np.exp(jll)
        return p / p.sum(axis=1, keepdims=True)

    def predict_index(self, X):
        return np.argmax(self.joint_log_likelihood(X), axis=1)

    def _write_payload(self, w):
        w.f64s(self.means)
        w.f64s(self.variances)
        w.f64s(self.priors)

    @classmethod
    def _read_payload(cls, r, classes, feature_width, params):
        K = len(classes)
        means = r.f64s((K, feature_width))
        variances = r.f64s((K, feature_width))
        priors = r.f64s((K,))
        return cls(classes, feature_width, means, variances, priors, params)


def train_gnb(X, y, var_floor_ratio=1e-9):
    """Fit class priors and per-class feature means/variances.

    Variances are floored at ``var_floor_ratio`` times the largest feature
    variance of the whole dataset, which keeps constant built-up columns from
    producing zero variances.
    """
    X, y = check_xy(X, y)
    classes, yidx = encode_labels(y)
    K, d = len(classes), X.shape[1]
    floor = var_floor_ratio * float(np.max(np.var(X, axis=0)))
    if floor <= 0.0:
        floor = var_floor_ratio
    means = np.empty((K, d))
    variances = np.empty((K, d))
    priors = np.empty(K)
    for k in range(K):
        Xk = X[yidx == k]
        means[k] = Xk.mean(axis=0)
        variances[k] = np.maximum(Xk.var(axis=0), floor)
        priors[k] = Xk.shape[0] / X.shape[0]
    return GaussianNB(classes, d, means, variances, priors, {"var_floor_ratio": var_floor_ratio})
