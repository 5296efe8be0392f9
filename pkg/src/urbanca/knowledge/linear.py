"""One-vs-rest logistic regression trained by mini-batch SGD."""
from __future__ import annotations

import numpy as np

from ..errors import DivergenceError
from .base import TransitionModel, check_xy, encode_labels, register


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _log1pexp(z):
    return np.logaddexp(0.0, z)


@register
class LogisticRegression(TransitionModel):
    kind = "logreg"

    def __init__(self, classes, feature_width, W, b, params=None):
        super().__init__(classes, feature_width, params)
        self.W = np.asarray(W, dtype=np.float64)
        self.b = np.asarray(b, dtype=np.float64)

    def scores(self, X):
        return self._check_x(X) @ self.W + self.b

    def predict_index(self, X):
        return np.argmax(X @ self.W + self.b, axis=1)

    def _write_payload(self, w):
        w.f64s(self.W)
        w.f64s(self.b)

    @classmethod
    def _read_payload(cls, r, classes, feature_width, params):
        K = len(classes)
        W = r.f64s((feature_width, K))
        b = r.f64s((K,))
        return cls(classes, feature_width, W, b, params)


def ovr_objective(W, b, X, T, l2, n_total=None):
    """Mean summed binary cross-entropy over classes plus ``l2 / (2n) * |W|^2``.

    Returns ``(loss, dW, db)``. ``T`` is the one-hot target matrix.
    ``n_total`` scales the penalty when ``X`` is a mini-batch.
    """
    n = X.shape[0]
    n_total = n if n_total is None else n_total
    Z = X @ W + b
    # BCE(z, t) = log(1 + e^z) - t z
    loss = float(np.sum(_log1pexp(Z) - T * Z) / n + 0.5 * l2 / n_total * np.sum(W * W))
    G = (_sigmoid(Z) - T) / n
    return loss, X.T @ G + (l2 / n_total) * W, G.sum(axis=0)


def train_logreg(X, y, l2=1.0, epochs=20, lr=0.1, seed=0, batch_size=100):
    """Fit one binary logistic model per class.

    The penalty is applied as an implicit (proximal) step ``W /= 1 + lr *
    l2 / n`` after each data-gradient step, which stays stable for very
    large ``l2``. Biases are not penalized.
    """
    X, y = check_xy(X, y)
    classes, yidx = encode_labels(y)
    n, d = X.shape
    K = len(classes)
    T = np.zeros((n, K))
    T[np.arange(n), yidx] = 1.0
    rng = np.random.default_rng(seed)
    W = np.zeros((d, K))
    b = np.zeros(K)
    shrink = 1.0 / (1.0 + lr * l2 / n)
    for epoch in range(1, epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            rows = order[start:start + batch_size]
            _, dW, db = ovr_objective(W, b, X[rows], T[rows], 0.0)
            W -= lr * dW
            b -= lr * db
            W *= shrink
        if not (np.isfinite(W).all() and np.isfinite(b).all()):
            raise DivergenceError("logistic regression weights are not finite", epoch)
    params = {"l2": l2, "epochs": epochs, "lr": lr, "seed": seed, "batch_size": batch_size}
    return LogisticRegression(classes, d, W, b, params)
