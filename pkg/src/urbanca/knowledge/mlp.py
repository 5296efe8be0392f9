"""Multi-layer perceptron with softmax output, trained by momentum SGD."""
from __future__ import annotations

import math

import numpy as np

from ..errors import DivergenceError
from .base import TransitionModel, check_xy, encode_labels, register

HIDDEN_GRID = ((10,), (20, 15), (20, 15, 10), (20, 15, 10, 5), (20, 15, 10, 5, 3))


def _softmax(Z):
    Z = Z - Z.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


@register
class MLP(TransitionModel):
    """``tanh`` hidden layers followed by a softmax over the classes."""

    kind = "mlp"

    def __init__(self, classes, feature_width, weights, biases, params=None):
        super().__init__(classes, feature_width, params)
        self.weights = [np.asarray(w, dtype=np.float64) for w in weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in biases]

    def params_list(self):
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def logits(self, X):
        a = X
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w + b
            a = z if i == len(self.weights) - 1 else np.tanh(z)
        return a

    def predict_proba(self, X):
        return _softmax(self.logits(self._check_x(X)))

    def predict_index(self, X):
        return np.argmax(self.logits(X), axis=1)

    def loss_and_grads(self, X, yidx):
        """Mean cross-entropy and its gradient for every array in :meth:`params_list`."""
        n = X.shape[0]
        acts = [X]
        a = X
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w + b
            a = z if i == last else np.tanh(z)
            acts.append(a)
        Z = acts[-1]
        Zs = Z - Z.max(axis=1, keepdims=True)
        logp = Zs - np.log(np.exp(Zs).sum(axis=1, keepdims=True))
        rows = np.arange(n)
        loss = float(-logp[rows, yidx].sum() / n)
        dz = np.exp(logp)
        dz[rows, yidx] -= 1.0
        dz /= n
        grads = [None] * (2 * len(self.weights))
        for i in range(last, -1, -1):
            grads[2 * i] = acts[i].T @ dz
            grads[2 * i + 1] = dz.sum(axis=0)
            if i:
                dz = (dz @ self.weights[i].T) * (1.0 - acts[i] ** 2)
        return loss, grads

    def _write_payload(self, w):
        w.u16(len(self.weights))
        for W in self.weights:
            w.u32(W.shape[0])
            w.u32(W.shape[1])
        for W, b in zip(self.weights, self.biases):
            w.f64s(W)
            w.f64s(b)

    @classmethod
    def _read_payload(cls, r, classes, feature_width, params):
        shapes = [(r.u32(), r.u32()) for _ in range(r.u16())]
        weights, biases = [], []
        for shape in shapes:
            weights.append(r.f64s(shape))
            biases.append(r.f64s((shape[1],)))
        return cls(classes, feature_width, weights, biases, params)


def new_mlp(classes, feature_width, hidden=(10,), seed=0) -> MLP:
    rng = np.random.default_rng(seed)
    widths = [feature_width, *hidden, len(classes)]
    weights, biases = [], []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MLP(classes, feature_width, weights, biases)


def train_mlp(X, y, hidden=(10,), lr=0.05, momentum=0.9, batch_size=100, epochs=30, seed=0,
              return_losses=False):
    """Fit an MLP with mini-batch SGD and classical momentum.

    With ``return_losses`` the per-epoch training loss list is returned too.
    """
    X, y = check_xy(X, y)
    classes, yidx = encode_labels(y)
    hidden = tuple(int(h) for h in hidden)
    model = new_mlp(classes, X.shape[1], hidden, seed)
    params = model.params_list()
    velocity = [np.zeros_like(p) for p in params]
    rng = np.random.default_rng(seed + 1)
    n = X.shape[0]
    losses = []
    for epoch in range(1, epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            rows = order[start:start + batch_size]
            _, grads = model.loss_and_grads(X[rows], yidx[rows])
            for p, g, v in zip(params, grads, velocity):
                v *= momentum
                v -= lr * g
                p += v
        loss, _ = model.loss_and_grads(X, yidx)
        if not math.isfinite(loss):
            raise DivergenceError("MLP loss is not finite", epoch)
        losses.append(loss)
    model.params = {"hidden": list(hidden), "lr": lr, "momentum": momentum,
                    "batch_size": batch_size, "epochs": epochs, "seed": seed}
    return (model, losses) if return_losses else model
