"""Feed-forward autoencoder that compresses raster neighborhoods to a fixed-length code.

The network maps ``input_width -> hidden... -> code_width -> hidden... ->
input_width``. The code layer always uses ``tanh`` so encodings stay in
``[-1, 1]``. Training minimizes the mean over rows of the summed squared
reconstruction error with Adagrad on shuffled mini-batches.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._binio import Reader, Writer
from .errors import DivergenceError, FormatError, ShapeError

ACTIVATIONS = ("tanh", "sigmoid", "relu", "linear")
_ACT_CODE = {name: i for i, name in enumerate(ACTIVATIONS)}

MAGIC = b"UCAE"
VERSION = 1


def _forward_act(name, z):
    if name == "tanh":
        return np.tanh(z)
    if name == "sigmoid":
        return 0.5 * (1.0 + np.tanh(0.5 * z))
    if name == "relu":
        return np.maximum(z, 0.0)
    return z


def _act_grad(name, z, a):
    if name == "tanh":
        return 1.0 - a * a
    if name == "sigmoid":
        return a * (1.0 - a)
    if name == "relu":
        return (z > 0).astype(z.dtype)
    return np.ones_like(z)


class Autoencoder:
    """Weights and activations of a symmetric autoencoder.

    ``weights[i]`` has shape ``(fan_in, fan_out)`` and is applied to row
    vectors; the first ``n_encoder`` layers form the encoder.
    """

    def __init__(self, weights, biases, activations, n_encoder):
        if not (len(weights) == len(biases) == len(activations)):
            raise ShapeError("weights, biases and activations must have equal length")
        for i in range(1, len(weights)):
            if weights[i - 1].shape[1] != weights[i].shape[0]:
                raise ShapeError(f"layer {i} does not chain: {weights[i - 1].shape} -> {weights[i].shape}")
        if weights[0].shape[0] != weights[-1].shape[1]:
            raise ShapeError("decoder output width must equal input width")
        for a in activations:
            if a not in ACTIVATIONS:
                raise ValueError(f"unknown activation {a!r}")
        self.weights = [np.asarray(w, dtype=np.float64) for w in weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in biases]
        self.activations = list(activations)
        self.n_encoder = int(n_encoder)

    @property
    def input_width(self) -> int:
        return self.weights[0].shape[0]

    @property
    def code_width(self) -> int:
        return self.weights[self.n_encoder - 1].shape[1]

    @property
    def widths(self):
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def params(self):
        """Parameter arrays in a fixed order, weights then bias per layer."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def copy(self) -> "Autoencoder":
        return Autoencoder(
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            list(self.activations),
            self.n_encoder,
        )

    def _check(self, X):
        X = np.asarray(X, dtype=np.float64)
        squeeze = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.input_width:
            raise ShapeError(f"expected {self.input_width} inputs, got {X.shape[1]}")
        return X, squeeze

    def _run(self, X, layers):
        a = X
        for i in layers:
            a = _forward_act(self.activations[i], a @ self.weights[i] + self.biases[i])
        return a

    def encode(self, X) -> np.ndarray:
        X, squeeze = self._check(X)
        out = self._run(X, range(self.n_encoder))
        return out[0] if squeeze else out

    def reconstruct(self, X) -> np.ndarray:
        X, squeeze = self._check(X)
        out = self._run(X, range(len(self.weights)))
        return out[0] if squeeze else out

    def loss(self, X) -> float:
        X, _ = self._check(X)
        diff = X - self.reconstruct(X)
        return float(np.sum(diff * diff) / X.shape[0])

    def loss_and_grads(self, X):
        """Reconstruction loss and its gradient for every array in :meth:`params`."""
        X, _ = self._check(X)
        n = X.shape[0]
        acts, pre = [X], []
        a = X
        for w, b, name in zip(self.weights, self.biases, self.activations):
            z = a @ w + b
            a = _forward_act(name, z)
            pre.append(z)
            acts.append(a)
        diff = acts[-1] - X
        loss = float(np.sum(diff * diff) / n)
        delta = 2.0 * diff / n
        grads = [None] * (2 * len(self.weights))
        for i in range(len(self.weights) - 1, -1, -1):
            dz = delta * _act_grad(self.activations[i], pre[i], acts[i + 1])
            grads[2 * i] = acts[i].T @ dz
            grads[2 * i + 1] = dz.sum(axis=0)
            if i:
                delta = dz @ self.weights[i].T
        return loss, grads

    def __eq__(self, other):
        if not isinstance(other, Autoencoder):
            return NotImplemented
        return (
            self.activations == other.activations
            and self.n_encoder == other.n_encoder
            and len(self.weights) == len(other.weights)
            and all(np.array_equal(a, b) for a, b in zip(self.params(), other.params()))
        )

    # -- persistence --------------------------------------------------------

    def to_bytes(self) -> bytes:
        w = Writer()
        w.raw(MAGIC)
        w.u16(VERSION)
        w.u16(len(self.weights))
        w.u16(self.n_encoder)
        for width in self.widths:
            w.u32(width)
        for name in self.activations:
            w.u8(_ACT_CODE[name])
        for W, b in zip(self.weights, self.biases):
            w.f64s(W)
            w.f64s(b)
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "Autoencoder":
        r = Reader(data)
        if r.raw(4) != MAGIC:
            raise FormatError("not an encoder file (bad magic)", 0)
        version = r.u16()
        if version != VERSION:
            raise FormatError(f"unsupported encoder format version {version}", 4)
        n_layers = r.u16()
        n_encoder = r.u16()
        widths = [r.u32() for _ in range(n_layers + 1)]
        codes = [r.u8() for _ in range(n_layers)]
        if any(c >= len(ACTIVATIONS) for c in codes):
            raise FormatError("unknown activation code", r.pos)
        weights, biases = [], []
        for i in range(n_layers):
            weights.append(r.f64s((widths[i], widths[i + 1])))
            biases.append(r.f64s((widths[i + 1],)))
        r.done()
        return cls(weights, biases, [ACTIVATIONS[c] for c in codes], n_encoder)

    def save(self, path):
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "Autoencoder":
        return cls.from_bytes(Path(path).read_bytes())


EncoderModel = Autoencoder


def default_hidden(input_width: int, code_width: int):
    return (math.ceil((input_width + code_width) / 2),)


def new_autoencoder(
    input_width: int,
    code_width: int,
    hidden=None,
    seed: int = 0,
    activation: str = "tanh",
    output_activation: str = "linear",
    init: str = "glorot",
) -> Autoencoder:
    """Build an untrained autoencoder.

    ``hidden`` lists encoder hidden widths; the decoder mirrors them. Weights
    are drawn uniformly from ``+-sqrt(6 / (fan_in + fan_out))`` unless
    ``init="zeros"``. Biases start at zero.
    """
    if input_width < 1 or code_width < 1:
        raise ValueError("input_width and code_width must be >= 1")
    if code_width > input_width:
        warnings.warn(
            f"code width {code_width} exceeds input width {input_width} (over-complete code)",
            stacklevel=2,
        )
    if hidden is None:
        hidden = default_hidden(input_width, code_width)
    hidden = tuple(int(h) for h in hidden)
    enc_widths = [input_width, *hidden, code_width]
    widths = enc_widths + enc_widths[-2::-1]
    n_layers = len(widths) - 1
    n_encoder = len(enc_widths) - 1
    acts = [activation] * n_layers
    acts[n_encoder - 1] = "tanh"
    acts[-1] = output_activation

    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        if init == "zeros":
            weights.append(np.zeros((fan_in, fan_out)))
        else:
            limit = math.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return Autoencoder(weights, biases, acts, n_encoder)


@dataclass
class TrainReport:
    epoch_losses: list = field(default_factory=list)
    initial_loss: float = float("nan")
    seconds: float = 0.0
    seed: int = 0

    @property
    def final_loss(self) -> float:
        return self.epoch_losses[-1] if self.epoch_losses else self.initial_loss


def train_autoencoder(
    model: Autoencoder,
    X,
    epochs: int = 50,
    batch_size: int = 1000,
    lr: float = 0.05,
    seed: int = 0,
    eps: float = 1e-8,
) -> TrainReport:
    """Fit ``model`` in place with Adagrad and return the per-epoch losses.

    Rows are reshuffled every epoch; the final short batch is kept.
    """
    X, _ = model._check(X)
    if X.shape[0] < 1:
        raise ValueError("training matrix has no rows")
    rng = np.random.default_rng(seed)
    params = model.params()
    accum = [np.zeros_like(p) for p in params]
    report = TrainReport(seed=seed)
    report.initial_loss = model.loss(X)
    t0 = time.perf_counter()
    n = X.shape[0]
    for epoch in range(1, epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            _, grads = model.loss_and_grads(X[order[start:start + batch_size]])
            for p, g, G in zip(params, grads, accum):
                G += g * g
                p -= lr * g / (np.sqrt(G) + eps)
        loss = model.loss(X)
        if not math.isfinite(loss):
            raise DivergenceError("autoencoder loss is not finite", epoch)
        report.epoch_losses.append(loss)
    report.seconds = time.perf_counter() - t0
    return report


def encode(model: Autoencoder, x) -> np.ndarray:
    return model.encode(x)


def reconstruct(model: Autoencoder, x) -> np.ndarray:
    return model.reconstruct(x)
