from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .._binio import Reader, Writer
from ..errors import FormatError, ShapeError

MAGIC = b"UCAM"
VERSION = 1

KIND_TAGS = {"tree": 1, "forest": 2, "logreg": 3, "gnb": 4, "mlp": 5}
_TAG_KINDS = {v: k for k, v in KIND_TAGS.items()}
_REGISTRY = {}


def register(cls):
    _REGISTRY[cls.kind] = cls
    return cls


def encode_labels(y):
    """Sorted class codes and the index of each label into them."""
    y = np.asarray(y)
    if y.ndim != 1 or y.size == 0:
        raise ValueError("label vector must be 1-D and non-empty")
    classes = np.unique(y).astype(np.int64)
    return classes, np.searchsorted(classes, y).astype(np.int64)


def check_xy(X, y):
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2:
        raise ShapeError(f"feature matrix must be 2-D, got shape {X.shape}")
    if X.shape[0] == 0:
        raise ValueError("empty dataset")
    if y.shape != (X.shape[0],):
        raise ShapeError(f"{X.shape[0]} rows but {y.shape} labels")
    return X, y


class TransitionModel:
    """A trained classifier mapping feature rows to transition class codes."""

    kind = "base"

    def __init__(self, classes, feature_width, params=None):
        self.classes = np.asarray(classes, dtype=np.int64)
        self.feature_width = int(feature_width)
        self.params = dict(params or {})

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def _check_x(self, X):
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.feature_width:
            raise ShapeError(f"model expects {self.feature_width} features, got {X.shape[1]}")
        return X

    def predict_index(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        """Class codes for every row of ``X``."""
        return self.classes[self.predict_index(self._check_x(X))]

    def predict_one(self, x) -> int:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1:
            raise ShapeError("predict_one takes a single feature row")
        return int(self.predict(x)[0])

    # -- persistence --------------------------------------------------------

    def _write_payload(self, w: Writer):
        raise NotImplementedError

    @classmethod
    def _read_payload(cls, r: Reader, classes, feature_width, params):
        raise NotImplementedError

    def to_bytes(self) -> bytes:
        w = Writer()
        w.raw(MAGIC)
        w.u16(VERSION)
        w.u8(KIND_TAGS[self.kind])
        w.u32(self.feature_width)
        w.u16(self.n_classes)
        for c in self.classes:
            w.i32(int(c))
        w.text(json.dumps(self.params, sort_keys=True))
        self._write_payload(w)
        return w.getvalue()

    def save(self, path):
        Path(path).write_bytes(self.to_bytes())


def model_from_bytes(data: bytes) -> TransitionModel:
    r = Reader(data)
    if r.raw(4) != MAGIC:
        raise FormatError("not a model file (bad magic)", 0)
    version = r.u16()
    if version != VERSION:
        raise FormatError(f"unsupported model format version {version}", 4)
    tag = r.u8()
    if tag not in _TAG_KINDS:
        raise FormatError(f"unknown model kind tag {tag}", 6)
    feature_width = r.u32()
    n_classes = r.u16()
    classes = np.array([r.i32() for _ in range(n_classes)], dtype=np.int64)
    params = json.loads(r.text())
    model = _REGISTRY[_TAG_KINDS[tag]]._read_payload(r, classes, feature_width, params)
    r.done()
    return model


def load_model(path) -> TransitionModel:
    return model_from_bytes(Path(path).read_bytes())
