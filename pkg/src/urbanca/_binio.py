"""Little-endian binary helpers for the model file formats."""
from __future__ import annotations

import struct

import numpy as np

from .errors import FormatError


class Writer:
    def __init__(self):
        self._parts = []

    def raw(self, b: bytes):
        self._parts.append(b)

    def u8(self, v):
        self._parts.append(struct.pack("<B", v))

    def u16(self, v):
        self._parts.append(struct.pack("<H", v))

    def u32(self, v):
        self._parts.append(struct.pack("<I", v))

    def i32(self, v):
        self._parts.append(struct.pack("<i", v))

    def f64(self, v):
        self._parts.append(struct.pack("<d", v))

    def f64s(self, arr):
        self._parts.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())

    def text(self, s: str):
        b = s.encode("utf-8")
        self.u32(len(b))
        self._parts.append(b)

    def getvalue(self) -> bytes:
        return b"".join(self._parts)


class Reader:
    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def _take(self, n):
        if self.pos + n > len(self.data):
            raise FormatError("unexpected end of file", self.pos)
        b = self.data[self.pos:self.pos + n]
        self.pos += n
        return b

    def raw(self, n):
        return self._take(n)

    def u8(self):
        return struct.unpack("<B", self._take(1))[0]

    def u16(self):
        return struct.unpack("<H", self._take(2))[0]

    def u32(self):
        return struct.unpack("<I", self._take(4))[0]

    def i32(self):
        return struct.unpack("<i", self._take(4))[0]

    def f64(self):
        return struct.unpack("<d", self._take(8))[0]

    def f64s(self, shape):
        n = int(np.prod(shape, dtype=np.int64))
        return np.frombuffer(self._take(8 * n), dtype="<f8").astype(np.float64).reshape(shape)

    def text(self):
        return self._take(self.u32()).decode("utf-8")

    def done(self):
        if self.pos != len(self.data):
            raise FormatError("trailing bytes after payload", self.pos)
