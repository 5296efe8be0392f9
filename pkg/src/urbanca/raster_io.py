"""NetPBM raster and built-up map I/O, normalization and neighborhood windows.

Rasters are held as ``(height, width, bands)`` arrays. PGM files (P2/P5) carry
one band, PPM files (P3/P6) carry three. Built-up maps are single-band PGMs
thresholded at ``maxval / 2`` into labels ``-1`` (non built-up) and ``+1``
(built-up).

Neighbor order is row-major over the offsets ``(-r..r) x (-r..r)`` with the
center removed; windows list the center first and then the neighbors, each
position contributing all of its bands in band order.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .errors import FormatError, ShapeError

NON_BUILT = -1
BUILT = 1

_MAGIC_BANDS = {b"P2": 1, b"P5": 1, b"P3": 3, b"P6": 3}
_PLAIN = {b"P2", b"P3"}
_WS = b" \t\n\r\v\f"


@dataclass(frozen=True, eq=False)
class RasterGrid:
    """Integer multi-band raster with samples in ``[0, maxval]``."""

    values: np.ndarray
    maxval: int = 255
    plain: bool = False

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim == 2:
            v = v[:, :, None]
        if v.ndim != 3 or v.shape[2] < 1:
            raise ShapeError(f"raster values must be (height, width, bands), got {v.shape}")
        if not 0 < self.maxval < 65536:
            raise FormatError(f"maxval must be in 1..65535, got {self.maxval}")
        if v.size and (v.min() < 0 or v.max() > self.maxval):
            raise FormatError(f"samples must lie in [0, {self.maxval}]")
        v = v.astype(np.uint16)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def bands(self) -> int:
        return self.values.shape[2]

    def __eq__(self, other):
        if not isinstance(other, RasterGrid):
            return NotImplemented
        return self.maxval == other.maxval and np.array_equal(self.values, other.values)


@dataclass(frozen=True, eq=False)
class NormalizedRaster:
    """Raster rescaled to ``[-1, 1]`` as ``2 * raw / maxval - 1``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim == 2:
            v = v[:, :, None]
        if v.ndim != 3:
            raise ShapeError(f"normalized raster must be 3-D, got {v.shape}")
        if v.size and (v.min() < -1.0 or v.max() > 1.0):
            raise ValueError("normalized values must lie in [-1, 1]")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def bands(self) -> int:
        return self.values.shape[2]


@dataclass(frozen=True, eq=False)
class BuiltUpMap:
    """Binary label grid over ``{-1, +1}``."""

    labels: np.ndarray

    def __post_init__(self):
        lab = np.asarray(self.labels)
        if lab.ndim != 2:
            raise ShapeError(f"built-up map must be 2-D, got {lab.shape}")
        if not np.isin(lab, (NON_BUILT, BUILT)).all():
            raise ValueError("built-up labels must be -1 or +1")
        lab = lab.astype(np.int8)
        lab.setflags(write=False)
        object.__setattr__(self, "labels", lab)

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def shape(self):
        return self.labels.shape

    def __eq__(self, other):
        if not isinstance(other, BuiltUpMap):
            return NotImplemented
        return np.array_equal(self.labels, other.labels)


@dataclass(frozen=True)
class NeighborhoodSpec:
    kind: str = "moore"
    radius: int = 1
    offsets: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        kind = self.kind.lower().replace("_", "").replace("-", "")
        if kind not in ("moore", "vonneumann"):
            raise ValueError(f"unknown neighborhood kind {self.kind!r}")
        if self.radius < 1:
            raise ValueError("neighborhood radius must be >= 1")
        object.__setattr__(self, "kind", kind)
        r = self.radius
        offs = []
        for dr in range(-r, r + 1):
            for dc in range(-r, r + 1):
                if dr == 0 and dc == 0:
                    continue
                if kind == "vonneumann" and abs(dr) + abs(dc) > r:
                    continue
                offs.append((dr, dc))
        object.__setattr__(self, "offsets", tuple(offs))

    @property
    def size(self) -> int:
        """Number of neighbors, excluding the center cell."""
        return len(self.offsets)


MOORE_1 = NeighborhoodSpec("moore", 1)

PathLike = Union[str, Path]


# -- NetPBM parsing ---------------------------------------------------------

def _next_token(data: bytes, pos: int):
    """Return ``(token, start, end)`` skipping whitespace and comments."""
    n = len(data)
    while pos < n:
        c = data[pos:pos + 1]
        if c in (b"",):
            break
        if c == b"#":
            nl = data.find(b"\n", pos)
            pos = n if nl < 0 else nl + 1
        elif c in _WS:
            pos += 1
        else:
            break
    start = pos
    while pos < n and data[pos:pos + 1] not in _WS and data[pos:pos + 1] != b"#":
        pos += 1
    return data[start:pos], start, pos


def _header_int(data: bytes, pos: int, what: str):
    tok, start, end = _next_token(data, pos)
    if not tok:
        raise FormatError(f"missing {what} in header", start)
    if not tok.isdigit():
        raise FormatError(f"invalid {what} {tok!r} in header", start)
    return int(tok), end


def parse_netpbm(data: bytes) -> RasterGrid:
    """Decode the bytes of a P2/P3/P5/P6 file."""
    magic = data[:2]
    if magic not in _MAGIC_BANDS:
        raise FormatError(f"unsupported magic number {magic!r}", 0)
    bands = _MAGIC_BANDS[magic]
    pos = 2
    if len(data) > 2 and data[2:3] not in _WS and data[2:3] != b"#":
        raise FormatError("magic number must be followed by whitespace", 2)
    width, pos = _header_int(data, pos, "width")
    height, pos = _header_int(data, pos, "height")
    maxval, pos = _header_int(data, pos, "maxval")
    if width < 1 or height < 1:
        raise FormatError(f"non-positive dimensions {width}x{height}", pos)
    if not 0 < maxval < 65536:
        raise FormatError(f"maxval {maxval} outside 1..65535", pos)
    count = width * height * bands

    if magic in _PLAIN:
        tokens = list(re.finditer(rb"[^\s#]+|#[^\n]*", data[pos:]))
        samples = []
        for m in tokens:
            tok = m.group()
            if tok.startswith(b"#"):
                continue
            off = pos + m.start()
            if not tok.isdigit():
                raise FormatError(f"invalid sample {tok!r}", off)
            v = int(tok)
            if v > maxval:
                raise FormatError(f"sample {v} exceeds maxval {maxval}", off)
            samples.append(v)
            if len(samples) == count:
                break
        if len(samples) < count:
            raise FormatError(
                f"truncated payload: expected {count} samples, found {len(samples)}", len(data)
            )
        arr = np.array(samples, dtype=np.uint16)
    else:
        if pos >= len(data) or data[pos:pos + 1] not in _WS:
            raise FormatError("expected single whitespace after maxval", pos)
        pos += 1
        nbytes = 1 if maxval < 256 else 2
        need = count * nbytes
        payload = data[pos:pos + need]
        if len(payload) < need:
            raise FormatError(
                f"truncated payload: expected {need} bytes, found {len(payload)}", len(data)
            )
        arr = np.frombuffer(payload, dtype=np.uint8 if nbytes == 1 else ">u2").astype(np.uint16)
        bad = np.flatnonzero(arr > maxval)
        if bad.size:
            i = int(bad[0])
            raise FormatError(f"sample {int(arr[i])} exceeds maxval {maxval}", pos + i * nbytes)
    values = arr.reshape(height, width, bands)
    return RasterGrid(values, maxval=maxval, plain=magic in _PLAIN)


def encode_netpbm(grid: RasterGrid, plain: bool | None = None) -> bytes:
    """Canonical NetPBM bytes for ``grid``.

    The header uses single spaces and newlines only. Binary payloads are one
    byte per sample for ``maxval < 256`` and big-endian 16-bit otherwise.
    Plain payloads put one image row per line.
    """
    if grid.bands not in (1, 3):
        raise ShapeError(f"NetPBM stores 1 or 3 bands, grid has {grid.bands}")
    plain = grid.plain if plain is None else plain
    magic = {(1, True): "P2", (1, False): "P5", (3, True): "P3", (3, False): "P6"}[
        (grid.bands, plain)
    ]
    header = f"{magic}\n{grid.width} {grid.height}\n{grid.maxval}\n".encode("ascii")
    if plain:
        rows = grid.values.reshape(grid.height, -1)
        body = "".join(" ".join(map(str, row.tolist())) + "\n" for row in rows)
        return header + body.encode("ascii")
    dtype = np.uint8 if grid.maxval < 256 else ">u2"
    return header + grid.values.astype(dtype).tobytes()


def read_raster(path: PathLike) -> RasterGrid:
    data = Path(path).read_bytes()
    try:
        return parse_netpbm(data)
    except FormatError as exc:
        raise FormatError(f"{path}: {exc}") from None


def write_raster(grid: RasterGrid, path: PathLike, plain: bool | None = None) -> None:
    Path(path).write_bytes(encode_netpbm(grid, plain))


def normalize(grid: RasterGrid) -> NormalizedRaster:
    """Map samples ``0..maxval`` affinely onto ``[-1, 1]``."""
    if grid.maxval <= 0:
        raise ValueError("cannot normalize a raster with maxval 0")
    v = 2.0 * grid.values.astype(np.float64) / grid.maxval - 1.0
    return NormalizedRaster(np.clip(v, -1.0, 1.0))


def builtup_from_raster(grid: RasterGrid) -> BuiltUpMap:
    if grid.bands != 1:
        raise ShapeError(f"built-up maps must be single band, got {grid.bands} bands")
    # 2*v >= maxval keeps the threshold exact for odd maxval
    built = 2 * grid.values[:, :, 0].astype(np.int64) >= grid.maxval
    return BuiltUpMap(np.where(built, BUILT, NON_BUILT))


def read_builtup(path: PathLike) -> BuiltUpMap:
    return builtup_from_raster(read_raster(path))


def builtup_to_raster(bmap: BuiltUpMap, maxval: int = 255) -> RasterGrid:
    return RasterGrid(np.where(bmap.labels == BUILT, maxval, 0), maxval=maxval)


def write_builtup(bmap: BuiltUpMap, path: PathLike) -> None:
    write_raster(builtup_to_raster(bmap), path)


# -- neighborhoods -----------------------------------------------------------

def _as_array(grid):
    if isinstance(grid, RasterGrid):
        return grid.values, "edge"
    if isinstance(grid, NormalizedRaster):
        return grid.values, "edge"
    if isinstance(grid, BuiltUpMap):
        return grid.labels[:, :, None], "builtup"
    raise TypeError(f"unsupported grid type {type(grid).__name__}")


def window(grid, p, spec: NeighborhoodSpec = MOORE_1) -> np.ndarray:
    """Center values followed by neighbor values for cell ``p = (row, col)``.

    Off-grid neighbors of a built-up map read as non built-up; off-grid
    raster neighbors repeat the nearest edge sample.
    """
    arr, policy = _as_array(grid)
    h, w, _ = arr.shape
    r, c = p
    if not (0 <= r < h and 0 <= c < w):
        raise IndexError(f"cell {p} outside {h}x{w} grid")
    parts = [arr[r, c]]
    for dr, dc in spec.offsets:
        rr, cc = r + dr, c + dc
        if 0 <= rr < h and 0 <= cc < w:
            parts.append(arr[rr, cc])
        elif policy == "builtup":
            parts.append(np.full(arr.shape[2], NON_BUILT, dtype=arr.dtype))
        else:
            parts.append(arr[min(max(rr, 0), h - 1), min(max(cc, 0), w - 1)])
    return np.concatenate(parts)


def neighborhood_matrix(grid, spec: NeighborhoodSpec = MOORE_1) -> np.ndarray:
    """Stack :func:`window` for every cell in row-major order.

    Returns an ``(height * width, bands * (1 + spec.size))`` array.
    """
    arr, policy = _as_array(grid)
    h, w, b = arr.shape
    r = spec.radius
    if policy == "builtup":
        padded = np.pad(arr, ((r, r), (r, r), (0, 0)), constant_values=NON_BUILT)
    else:
        padded = np.pad(arr, ((r, r), (r, r), (0, 0)), mode="edge")
    cols = [arr]
    for dr, dc in spec.offsets:
        cols.append(padded[r + dr:r + dr + h, r + dc:r + dc + w])
    return np.concatenate(cols, axis=2).reshape(h * w, b * (1 + spec.size))
