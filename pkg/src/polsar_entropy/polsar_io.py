"""Covariance-stack files, region masks and pixel selection.

PCSK stack layout (little-endian)::

    magic   4 bytes  b"PCSK"
    version u16      1
    m       u16      channels
    rows    u32
    cols    u32
    payload rows*cols pixels, row-major; each pixel is m float64 diagonal
            values followed by m(m-1)/2 (re, im) float64 pairs of the strict
            upper triangle in row-major order

PMSK mask layout::

    magic   4 bytes  b"PMSK"
    version u16      1
    pad     u16      0
    rows    u32
    cols    u32
    payload rows*cols bytes, nonzero = selected

The CSV interchange holds one pixel per line in the PCSK field order
(``m*m`` numbers), optionally preceded by ``# rows=R cols=C``; without it the
stack is a single row.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionError,
    FormatError,
    InputError,
    MagicMismatchError,
    RegionError,
    TruncatedPayloadError,
)
from .wishart import SampleSet

__all__ = [
    "CovarianceStack",
    "Rectangle",
    "Mask",
    "read_stack",
    "write_stack",
    "read_csv_stack",
    "write_csv_stack",
    "load_stack",
    "read_mask",
    "write_mask",
    "extract_region",
    "subsample_without_replacement",
    "distinct_subsamples",
]

STACK_MAGIC = b"PCSK"
MASK_MAGIC = b"PMSK"
VERSION = 1
_HEADER = struct.Struct("<4sHHII")


@dataclass(frozen=True)
class CovarianceStack:
    """``rows x cols`` image of ``m x m`` Hermitian pixels.

    ``pixels`` has shape ``(rows, cols, m, m)``. Pixels are not checked for
    positive definiteness until they are extracted into a sample.
    """

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=complex)
        if px.ndim != 4 or px.shape[2] != px.shape[3]:
            raise DimensionError(f"expected (rows, cols, m, m) pixels, got {px.shape}")
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @classmethod
    def from_sample(cls, sample, rows, cols):
        data = sample.data if isinstance(sample, SampleSet) else np.asarray(sample)
        if data.shape[0] != rows * cols:
            raise DimensionError(f"{data.shape[0]} matrices cannot fill {rows}x{cols}")
        return cls(data.reshape(rows, cols, *data.shape[1:]))

    @property
    def rows(self):
        return self.pixels.shape[0]

    @property
    def cols(self):
        return self.pixels.shape[1]

    @property
    def m(self):
        return self.pixels.shape[2]


def _pack_pixels(pixels):
    """Flatten pixels into the per-pixel float64 field order."""
    m = pixels.shape[-1]
    flat = pixels.reshape(-1, m, m)
    diag = np.diagonal(flat, axis1=1, axis2=2).real
    iu = np.triu_indices(m, 1)
    upper = flat[:, iu[0], iu[1]]
    pairs = np.stack([upper.real, upper.imag], axis=-1).reshape(flat.shape[0], -1)
    return np.concatenate([diag, pairs], axis=1)


def _unpack_pixels(fields, m):
    n = fields.shape[0]
    out = np.zeros((n, m, m), dtype=complex)
    idx = np.arange(m)
    out[:, idx, idx] = fields[:, :m]
    pairs = fields[:, m:].reshape(n, -1, 2)
    upper = pairs[..., 0] + 1j * pairs[..., 1]
    iu = np.triu_indices(m, 1)
    out[:, iu[0], iu[1]] = upper
    out[:, iu[1], iu[0]] = np.conj(upper)
    return out


def write_stack(stack, path):
    fields = _pack_pixels(stack.pixels).astype("<f8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(STACK_MAGIC, VERSION, stack.m, stack.rows, stack.cols))
        fh.write(fields.tobytes())


def read_stack(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise TruncatedPayloadError(f"{path}: file shorter than the {_HEADER.size}-byte header")
    magic, version, m, rows, cols = _HEADER.unpack_from(raw)
    if magic != STACK_MAGIC:
        raise MagicMismatchError(f"{path}: expected magic {STACK_MAGIC!r}, found {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if m < 1:
        raise FormatError(f"{path}: invalid channel count {m}")
    expected = rows * cols * m * m * 8
    payload = raw[_HEADER.size:]
    if len(payload) < expected:
        raise TruncatedPayloadError(f"{path}: payload has {len(payload)} bytes, expected {expected}")
    if len(payload) > expected:
        raise FormatError(f"{path}: {len(payload) - expected} trailing bytes")
    fields = np.frombuffer(payload, dtype="<f8").reshape(rows * cols, m * m).astype(float)
    return CovarianceStack(_unpack_pixels(fields, m).reshape(rows, cols, m, m))


def write_csv_stack(stack, path):
    fields = _pack_pixels(stack.pixels)
    with open(path, "w") as fh:
        fh.write(f"# rows={stack.rows} cols={stack.cols}\n")
        for row in fields:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_csv_stack(path):
    rows = cols = None
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for token in line[1:].split():
                    key, _, val = token.partition("=")
                    if key == "rows":
                        rows = int(val)
                    elif key == "cols":
                        cols = int(val)
                continue
            try:
                values.append([float(v) for v in line.split(",")])
            except ValueError:
                raise FormatError(f"{path}:{lineno}: non-numeric field") from None
    if not values:
        raise FormatError(f"{path}: no pixels")
    width = len(values[0])
    m = int(round(width ** 0.5))
    if m * m != width or any(len(v) != width for v in values):
        raise FormatError(f"{path}: every line needs m*m fields")
    n = len(values)
    if rows is None or cols is None:
        rows, cols = 1, n
    if rows * cols != n:
        raise FormatError(f"{path}: header announces {rows}x{cols} pixels, found {n}")
    fields = np.array(values, dtype=float)
    return CovarianceStack(_unpack_pixels(fields, m).reshape(rows, cols, m, m))


def load_stack(path):
    """Read a PCSK file, or the CSV interchange when the name ends in ``.csv``."""
    if str(path).lower().endswith(".csv"):
        return read_csv_stack(path)
    return read_stack(path)


@dataclass(frozen=True)
class Rectangle:
    """Inclusive, 0-based pixel rectangle; ``x`` is the column, ``y`` the row."""

    x0: int
    y0: int
    x1: int
    y1: int

    @classmethod
    def parse(cls, text):
        try:
            x0, y0, x1, y1 = (int(t) for t in text.split(","))
        except ValueError:
            raise InputError(f"rectangle must be 'x0,y0,x1,y1', got {text!r}") from None
        return cls(x0, y0, x1, y1)

    def selection(self, rows, cols):
        if not (0 <= self.x0 <= self.x1 < cols and 0 <= self.y0 <= self.y1 < rows):
            raise RegionError(f"rectangle {self} outside a {rows}x{cols} image")
        sel = np.zeros((rows, cols), dtype=bool)
        sel[self.y0 : self.y1 + 1, self.x0 : self.x1 + 1] = True
        return sel

    def __str__(self):
        return f"{self.x0},{self.y0},{self.x1},{self.y1}"


@dataclass(frozen=True)
class Mask:
    """Byte-per-pixel selection; nonzero entries are selected."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.uint8)
        if v.ndim != 2:
            raise DimensionError(f"mask must be two-dimensional, got {v.shape}")
        object.__setattr__(self, "values", v)

    def selection(self, rows, cols):
        if self.values.shape != (rows, cols):
            raise RegionError(f"mask is {self.values.shape}, image is {(rows, cols)}")
        return self.values != 0


def write_mask(mask, path):
    rows, cols = mask.values.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MASK_MAGIC, VERSION, 0, rows, cols))
        fh.write(mask.values.tobytes())


def read_mask(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise TruncatedPayloadError(f"{path}: file shorter than the {_HEADER.size}-byte header")
    magic, version, _, rows, cols = _HEADER.unpack_from(raw)
    if magic != MASK_MAGIC:
        raise MagicMismatchError(f"{path}: expected magic {MASK_MAGIC!r}, found {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    payload = raw[_HEADER.size:]
    if len(payload) != rows * cols:
        raise TruncatedPayloadError(f"{path}: mask payload has {len(payload)} bytes, expected {rows * cols}")
    return Mask(np.frombuffer(payload, dtype=np.uint8).reshape(rows, cols))


def extract_region(stack, spec):
    """Selected pixels in row-major order as a validated :class:`SampleSet`."""
    sel = spec.selection(stack.rows, stack.cols)
    if not sel.any():
        raise RegionError("region selects no pixels")
    return SampleSet(stack.pixels[sel])


def subsample_without_replacement(sample, n, rng):
    """``n`` distinct items of ``sample``, in the order drawn."""
    if not 1 <= n <= sample.size:
        raise InputError(f"cannot draw {n} items without replacement from {sample.size}")
    idx = rng.choice(sample.size, size=n, replace=False)
    return sample[idx]


def distinct_subsamples(sample, n, count, rng, max_attempts=None):
    """``count`` subsamples of size ``n`` whose index sets are pairwise distinct.

    A draw repeating an earlier index set is rejected and redrawn.
    """
    seen = set()
    out = []
    attempts = 0
    limit = max_attempts if max_attempts is not None else 100 * count
    while len(out) < count:
        attempts += 1
        if attempts > limit:
            raise InputError(f"could not draw {count} distinct subsamples of size {n}")
        idx = rng.choice(sample.size, size=n, replace=False)
        key = frozenset(idx.tolist())
        if key in seen:
            continue
        seen.add(key)
        out.append(sample[idx])
    return out
