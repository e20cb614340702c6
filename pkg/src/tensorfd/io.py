"""Binary tensor stream files.

Layout (all integers little-endian)::

    magic      8 bytes   b"TSKETCH1"
    version    u32       1
    p          u32       tensor order
    dims       p x u64   n1, ..., np
    kind       u32       0 = float64 little-endian
    payload    n1*...*np float64, row-major (last index fastest)

Row-major order makes every horizontal slice ``A[j]`` a contiguous run of
``n2*...*np`` scalars, so a reader yields slices with one ``read`` each.
"""
from __future__ import annotations

import os
import struct
from math import prod

import numpy as np

from .exceptions import StreamFormatError

MAGIC = b"TSKETCH1"
VERSION = 1
KIND_FLOAT64 = 0
_MAX_BYTES = 2**62


def _header(dims) -> bytes:
    dims = tuple(int(n) for n in dims)
    return (
        MAGIC
        + struct.pack("<II", VERSION, len(dims))
        + struct.pack(f"<{len(dims)}Q", *dims)
        + struct.pack("<I", KIND_FLOAT64)
    )


def write_tensor(path, a) -> None:
    """Write ``a`` as a stream file."""
    a = np.ascontiguousarray(a, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(_header(a.shape))
        fh.write(a.tobytes())


class StreamWriter:
    """Append horizontal slices one at a time; ``n1`` is patched on close."""

    def __init__(self, path, slice_dims):
        self.path = path
        self.slice_dims = tuple(int(n) for n in slice_dims)
        self.n1 = 0
        self._fh = open(path, "wb")
        self._fh.write(_header((0,) + self.slice_dims))

    def write(self, slc) -> None:
        x = np.ascontiguousarray(slc, dtype="<f8")
        if x.shape not in (self.slice_dims, (1,) + self.slice_dims):
            raise StreamFormatError(f"slice shape {x.shape} != {self.slice_dims}")
        self._fh.write(x.tobytes())
        self.n1 += 1

    def close(self) -> None:
        if self._fh.closed:
            return
        self._fh.seek(len(MAGIC) + 8)
        self._fh.write(struct.pack("<Q", self.n1))
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class StreamReader:
    """Rewindable reader yielding horizontal slices of a stream file.

    Iterating twice reads the file twice; only one slice is resident at a
    time.
    """

    def __init__(self, path):
        self.path = path
        with open(path, "rb") as fh:
            head = fh.read(16)
            if len(head) < 16 or head[:8] != MAGIC:
                raise StreamFormatError(f"{path}: bad magic")
            version, p = struct.unpack("<II", head[8:])
            if version != VERSION:
                raise StreamFormatError(f"{path}: unsupported version {version}")
            if p < 1 or p > 64:
                raise StreamFormatError(f"{path}: implausible order {p}")
            raw = fh.read(8 * p + 4)
            if len(raw) < 8 * p + 4:
                raise StreamFormatError(f"{path}: truncated header")
            dims = struct.unpack(f"<{p}Q", raw[: 8 * p])
            (kind,) = struct.unpack("<I", raw[8 * p:])
        if kind != KIND_FLOAT64:
            raise StreamFormatError(f"{path}: unsupported scalar kind {kind}")
        total = 8
        for n in dims:
            total *= n
            if total > _MAX_BYTES:
                raise StreamFormatError(f"{path}: dims {dims} overflow")
        self.dims = tuple(int(n) for n in dims)
        self.offset = 16 + 8 * p + 4
        payload = os.path.getsize(path) - self.offset
        if payload < total:
            raise StreamFormatError(
                f"{path}: truncated payload ({payload} of {total} bytes)"
            )
        if payload > total:
            raise StreamFormatError(f"{path}: {payload - total} trailing bytes")

    @property
    def n1(self) -> int:
        return self.dims[0]

    @property
    def slice_dims(self) -> tuple:
        return self.dims[1:]

    def __len__(self) -> int:
        return self.n1

    def __iter__(self):
        count = prod(self.slice_dims)
        nbytes = 8 * count
        with open(self.path, "rb") as fh:
            fh.seek(self.offset)
            for _ in range(self.n1):
                buf = fh.read(nbytes)
                if len(buf) < nbytes:
                    raise StreamFormatError(f"{self.path}: truncated payload")
                yield np.frombuffer(buf, dtype="<f8").reshape(self.slice_dims)

    def read_all(self) -> np.ndarray:
        with open(self.path, "rb") as fh:
            fh.seek(self.offset)
            data = np.fromfile(fh, dtype="<f8", count=prod(self.dims))
        return data.reshape(self.dims).astype(np.float64)


def read_tensor(path) -> np.ndarray:
    return StreamReader(path).read_all()
