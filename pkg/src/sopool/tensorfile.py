"""Binary tensor container used by the CLI.

Layout, all little-endian:

    bytes 0..3   magic "SOP1"
    byte  4      dtype: 0 = float32, 1 = float64
    bytes 5..8   rank (u32), must be 2 or 3
    then         rank x u32 dims
    then         product(dims) values, row-major

Parse failures raise TensorFileError carrying the byte offset at which
the file stopped making sense.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import TensorFileError

__all__ = ["MAGIC", "read_tensor", "write_tensor"]

MAGIC = b"SOP1"
_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
_CODES = {np.dtype(np.float32): 0, np.dtype(np.float64): 1}


def write_tensor(path, array: np.ndarray) -> None:
    array = np.asarray(array)
    if array.ndim not in (2, 3):
        raise TensorFileError(f"rank must be 2 or 3, got {array.ndim}", 5)
    dtype = np.dtype(np.float32) if array.dtype == np.float32 else np.dtype(np.float64)
    code = _CODES[dtype]
    payload = np.ascontiguousarray(array, dtype=dtype.newbyteorder("<"))
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<B", code))
        fh.write(struct.pack("<I", array.ndim))
        for dim in array.shape:
            fh.write(struct.pack("<I", dim))
        fh.write(payload.tobytes())


def read_tensor(path) -> np.ndarray:
    with open(path, "rb") as fh:
        blob = fh.read()

    if len(blob) < 4 or blob[:4] != MAGIC:
        raise TensorFileError(
            f"bad magic {blob[:4]!r}, expected {MAGIC!r}", 0
        )
    if len(blob) < 5:
        raise TensorFileError("file ends before dtype byte", 4)
    code = blob[4]
    if code not in _DTYPES:
        raise TensorFileError(f"unknown dtype code {code}", 4)
    if len(blob) < 9:
        raise TensorFileError("file ends inside rank field", len(blob))
    (rank,) = struct.unpack_from("<I", blob, 5)
    if rank not in (2, 3):
        raise TensorFileError(f"rank must be 2 or 3, got {rank}", 5)

    dims = []
    offset = 9
    for i in range(rank):
        if len(blob) < offset + 4:
            raise TensorFileError(f"file ends inside dim {i}", len(blob))
        (dim,) = struct.unpack_from("<I", blob, offset)
        if dim == 0:
            raise TensorFileError(f"dim {i} is zero", offset)
        dims.append(dim)
        offset += 4

    dtype = _DTYPES[code]
    count = int(np.prod(dims, dtype=np.int64))
    expected = count * dtype.itemsize
    available = len(blob) - offset
    if available < expected:
        raise TensorFileError(
            f"payload truncated: expected {expected} bytes, found {available}",
            len(blob),
        )
    if available > expected:
        raise TensorFileError(
            f"{available - expected} trailing bytes after payload",
            offset + expected,
        )
    data = np.frombuffer(blob, dtype=dtype, count=count, offset=offset)
    return data.reshape(dims).copy()
