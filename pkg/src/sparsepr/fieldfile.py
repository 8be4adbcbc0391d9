"""PRF1 binary field files.

Layout (little-endian, no padding beyond the 3 reserved bytes):

    magic  "PRF1"   4 bytes
    width           u32
    height          u32
    dtype           u8    (0 = real float64, 1 = complex float64 interleaved re,im)
    reserved        3 zero bytes
    payload         row-major samples

The format is bit-exact: write followed by read reproduces the grid
bit-for-bit.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"PRF1"
_HEADER = struct.Struct("<4sIIB3x")

DTYPE_REAL = 0
DTYPE_COMPLEX = 1


class FieldFileError(Exception):
    """Base class for PRF1 read/write failures."""


class BadMagicError(FieldFileError):
    pass


class TruncatedFileError(FieldFileError):
    pass


class UnknownDtypeError(FieldFileError):
    pass


def write_field_file(grid, path) -> None:
    """Write a real or complex 2D grid to `path` in PRF1 format."""
    a = np.asarray(grid)
    if a.ndim != 2:
        raise ValueError(f"grid must be 2D, got shape {a.shape}")
    if np.iscomplexobj(a):
        payload = np.ascontiguousarray(a, dtype="<c16")
        code = DTYPE_COMPLEX
    else:
        payload = np.ascontiguousarray(a, dtype="<f8")
        code = DTYPE_REAL
    height, width = a.shape
    header = _HEADER.pack(MAGIC, width, height, code)
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(payload.tobytes())
    except OSError as exc:
        raise FieldFileError(f"cannot write field file {path}: {exc}") from exc


def read_field_file(path) -> np.ndarray:
    """Read a PRF1 file, returning a float64 or complex128 2D array."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise FieldFileError(f"cannot read field file {path}: {exc}") from exc
    if len(raw) < _HEADER.size:
        raise TruncatedFileError(f"{path}: file shorter than the 16-byte header")
    magic, width, height, code = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise BadMagicError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if code == DTYPE_REAL:
        dtype = np.dtype("<f8")
    elif code == DTYPE_COMPLEX:
        dtype = np.dtype("<c16")
    else:
        raise UnknownDtypeError(f"{path}: unknown dtype code {code}")
    expected = width * height * dtype.itemsize
    payload = raw[_HEADER.size:]
    if len(payload) < expected:
        raise TruncatedFileError(
            f"{path}: payload is {len(payload)} bytes, header promises {expected}"
        )
    data = np.frombuffer(payload[:expected], dtype=dtype).reshape(height, width)
    return data.astype(np.complex128 if code == DTYPE_COMPLEX else np.float64)
