"""Bit-exact binary tensor files (".hvtd").

Layout, all little-endian:

    offset  size       field
    0       4          magic b"HVTD"
    4       1          version, currently 1
    5       1          dtype code: 1 = float32, 2 = float64, 3 = uint32
    6       1          ndim, 1 through 4
    7       4 * ndim   dims, uint32 each
    ...     prod(dims) * itemsize   payload, row-major (last axis fastest)

The product of dims must not exceed 2**31 and the payload must cover the
rest of the file exactly; any disagreement is rejected. Float payloads are
rejected when they contain NaN unless the caller opts out, because the
tensors exchanged here are softmax outputs or scores where NaN always
means a broken dump.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadMagic,
    InvalidShape,
    IoFailure,
    NaNPayload,
    TruncatedPayload,
    UnsupportedDtype,
    UnsupportedVersion,
)

MAGIC = b"HVTD"
VERSION = 1
MAX_ELEMENTS = 2**31

_CODE_TO_DTYPE = {1: np.dtype("<f4"), 2: np.dtype("<f8"), 3: np.dtype("<u4")}
_KIND_TO_CODE = {"<f4": 1, "<f8": 2, "<u4": 3}


@dataclass(frozen=True)
class HvtdHeader:
    version: int
    dtype_code: int
    dims: tuple[int, ...]

    @property
    def dtype(self) -> np.dtype:
        return _CODE_TO_DTYPE[self.dtype_code]

    @property
    def element_count(self) -> int:
        count = 1
        for d in self.dims:
            count *= d
        return count


@dataclass(frozen=True)
class TensorBuffer:
    header: HvtdHeader
    data: np.ndarray

    @property
    def array(self) -> np.ndarray:
        return self.data


def _validate_dims(dims: tuple[int, ...]) -> None:
    if not 1 <= len(dims) <= 4:
        raise InvalidShape(f"ndim must be 1..4, got {len(dims)}")
    if any(d < 1 for d in dims):
        raise InvalidShape(f"dims must all be >= 1, got {dims}")
    count = 1
    for d in dims:
        count *= d
    if count > MAX_ELEMENTS:
        raise InvalidShape(f"element count {count} exceeds limit {MAX_ELEMENTS}")


def read_hvtd(path, allow_nan: bool = False) -> TensorBuffer:
    """Read and fully validate one tensor file.

    Raises BadMagic, UnsupportedVersion, UnsupportedDtype, InvalidShape,
    TruncatedPayload, or NaNPayload on malformed content, IoFailure when
    the OS read fails.
    """
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc

    if len(raw) < 7:
        raise TruncatedPayload(f"{path}: file shorter than the fixed header")
    if raw[:4] != MAGIC:
        raise BadMagic(f"{path}: bad magic {raw[:4]!r}, expected {MAGIC!r}")
    version, dtype_code, ndim = raw[4], raw[5], raw[6]
    if version != VERSION:
        raise UnsupportedVersion(f"{path}: version {version}, expected {VERSION}")
    if dtype_code not in _CODE_TO_DTYPE:
        raise UnsupportedDtype(f"{path}: unknown dtype code {dtype_code}")
    if not 1 <= ndim <= 4:
        raise InvalidShape(f"{path}: ndim must be 1..4, got {ndim}")

    dims_end = 7 + 4 * ndim
    if len(raw) < dims_end:
        raise TruncatedPayload(f"{path}: file ends inside the dims field")
    dims = struct.unpack(f"<{ndim}I", raw[7:dims_end])
    _validate_dims(dims)

    header = HvtdHeader(version=version, dtype_code=dtype_code, dims=dims)
    expected = header.element_count * header.dtype.itemsize
    actual = len(raw) - dims_end
    if actual != expected:
        raise TruncatedPayload(
            f"{path}: payload is {actual} bytes, header declares {expected}"
        )

    data = np.frombuffer(raw, dtype=header.dtype, offset=dims_end).reshape(dims)
    if not allow_nan and header.dtype_code in (1, 2) and np.isnan(data).any():
        raise NaNPayload(f"{path}: payload contains NaN")
    return TensorBuffer(header=header, data=data)


def write_hvtd(tensor, path) -> None:
    """Write an array (or a TensorBuffer) as one tensor file.

    The dtype must be float32, float64, or uint32; other dtypes are not
    part of the format and are rejected rather than silently converted.
    """
    if isinstance(tensor, TensorBuffer):
        tensor = tensor.data
    arr = np.asarray(tensor)
    dtype = arr.dtype.newbyteorder("<")
    if dtype.str not in _KIND_TO_CODE:
        raise UnsupportedDtype(f"dtype {arr.dtype} is not representable (f32/f64/u32)")
    _validate_dims(tuple(arr.shape))

    arr = np.ascontiguousarray(arr, dtype=dtype)
    header = MAGIC + struct.pack(
        "<BBB", VERSION, _KIND_TO_CODE[dtype.str], arr.ndim
    ) + struct.pack(f"<{arr.ndim}I", *arr.shape)
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(arr.tobytes())
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
