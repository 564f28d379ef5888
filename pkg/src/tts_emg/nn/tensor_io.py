"""Binary tensor dump format used for fixtures and checkpoints.

Layout (all little-endian)::

    b"TNSR"            magic
    uint8              format version (1)
    uint8              dtype code: 1 = float32, 2 = float64
    uint32             ndim
    uint64 * ndim      shape
    data               row-major values
"""

import struct

import numpy as np

from ..errors import DataFormatError

MAGIC = b"TNSR"
VERSION = 1
_CODES = {1: np.dtype("<f4"), 2: np.dtype("<f8")}
_DTYPES = {np.dtype("float32"): 1, np.dtype("float64"): 2}


def dump_tensor(array) -> bytes:
    array = np.asarray(array)
    if array.dtype not in _DTYPES:
        raise TypeError(f"unsupported tensor dtype {array.dtype}")
    code = _DTYPES[array.dtype]
    header = MAGIC + struct.pack("<BBI", VERSION, code, array.ndim)
    header += struct.pack(f"<{array.ndim}Q", *array.shape)
    return header + np.ascontiguousarray(array, dtype=_CODES[code]).tobytes()


def load_tensor(buf, offset=0):
    """Parse one tensor from ``buf`` at ``offset``; returns ``(array, new_offset)``."""
    if buf[offset:offset + 4] != MAGIC:
        raise DataFormatError("bad tensor magic")
    version, code, ndim = struct.unpack_from("<BBI", buf, offset + 4)
    if version != VERSION:
        raise DataFormatError(f"unsupported tensor format version {version}")
    if code not in _CODES:
        raise DataFormatError(f"unknown tensor dtype code {code}")
    pos = offset + 10
    shape = struct.unpack_from(f"<{ndim}Q", buf, pos)
    pos += 8 * ndim
    dtype = _CODES[code]
    count = int(np.prod(shape)) if ndim else 1
    nbytes = count * dtype.itemsize
    if pos + nbytes > len(buf):
        raise DataFormatError("truncated tensor data")
    data = np.frombuffer(buf, dtype=dtype, count=count, offset=pos).reshape(shape)
    return data.astype(dtype.newbyteorder("="), copy=True), pos + nbytes


def save_tensor(path, array):
    with open(path, "wb") as fh:
        fh.write(dump_tensor(array))


def read_tensor(path):
    with open(path, "rb") as fh:
        array, _ = load_tensor(fh.read())
    return array
