"""
Binary dense matrix files.

Layout: the 4-byte magic b'DMMF', rows and cols as little-endian u32, then
rows * cols little-endian float32 values in row-major order.
"""
import os
import struct

import numpy as np

from ..errors import FormatError, MissingFileError, ShapeError

MAGIC = b'DMMF'
HEADER = struct.Struct('<4sII')
PAYLOAD_DTYPE = np.dtype('<f4')


def encode_matrix(matrix):
    """Header plus payload bytes of a 2-D matrix."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise ShapeError(f'Only 2-D matrices can be written, got shape {matrix.shape}.')
    rows, cols = matrix.shape
    if rows >= 2 ** 32 or cols >= 2 ** 32:
        raise ShapeError(f'Matrix {matrix.shape} is too large for the header.')
    payload = np.ascontiguousarray(matrix, dtype=PAYLOAD_DTYPE).tobytes()
    return HEADER.pack(MAGIC, rows, cols) + payload


def decode_matrix(data, source='<bytes>'):
    if len(data) < HEADER.size:
        raise FormatError(f'{source}: truncated header ({len(data)} bytes).')
    magic, rows, cols = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f'{source}: bad magic {magic!r}.')
    expected = HEADER.size + rows * cols * PAYLOAD_DTYPE.itemsize
    if len(data) != expected:
        raise FormatError(f'{source}: {rows}x{cols} header needs {expected} bytes, file has {len(data)}.')
    return np.frombuffer(data, dtype=PAYLOAD_DTYPE, offset=HEADER.size).reshape(rows, cols).copy()


def write_matrix(matrix, path):
    with open(path, 'wb') as handle:
        handle.write(encode_matrix(matrix))


def load_matrix(path):
    """Read a matrix file into a float32 array."""
    if not os.path.exists(path):
        raise MissingFileError(f'Matrix file not found: {path}')
    with open(path, 'rb') as handle:
        return decode_matrix(handle.read(), source=path)
