"""Little-endian binary matrix files.

Layout of one block::

    magic   4 bytes  b"AFMX"
    n       uint64   rows
    p       uint64   columns
    body    n*p float64, row-major

A file is one or more blocks back to back.  Feature files hold a text block
followed by an image block; paired files hold aligned T and I blocks.
"""

from __future__ import annotations

import io
import struct
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import FormatError, MissingFile

MAGIC = b"AFMX"
_HEADER = struct.Struct("<4sQQ")


def encode_matrix(X) -> bytes:
    X = np.ascontiguousarray(np.asarray(X, dtype="<f8"))
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {X.shape}")
    return _HEADER.pack(MAGIC, X.shape[0], X.shape[1]) + X.tobytes(order="C")


def write_matrices(path: str | Path, mats: Sequence[np.ndarray]) -> None:
    Path(path).write_bytes(b"".join(encode_matrix(m) for m in mats))


def decode_matrices(buf: bytes) -> list[np.ndarray]:
    out = []
    stream = io.BytesIO(buf)
    while True:
        head = stream.read(_HEADER.size)
        if not head:
            return out
        if len(head) < _HEADER.size:
            raise FormatError("truncated matrix header")
        magic, n, p = _HEADER.unpack(head)
        if magic != MAGIC:
            raise FormatError(f"bad matrix magic {magic!r}")
        body = stream.read(8 * n * p)
        if len(body) != 8 * n * p:
            raise FormatError(f"truncated matrix body: expected {n}x{p}")
        out.append(np.frombuffer(body, dtype="<f8").reshape(n, p).astype(float))


def read_matrices(path: str | Path) -> list[np.ndarray]:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"no such matrix file: {path}")
    return decode_matrices(path.read_bytes())
