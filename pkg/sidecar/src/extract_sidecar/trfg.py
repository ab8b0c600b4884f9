"""Binary embedding matrix exchange format.

This is the wire format the curation pipeline consumes: a fixed header
(4-byte magic "TRFG", u16 version, u64 row count, u32 dimension, all
little-endian) followed by the matrix as little-endian float32 in row
major order. Row ids travel in a companion text file named by appending
".ids" to the matrix filename, one id per line, same order as the rows.
The sidecar produces and parses this format on its own; it shares no
code with the consumer.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .atomicio import atomic_write_bytes, atomic_write_text
from .errors import JobError

MAGIC = b"TRFG"
VERSION = 1
_HEADER = struct.Struct("<4sHQI")


def ids_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".ids")


def encode_matrix(rows: np.ndarray) -> bytes:
    arr = np.ascontiguousarray(rows, dtype="<f4")
    if arr.ndim != 2:
        raise JobError(f"matrix must be 2-D, got shape {arr.shape}")
    n, d = arr.shape
    return _HEADER.pack(MAGIC, VERSION, n, d) + arr.tobytes()


def decode_matrix(buf: bytes) -> np.ndarray:
    if len(buf) < _HEADER.size:
        raise JobError(f"matrix file too short for header ({len(buf)} bytes)")
    magic, version, n, d = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise JobError(f"bad magic {magic!r}")
    if version != VERSION:
        raise JobError(f"unsupported matrix version {version}")
    expected = _HEADER.size + n * d * 4
    if len(buf) != expected:
        raise JobError(f"matrix payload is {len(buf)} bytes, expected {expected}")
    return np.frombuffer(buf, dtype="<f4", offset=_HEADER.size).reshape(n, d).copy()


def write_matrix(path: str | Path, ids: list[str], rows: np.ndarray) -> None:
    """Write the matrix and its companion id file atomically."""
    if len(ids) != rows.shape[0]:
        raise JobError(f"{len(ids)} ids for {rows.shape[0]} rows")
    if len(set(ids)) != len(ids):
        raise JobError("duplicate row ids")
    for i in ids:
        if not i or "\n" in i:
            raise JobError(f"bad row id {i!r}")
    atomic_write_bytes(path, encode_matrix(rows))
    atomic_write_text(ids_path(path), "".join(i + "\n" for i in ids))


def read_matrix(path: str | Path) -> tuple[list[str], np.ndarray]:
    path = Path(path)
    rows = decode_matrix(path.read_bytes())
    idf = ids_path(path)
    if not idf.exists():
        raise JobError(f"missing id file {idf}")
    ids = idf.read_text(encoding="utf-8").splitlines()
    if len(ids) != rows.shape[0]:
        raise JobError(f"{len(ids)} ids for {rows.shape[0]} rows in {path.name}")
    return ids, rows
