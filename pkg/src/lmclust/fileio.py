"""Distance-matrix, label and JSON file formats.

Matrix files come in two flavours:

* CSV: n rows of n comma-separated decimal values, ``inf`` for +infinity.
* Binary: the 8-byte magic ``LMKDIST1``, the point count as a little-endian
  uint64, then n*n little-endian float64 values in row-major order.

Label files hold one integer cluster id per line (line i is point i);
``-1`` marks an unlabeled point.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .core import Clustering

MAGIC = b"LMKDIST1"


class FileFormatError(ValueError):
    """A file exists but does not parse in the expected format."""


def write_matrix_bin(path, matrix) -> None:
    m = np.ascontiguousarray(matrix, dtype="<f8")
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix must be square, got shape {m.shape}")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", m.shape[0]))
        fh.write(m.tobytes(order="C"))


def read_matrix_bin(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) < 16 or header[:8] != MAGIC:
            raise FileFormatError(f"{path}: not an LMKDIST1 matrix file")
        (n,) = struct.unpack("<Q", header[8:])
        data = fh.read()
    if len(data) != 8 * n * n:
        raise FileFormatError(f"{path}: expected {8 * n * n} payload bytes, found {len(data)}")
    return np.frombuffer(data, dtype="<f8").reshape(n, n).astype(np.float64)


def write_matrix_csv(path, matrix) -> None:
    m = np.asarray(matrix, dtype=np.float64)
    with open(path, "w") as fh:
        for row in m:
            # repr() round-trips float64 exactly and prints +inf as "inf"
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def read_matrix_csv(path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(tok) for tok in line.split(",")])
            except ValueError as exc:
                raise FileFormatError(f"{path}:{lineno}: {exc}") from None
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise FileFormatError(f"{path}: matrix is not square ({n} rows)")
    return np.array(rows, dtype=np.float64).reshape(n, n)


def read_matrix(path) -> np.ndarray:
    """Read a matrix file, detecting the binary format by its magic bytes."""
    with open(path, "rb") as fh:
        head = fh.read(8)
    if head == MAGIC:
        return read_matrix_bin(path)
    return read_matrix_csv(path)


def write_matrix(path, matrix) -> None:
    if str(path).endswith(".csv"):
        write_matrix_csv(path, matrix)
    else:
        write_matrix_bin(path, matrix)


def read_points(path) -> np.ndarray:
    """Read whitespace- or comma-separated coordinates, one point per line."""
    if str(path).endswith(".npy"):
        return np.load(path)
    text = Path(path).read_text().replace(",", " ")
    pts = np.loadtxt(text.splitlines(), dtype=np.float64, ndmin=2)
    return pts


def write_labels(path, clustering: Clustering | np.ndarray) -> None:
    labels = clustering.labels if isinstance(clustering, Clustering) else np.asarray(clustering)
    with open(path, "w") as fh:
        fh.writelines(f"{int(v)}\n" for v in labels)


def read_labels(path) -> np.ndarray:
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(int(line))
            except ValueError:
                raise FileFormatError(f"{path}:{lineno}: not an integer label: {line!r}") from None
    return np.array(out, dtype=np.int64)


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default)


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")
