"""Dense matrix/signal containers and deterministic file formats.

Matrices are plain 2-D float64 numpy arrays in row-major order; signals
are 1-D float64 arrays.  Two on-disk formats:

* ``rsm-binary``: little-endian, magic ``RSM1``, u32 rows, u32 cols,
  then rows*cols IEEE-754 float64 values.  Total size 12 + 8*rows*cols.
  Round-trips bitwise.
* ``csv``: '.' decimal, ',' separator, '\\n' rows, no header, written
  with 17 significant digits.

Signals are persisted as 1 x n matrices.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"RSM1"
HEADER = struct.Struct("<4sII")


class TensorIOError(ValueError):
    """Malformed tensor file or invalid tensor payload."""


def as_matrix(data, rows=None, cols=None) -> np.ndarray:
    """Validate and return a 2-D float64 C-contiguous matrix.

    Rejects empty dimensions and non-finite entries.
    """
    m = np.ascontiguousarray(data, dtype=np.float64)
    if m.ndim != 2:
        raise TensorIOError(f"expected 2-D matrix, got {m.ndim}-D")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise TensorIOError(f"matrix dimensions must be positive, got {m.shape}")
    if rows is not None and m.shape != (rows, cols):
        raise TensorIOError(f"expected shape {(rows, cols)}, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise TensorIOError("matrix contains non-finite entries")
    return m


def as_signal(data, length=None) -> np.ndarray:
    """Validate and return a 1-D float64 signal."""
    s = np.ascontiguousarray(data, dtype=np.float64)
    if s.ndim != 1:
        raise TensorIOError(f"expected 1-D signal, got {s.ndim}-D")
    if s.size < 1:
        raise TensorIOError("signal must be nonempty")
    if length is not None and s.size != length:
        raise TensorIOError(f"expected length {length}, got {s.size}")
    if not np.all(np.isfinite(s)):
        raise TensorIOError("signal contains non-finite entries")
    return s


def write_matrix(m, path, format="rsm-binary"):
    """Write a matrix to ``path`` in the named format."""
    m = as_matrix(m)
    if format == "rsm-binary":
        with open(path, "wb") as f:
            f.write(HEADER.pack(MAGIC, m.shape[0], m.shape[1]))
            f.write(m.astype("<f8").tobytes())
    elif format == "csv":
        with open(path, "w") as f:
            for row in m:
                f.write(",".join(f"{v:.17g}" for v in row))
                f.write("\n")
    else:
        raise TensorIOError(f"unknown format {format!r}")


def read_matrix(path, format=None) -> np.ndarray:
    """Read a matrix, sniffing the format from the magic bytes if not given."""
    if format is None:
        with open(path, "rb") as f:
            format = "rsm-binary" if f.read(4) == MAGIC else "csv"
    if format == "rsm-binary":
        return _read_binary(path)
    if format == "csv":
        return _read_csv(path)
    raise TensorIOError(f"unknown format {format!r}")


def _read_binary(path) -> np.ndarray:
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < HEADER.size:
        raise TensorIOError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, rows, cols = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise TensorIOError(f"{path}: bad magic {magic!r} at byte 0")
    if rows < 1 or cols < 1:
        raise TensorIOError(f"{path}: invalid dimensions {rows}x{cols} in header")
    payload = raw[HEADER.size:]
    expected = 8 * rows * cols
    if len(payload) != expected:
        raise TensorIOError(
            f"{path}: payload is {len(payload)} bytes at byte {HEADER.size}, "
            f"expected {expected} for {rows}x{cols}"
        )
    data = np.frombuffer(payload, dtype="<f8").reshape(rows, cols)
    if not np.all(np.isfinite(data)):
        bad = int(np.flatnonzero(~np.isfinite(data.ravel()))[0])
        raise TensorIOError(f"{path}: non-finite value at byte {HEADER.size + 8 * bad}")
    return data.copy()


def _read_csv(path) -> np.ndarray:
    rows = []
    ncols = None
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = [float(tok) for tok in line.split(",")]
            except ValueError as e:
                raise TensorIOError(f"{path}:{lineno}: {e}") from None
            if ncols is None:
                ncols = len(row)
            elif len(row) != ncols:
                raise TensorIOError(
                    f"{path}:{lineno}: row has {len(row)} columns, expected {ncols}"
                )
            if not all(np.isfinite(row)):
                raise TensorIOError(f"{path}:{lineno}: non-finite value")
            rows.append(row)
    if not rows:
        raise TensorIOError(f"{path}: empty csv")
    return np.array(rows, dtype=np.float64)


def write_signal(s, path, format="rsm-binary"):
    """Persist a signal as a 1 x n matrix."""
    write_matrix(as_signal(s)[None, :], path, format=format)


def read_signal(path, format=None) -> np.ndarray:
    """Read a signal stored as a 1-row (or 1-column) matrix."""
    m = read_matrix(path, format=format)
    if m.shape[0] == 1:
        return m[0].copy()
    if m.shape[1] == 1:
        return m[:, 0].copy()
    raise TensorIOError(f"{path}: expected a vector, got shape {m.shape}")


def export_grayscale(m, path):
    """Export as binary PGM (P5, maxval 255), min-max normalized.

    A constant matrix maps to all-zero pixels.
    """
    m = as_matrix(m)
    lo, hi = float(m.min()), float(m.max())
    if hi > lo:
        pix = np.round((m - lo) * (255.0 / (hi - lo))).astype(np.uint8)
    else:
        pix = np.zeros(m.shape, dtype=np.uint8)
    with open(path, "wb") as f:
        f.write(f"P5\n{m.shape[1]} {m.shape[0]}\n255\n".encode())
        f.write(pix.tobytes())
