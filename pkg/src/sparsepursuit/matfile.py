"""Plain-text matrix and vector files.

Layout::

    # optional comment lines (e.g. "# model=zero_one seed=7 K=4")
    m N
    row 0 ...
    row m-1 ...

A vector is stored as an ``n 1`` matrix (one entry per line). Values are
written with 17 significant digits, which round-trips IEEE doubles exactly.
"""
import numpy as np

from .errors import DimensionError


def format_float(x):
    return format(float(x), ".17g")


def write_matrix(path, a, header=None):
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    with open(path, "w") as f:
        if header:
            for line in str(header).splitlines():
                f.write(f"# {line}\n")
        f.write(f"{a.shape[0]} {a.shape[1]}\n")
        for row in a:
            f.write(" ".join(format_float(v) for v in row) + "\n")


def write_vector(path, v, header=None):
    write_matrix(path, np.asarray(v, dtype=float).reshape(-1, 1), header=header)


def read_matrix(path):
    """Return ``(matrix, comments)``; ``comments`` holds the header lines."""
    comments = []
    rows = []
    dims = None
    with open(path) as f:
        for raw in f:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                comments.append(line[1:].strip())
                continue
            if dims is None:
                parts = line.split()
                if len(parts) != 2:
                    raise DimensionError(f"{path}: bad dimension line {line!r}")
                dims = (int(parts[0]), int(parts[1]))
                continue
            rows.append([float(t) for t in line.split()])
    if dims is None:
        raise DimensionError(f"{path}: missing dimension line")
    m, n = dims
    if len(rows) != m or any(len(r) != n for r in rows):
        raise DimensionError(f"{path}: expected {m} rows of {n} values")
    return np.array(rows, dtype=float).reshape(m, n), comments


def read_vector(path):
    a, comments = read_matrix(path)
    if a.shape[1] != 1 and a.shape[0] != 1:
        raise DimensionError(f"{path}: expected a vector, got {a.shape[0]}x{a.shape[1]}")
    return a.ravel(), comments
