"""Dense linear-algebra kernels: truncation, correlation, projection.

Matrices are plain 2-D ``float64`` ndarrays and index sets are sorted,
duplicate-free 1-D integer arrays. The helpers :func:`as_matrix` and
:func:`as_index_set` validate and normalize user input.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionError, SingularMatrixError

#: Relative threshold (w.r.t. ``||y||_2``) below which a residue counts as zero.
RESIDUE_ZERO_TOL = 1e-9

#: A triangular factor is rank deficient when min|R_ii| < RANK_TOL * max|R_ii|.
RANK_TOL = 1e-10


def as_matrix(phi, compressive=True):
    """Return ``phi`` as a finite 2-D float array.

    With ``compressive`` set, also require ``rows <= cols``.
    """
    a = np.asarray(phi, dtype=float)
    if a.ndim != 2 or a.shape[0] == 0 or a.shape[1] == 0:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DimensionError("matrix has non-finite entries")
    if compressive and a.shape[0] > a.shape[1]:
        raise DimensionError(
            f"sampling matrix must have rows <= cols, got {a.shape[0]}x{a.shape[1]}")
    return a


def as_vector(v, length=None):
    a = np.asarray(v, dtype=float)
    if a.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got shape {a.shape}")
    if length is not None and a.shape[0] != length:
        raise DimensionError(f"expected length {length}, got {a.shape[0]}")
    if not np.all(np.isfinite(a)):
        raise DimensionError("vector has non-finite entries")
    return a


def as_index_set(indices, n=None):
    """Sorted, duplicate-free ``intp`` array; range-checked against ``n``."""
    idx = np.asarray(indices, dtype=np.intp).ravel()
    idx = np.unique(idx)
    if idx.size and (idx[0] < 0 or (n is not None and idx[-1] >= n)):
        raise DimensionError(f"index out of range [0, {n}): {idx.tolist()}")
    return idx


def column_submatrix(phi, indices):
    """Columns of ``phi`` listed in ``indices`` (ascending order)."""
    phi = np.asarray(phi, dtype=float)
    idx = as_index_set(indices, phi.shape[1])
    return phi[:, idx]


def correlations(phi, v):
    """Inner product of every column of ``phi`` with ``v``."""
    phi = np.asarray(phi, dtype=float)
    v = as_vector(v, phi.shape[0])
    return phi.T @ v


def least_squares_solve(a, y):
    """Coefficients ``q`` minimizing ``||a q - y||_2`` via Householder QR.

    Raises :class:`SingularMatrixError` instead of regularizing when ``a``
    is numerically rank deficient.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {a.shape}")
    y = as_vector(y, a.shape[0])
    m, k = a.shape
    if k == 0:
        return np.zeros(0)
    if k > m:
        raise SingularMatrixError(
            f"{m}x{k} matrix cannot have full column rank", condition=float("inf"))
    q, r = np.linalg.qr(a, mode="reduced")
    diag = np.abs(np.diag(r))
    dmax = diag.max()
    dmin = diag.min()
    if dmax == 0.0 or dmin < RANK_TOL * dmax:
        cond = float("inf") if dmin == 0.0 else dmax / dmin
        raise SingularMatrixError(
            f"rank-deficient {m}x{k} matrix (condition estimate {cond:.3g})",
            condition=cond)
    return solve_triangular(r, q.T @ y, lower=False)


@dataclass(frozen=True)
class ProjectionResult:
    """Least-squares decomposition ``y = projected + residue``."""

    coefficients: np.ndarray
    projected: np.ndarray
    residue: np.ndarray


def project_and_residue(y, phi, indices):
    """Project ``y`` onto the span of the selected columns of ``phi``."""
    phi = np.asarray(phi, dtype=float)
    y = as_vector(y, phi.shape[0])
    sub = column_submatrix(phi, indices)
    coef = least_squares_solve(sub, y)
    projected = sub @ coef
    return ProjectionResult(coef, projected, y - projected)
