"""Closed-form constants from the SP convergence and stability analysis.

The formulas are written with plain arithmetic operators so that
:class:`fractions.Fraction` inputs are evaluated exactly.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

#: delta_3K below this guarantees exact noiseless recovery.
EXACT_RECOVERY_DELTA = 0.165
#: delta_3K below this guarantees the measurement-noise distortion bound.
NOISY_RECOVERY_DELTA = 0.083

_CEIL_SLACK = 1e-9


def compute_c_K(delta_3K):
    """Per-iteration contraction 2d(1+d) / (1-d)^3."""
    d = delta_3K
    if not 0 <= d < 1:
        raise DomainError(f"delta_3K must lie in [0, 1), got {d}")
    return 2 * d * (1 + d) / (1 - d) ** 3


def compute_c_prime_K(delta_3K):
    """Noise amplification (1 + d + d^2) / (d (1 - d)); singular at d = 0."""
    d = delta_3K
    if not 0 < d < 1:
        raise DomainError(f"delta_3K must lie in (0, 1), got {d}")
    return (1 + d + d * d) / (d * (1 - d))


def compute_rho_min(x):
    """Smallest nonzero magnitude over the l2 norm.

    Accepts a :class:`~sparsepursuit.instances.SparseSignal` or any vector.
    """
    values = np.asarray(getattr(x, "values", x), dtype=float)
    mags = np.abs(values[values != 0])
    if mags.size == 0:
        raise DomainError("rho_min is undefined for the zero signal")
    return float(mags.min() / np.linalg.norm(values))


def iteration_bound_terms(rho_min, c_K, k):
    """The two competing iteration bounds ``(log-ratio term, 1.5K term)``.

    The first is ``log(rho_min) / log(c_K) + 1`` (base free); the second is
    ``1.5 K / ln(1/c_K)``, natural log.
    """
    if not 0 < c_K < 1:
        raise DomainError(f"iteration bound needs 0 < c_K < 1, got {c_K}")
    if not 0 < rho_min <= 1:
        raise DomainError(f"rho_min must lie in (0, 1], got {rho_min}")
    if k < 1:
        raise DomainError(f"K must be positive, got {k}")
    neg_log_c = -math.log(c_K)
    first = -math.log(rho_min) / neg_log_c + 1
    second = 1.5 * k / neg_log_c
    return first, second


def iteration_bound(rho_min, c_K, k):
    """Ceiling of the smaller of the two iteration bounds (at least 1)."""
    first, second = iteration_bound_terms(rho_min, c_K, k)
    return max(1, math.ceil(min(first, second) - _CEIL_SLACK))


@dataclass(frozen=True)
class TheoryBounds:
    delta_3K: float
    c_K: float
    c_prime_K: float
    rho_min: float
    iteration_bound: int


def theory_bounds(delta_3K, rho_min, k):
    """Bundle every constant available at ``delta_3K``.

    ``c_prime_K`` is ``None`` at ``delta_3K == 0`` and ``iteration_bound`` is
    ``None`` unless ``0 < c_K < 1``.
    """
    c = compute_c_K(delta_3K)
    cp = compute_c_prime_K(delta_3K) if delta_3K > 0 else None
    bound = iteration_bound(rho_min, c, k) if 0 < c < 1 else None
    return TheoryBounds(delta_3K, c, cp, rho_min, bound)


def noise_distortion_bound(delta_3K, e_norm):
    """Upper bound ``c'_K ||e||_2`` on ``||x - x_hat||_2`` for K-sparse x."""
    return compute_c_prime_K(delta_3K) * e_norm


def approx_sparse_distortion_bound(delta_6K, k, e_norm, tail_l1):
    """Distortion bound for approximately sparse signals recovered at 2K.

    ``c'_2K (||e||_2 + sqrt((1 + delta_6K) / K) ||x - x_K||_1)`` with
    ``c'_2K`` evaluated at ``delta_6K``.
    """
    return compute_c_prime_K(delta_6K) * (e_norm + math.sqrt((1 + delta_6K) / k) * tail_l1)
