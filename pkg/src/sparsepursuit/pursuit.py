"""Greedy sparse recovery: Subspace Pursuit, OMP, and an exhaustive l0 search."""
import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, DimensionError, DomainError, SingularMatrixError
from .linalg import (as_matrix, as_vector, correlations, least_squares_solve,
                     project_and_residue)

STOPPING_RULES = ("residue_increase", "residue_zero")
TERMINATIONS = ("residue_zero", "residue_increased", "stalled", "max_iterations")

DEFAULT_ZERO_TOL = 1e-8
L0_BUDGET = 10 ** 7


@dataclass(frozen=True)
class RecoveryOptions:
    """Settings for :func:`sp_recover`.

    ``max_iterations`` defaults to ``max(k, 100)``. ``zero_tolerance`` is
    relative to ``||y||_2``.
    """

    k: int
    stopping_rule: str = "residue_increase"
    max_iterations: int = None
    zero_tolerance: float = DEFAULT_ZERO_TOL

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise DomainError(f"sparsity must be a positive integer, got {self.k}")
        if self.stopping_rule not in STOPPING_RULES:
            raise DomainError(f"unknown stopping rule {self.stopping_rule!r}")
        if self.max_iterations is None:
            object.__setattr__(self, "max_iterations", max(int(self.k), 100))
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be >= 1")
        if not self.zero_tolerance >= 0:
            raise DomainError("zero_tolerance must be non-negative")


@dataclass
class RecoveryResult:
    """Output of a recovery algorithm.

    ``residue_norms[0]`` belongs to the initial support; each executed
    iteration appends one entry, including a final rejected one, so
    ``iterations == len(residue_norms) - 1`` for SP.
    """

    estimate: np.ndarray
    support: np.ndarray
    iterations: int
    residue_norms: list
    termination: str

    @property
    def residue_norm(self):
        """Residue norm of the returned estimate."""
        if self.termination in ("residue_increased", "stalled") and len(self.residue_norms) > 1:
            return self.residue_norms[-2]
        return self.residue_norms[-1]


def top_k_indices(values, k):
    """Indices of the ``k`` largest ``|values|``, sorted ascending.

    Ties go to the lower index.
    """
    v = np.asarray(values, dtype=float)
    if k > v.shape[0]:
        raise DimensionError(f"cannot pick {k} of {v.shape[0]} entries")
    if k <= 0:
        return np.zeros(0, dtype=np.intp)
    order = np.argsort(-np.abs(v), kind="stable")
    return np.sort(order[:k])


def _options(opts):
    if isinstance(opts, RecoveryOptions):
        return opts
    return RecoveryOptions(k=int(opts))


def _check_sparsity(k, m, n, factor):
    if k > n:
        raise DimensionError(f"sparsity {k} exceeds signal length {n}")
    if factor * k > m:
        warnings.warn(f"sparsity {k} exceeds m/{factor} = {m / factor:g}; "
                      "least-squares steps may be ill-posed", RuntimeWarning, stacklevel=3)


def _project(y, phi, support, iteration):
    try:
        return project_and_residue(y, phi, support)
    except SingularMatrixError as exc:
        exc.iteration = iteration
        raise


def sp_recover(phi, y, opts):
    """Subspace Pursuit.

    ``opts`` is a :class:`RecoveryOptions` or just the sparsity ``k``.

    Each iteration merges the current support with the ``k`` columns most
    correlated with the residue, solves least squares on the merged set,
    keeps the ``k`` largest coefficients, and recomputes the residue.
    Both stopping rules terminate once the residue is below
    ``zero_tolerance * ||y||``; ``residue_increase`` additionally stops,
    reverting to the previous support, when the residue grows. A repeated
    support is a fixed point and ends the run as ``stalled``.
    """
    opts = _options(opts)
    phi = as_matrix(phi)
    m, n = phi.shape
    y = as_vector(y, m)
    k = int(opts.k)
    _check_sparsity(k, m, n, 2)
    tol = opts.zero_tolerance * float(np.linalg.norm(y))

    support = top_k_indices(correlations(phi, y), k)
    proj = _project(y, phi, support, 0)
    norms = [float(np.linalg.norm(proj.residue))]
    iteration = 0
    while True:
        if norms[-1] <= tol:
            termination = "residue_zero"
            break
        if iteration >= opts.max_iterations:
            termination = "max_iterations"
            break
        iteration += 1
        candidates = top_k_indices(correlations(phi, proj.residue), k)
        merged = np.union1d(support, candidates)
        try:
            coef = least_squares_solve(phi[:, merged], y)
        except SingularMatrixError as exc:
            exc.iteration = iteration
            raise
        new_support = np.sort(merged[top_k_indices(coef, k)])
        new_proj = _project(y, phi, new_support, iteration)
        norms.append(float(np.linalg.norm(new_proj.residue)))
        if opts.stopping_rule == "residue_increase" and norms[-1] > norms[-2]:
            termination = "residue_increased"
            break
        if np.array_equal(new_support, support):
            termination = "stalled"
            break
        support, proj = new_support, new_proj

    estimate = np.zeros(n)
    estimate[support] = proj.coefficients
    return RecoveryResult(estimate, support, iteration, norms, termination)


def sp_recover_approx(phi, y, k, opts=None):
    """SP for approximately ``k``-sparse signals: run at sparsity ``2k``.

    Always uses the ``residue_increase`` rule; other fields of ``opts``
    (iteration cap, zero tolerance) carry over.
    """
    phi = as_matrix(phi)
    if 4 * k > phi.shape[0]:
        warnings.warn(f"4K = {4 * k} exceeds m = {phi.shape[0]}", RuntimeWarning, stacklevel=2)
    base = opts if opts is not None else RecoveryOptions(k=2 * k)
    doubled = RecoveryOptions(
        k=2 * k,
        stopping_rule="residue_increase",
        max_iterations=max(base.max_iterations, 2 * k),
        zero_tolerance=base.zero_tolerance,
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return sp_recover(phi, y, doubled)


def omp_recover(phi, y, k, zero_tolerance=DEFAULT_ZERO_TOL):
    """Orthogonal Matching Pursuit, always ``k`` iterations.

    Already selected columns are excluded from the correlation scan; once
    chosen an index is never removed.
    """
    phi = as_matrix(phi)
    m, n = phi.shape
    y = as_vector(y, m)
    if k > m:
        raise DimensionError(f"OMP needs K <= m, got K={k}, m={m}")
    if k > n:
        raise DimensionError(f"sparsity {k} exceeds signal length {n}")
    selected = []
    residue = y
    norms = [float(np.linalg.norm(y))]
    coef = np.zeros(0)
    for it in range(1, k + 1):
        scores = np.abs(correlations(phi, residue))
        scores[selected] = -np.inf
        selected.append(int(np.argmax(scores)))
        support = np.array(selected, dtype=np.intp)
        try:
            coef = least_squares_solve(phi[:, support], y)
        except SingularMatrixError as exc:
            exc.iteration = it
            raise
        residue = y - phi[:, support] @ coef
        norms.append(float(np.linalg.norm(residue)))
    estimate = np.zeros(n)
    estimate[selected] = coef
    tol = zero_tolerance * norms[0]
    termination = "residue_zero" if norms[-1] <= tol else "max_iterations"
    return RecoveryResult(estimate, np.sort(np.array(selected, dtype=np.intp)),
                          k, norms, termination)


def _l0_scan(phi, y, k, budget):
    m, n = phi.shape
    if k > n:
        raise DimensionError(f"sparsity {k} exceeds signal length {n}")
    count = math.comb(n, k)
    if count > budget:
        raise BudgetError(f"C({n}, {k}) = {count} supports exceeds budget {budget}", count)
    yield (), float(np.linalg.norm(y)), np.zeros(0)
    for size in range(1, k + 1):
        for combo in itertools.combinations(range(n), size):
            sub = phi[:, combo]
            try:
                coef = least_squares_solve(sub, y)
            except SingularMatrixError:
                continue
            yield combo, float(np.linalg.norm(y - sub @ coef)), coef


def l0_bruteforce(phi, y, k, zero_tolerance=DEFAULT_ZERO_TOL, budget=L0_BUDGET):
    """Sparsest exact fit by enumerating supports of size 0..k.

    Supports are tried by increasing size, then lexicographically; the
    first with residue ``<= zero_tolerance * ||y||`` wins. Failing that the
    globally smallest residue is returned with termination
    ``max_iterations``. Rank-deficient supports are skipped.
    """
    phi = as_matrix(phi)
    m, n = phi.shape
    y = as_vector(y, m)
    tol = zero_tolerance * float(np.linalg.norm(y))
    best = None
    examined = 0
    for combo, rnorm, coef in _l0_scan(phi, y, k, budget):
        examined += 1
        if rnorm <= tol:
            best = (combo, rnorm, coef)
            termination = "residue_zero"
            break
        if best is None or rnorm < best[1]:
            best = (combo, rnorm, coef)
    else:
        termination = "max_iterations"
    combo, rnorm, coef = best
    support = np.array(combo, dtype=np.intp)
    estimate = np.zeros(n)
    estimate[support] = coef
    return RecoveryResult(estimate, support, examined, [rnorm], termination)


def l0_minimal_supports(phi, y, k, zero_tolerance=DEFAULT_ZERO_TOL, budget=L0_BUDGET):
    """Every zero-residue support of the smallest size that has one (<= k).

    An empty list means no support of size ``<= k`` fits ``y`` exactly.
    A single entry certifies the sparsest representation is unique.
    """
    phi = as_matrix(phi)
    y = as_vector(y, phi.shape[0])
    tol = zero_tolerance * float(np.linalg.norm(y))
    found = []
    size = None
    for combo, rnorm, _ in _l0_scan(phi, y, k, budget):
        if size is not None and len(combo) > size:
            break
        if rnorm <= tol:
            size = len(combo)
            found.append(combo)
    return [np.array(c, dtype=np.intp) for c in found]
