"""Exact restricted-isometry constants and numerical lemma checks.

``delta_K`` is computed as the largest deviation from 1 of the extremal
eigenvalues of ``Phi_I^T Phi_I`` over every support of size ``K``. That
maximum equals the infimum in the RIP definition. Columns are used as
given; normalize them first if unit-norm columns are intended.
"""
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import BudgetError, DomainError
from .instances import make_rng
from .linalg import RESIDUE_ZERO_TOL, as_matrix, project_and_residue

RIP_BUDGET = 10 ** 6
LEMMA_SLACK = 1e-9
_CHUNK = 20000

LEMMA_IDS = (
    "L1_monotonicity",
    "L1_near_orthogonality",
    "L2_residue_orthogonality",
    "L2_energy_split",
    "L2_projection_bounds",
)


@dataclass(frozen=True)
class RipEstimate:
    k: int
    delta: float
    witness: tuple
    lambda_min: float
    lambda_max: float


@dataclass(frozen=True)
class LemmaReport:
    lemma_id: str
    instances_checked: int
    max_violation: float
    passed: bool
    skipped: int = 0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"{self.lemma_id} {status} checked={self.instances_checked} "
                f"skipped={self.skipped} max_violation={self.max_violation:.3e}")


def _support_chunks(n, k):
    it = combinations(range(n), k)
    while True:
        block = list(_take(it, _CHUNK))
        if not block:
            return
        yield np.array(block, dtype=np.intp)


def _take(it, count):
    for _ in range(count):
        try:
            yield next(it)
        except StopIteration:
            return


def _exact_delta(gram, n, k, budget):
    count = math.comb(n, k)
    if count > budget:
        raise BudgetError(f"C({n}, {k}) = {count} supports exceeds budget {budget}", count)
    best = None
    for block in _support_chunks(n, k):
        sub = gram[block[:, :, None], block[:, None, :]]
        eig = np.linalg.eigvalsh(sub)
        dev = np.maximum(1.0 - eig[:, 0], eig[:, -1] - 1.0)
        j = int(np.argmax(dev))
        if best is None or dev[j] > best[0]:
            best = (float(dev[j]), tuple(int(i) for i in block[j]),
                    float(eig[j, 0]), float(eig[j, -1]))
    delta, witness, lo, hi = best
    return RipEstimate(k, delta, witness, lo, hi)


def rip_constants(phi, k_max, budget=RIP_BUDGET):
    """Exact ``delta_1 .. delta_k_max`` as a list of :class:`RipEstimate`.

    Witness ties resolve to the lexicographically smallest support.
    """
    phi = as_matrix(phi, compressive=False)
    m, n = phi.shape
    if k_max < 1:
        raise DomainError(f"K must be positive, got {k_max}")
    if k_max > m or k_max > n:
        raise DomainError(f"K={k_max} exceeds matrix dimensions {m}x{n}")
    gram = phi.T @ phi
    return [_exact_delta(gram, n, k, budget) for k in range(1, k_max + 1)]


def rip_constant_exact(phi, k, budget=RIP_BUDGET, check_smaller=True):
    """Exact ``delta_k`` with its witness support.

    With ``check_smaller`` the smaller sizes are enumerated too and a
    decrease (impossible by interlacing) raises ``AssertionError``.
    """
    if not check_smaller:
        phi = as_matrix(phi, compressive=False)
        if k < 1 or k > min(phi.shape):
            raise DomainError(f"K={k} outside [1, {min(phi.shape)}]")
        return _exact_delta(phi.T @ phi, phi.shape[1], k, budget)
    estimates = rip_constants(phi, k, budget)
    for prev, cur in zip(estimates, estimates[1:]):
        if cur.delta < prev.delta:
            raise AssertionError(
                f"delta_{cur.k}={cur.delta!r} < delta_{prev.k}={prev.delta!r}: eigensolver bug")
    return estimates[-1]


def verify_monotonicity(phi, k_max, budget=RIP_BUDGET):
    """delta_1 <= ... <= delta_k_max, compared exactly."""
    deltas = [e.delta for e in rip_constants(phi, k_max, budget)]
    drops = [max(a - b, 0.0) for a, b in zip(deltas, deltas[1:])]
    worst = max(drops, default=0.0)
    return LemmaReport("L1_monotonicity", len(deltas), worst, worst == 0.0)


def _disjoint_pair(rng, n, size_i, size_j):
    perm = rng.permutation(n)
    return np.sort(perm[:size_i]), np.sort(perm[size_i:size_i + size_j])


def _deltas_by_size(phi, sizes, budget):
    top = max(sizes)
    return {e.k: e.delta for e in rip_constants(phi, top, budget)}


def verify_near_orthogonality(phi, trials, seed, size_i=1, size_j=1, budget=RIP_BUDGET):
    """Check |<Phi_I a, Phi_J b>| <= d ||a|| ||b|| and ||Phi_I^T Phi_J b|| <= d ||b||.

    ``d = delta_{|I|+|J|}``; draws with ``d >= 1`` violate the lemma's
    hypothesis and are counted as skipped.
    """
    phi = as_matrix(phi, compressive=False)
    n = phi.shape[1]
    if size_i + size_j > n:
        raise DomainError("disjoint supports do not fit in the column count")
    delta = _deltas_by_size(phi, [size_i + size_j], budget)[size_i + size_j]
    rng = make_rng(seed)
    worst = -np.inf
    checked = skipped = 0
    for _ in range(trials):
        I, J = _disjoint_pair(rng, n, size_i, size_j)
        a = rng.standard_normal(size_i)
        b = rng.standard_normal(size_j)
        if delta >= 1:
            skipped += 1
            continue
        u = phi[:, I] @ a
        v = phi[:, J] @ b
        na, nb = np.linalg.norm(a), np.linalg.norm(b)
        v1 = abs(u @ v) - delta * na * nb
        v2 = np.linalg.norm(phi[:, I].T @ v) - delta * nb
        worst = max(worst, v1, v2)
        checked += 1
    worst = float(worst) if checked else 0.0
    return LemmaReport("L1_near_orthogonality", checked, worst, worst <= LEMMA_SLACK, skipped)


def verify_projection_bounds(phi, trials, seed, size_i=2, size_j=2, budget=RIP_BUDGET):
    """Projection of ``y in span(Phi_I)`` onto a disjoint ``Phi_J``.

    With ``r = delta_{|I|+|J|} / (1 - delta_max(|I|,|J|))`` checks
    ``||y_p|| <= r ||y||`` and ``(1 - r) ||y|| <= ||y_r|| <= ||y||``.
    """
    phi = as_matrix(phi, compressive=False)
    n = phi.shape[1]
    if size_i + size_j > n:
        raise DomainError("disjoint supports do not fit in the column count")
    deltas = _deltas_by_size(phi, [size_i + size_j], budget)
    d_sum = deltas[size_i + size_j]
    d_max = deltas[max(size_i, size_j)]
    rng = make_rng(seed)
    worst = -np.inf
    checked = skipped = 0
    for _ in range(trials):
        I, J = _disjoint_pair(rng, n, size_i, size_j)
        a = rng.standard_normal(size_i)
        if d_sum >= 1:
            skipped += 1
            continue
        ratio = d_sum / (1 - d_max)
        y = phi[:, I] @ a
        pr = project_and_residue(y, phi, J)
        ny = np.linalg.norm(y)
        np_, nr = np.linalg.norm(pr.projected), np.linalg.norm(pr.residue)
        worst = max(worst, np_ - ratio * ny, (1 - ratio) * ny - nr, nr - ny)
        checked += 1
    worst = float(worst) if checked else 0.0
    return LemmaReport("L2_projection_bounds", checked, worst, worst <= LEMMA_SLACK, skipped)


def verify_residue_properties(instances, seed, m=16, n=32, tol=RESIDUE_ZERO_TOL):
    """Residue orthogonality and the energy split on random instances.

    Each instance draws a Gaussian ``m x n`` matrix, a support of random
    size up to ``m // 2`` and a Gaussian ``y``. Returns two reports:
    ``max|Phi_I^T y_r| / ||y||`` and ``|(||y_p||^2 + ||y_r||^2) / ||y||^2 - 1|``,
    each against ``tol``.
    """
    rng = make_rng(seed)
    orth = energy = 0.0
    for _ in range(instances):
        phi = rng.standard_normal((m, n)) / np.sqrt(m)
        size = int(rng.integers(1, m // 2 + 1))
        I = np.sort(rng.permutation(n)[:size])
        y = rng.standard_normal(m)
        pr = project_and_residue(y, phi, I)
        ny = np.linalg.norm(y)
        orth = max(orth, float(np.max(np.abs(phi[:, I].T @ pr.residue)) / ny))
        split = (pr.projected @ pr.projected + pr.residue @ pr.residue) / (ny * ny)
        energy = max(energy, abs(float(split) - 1.0))
    return (LemmaReport("L2_residue_orthogonality", instances, orth, orth <= tol),
            LemmaReport("L2_energy_split", instances, energy, energy <= tol))
