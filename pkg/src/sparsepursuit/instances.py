"""Reproducible problem instances: sampling matrices, sparse signals, noise.

Every generator is a pure function of its parameters and ``seed``. Seeds
may be integers or :class:`numpy.random.SeedSequence` objects and drive a
Philox counter-based bit generator, so no global random state is touched.

Gaussian sampling matrices use entry variance ``1/m`` so columns have
roughly unit norm. Recovery itself is scale invariant; the normalization
only matters when the same matrix is fed to the RIP routines.
"""
import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

SIGNAL_MODELS = ("gaussian", "zero_one", "power_law", "exponential")
PERTURBATION_KINDS = ("none", "signal", "measurement")


def make_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed))


def derive_seed(master_seed, *keys):
    """Stable 63-bit seed for ``(master_seed, *keys)``.

    Independent of call order and process, so trials can run in any order
    on any worker.
    """
    text = "|".join(str(k) for k in (master_seed,) + keys)
    digest = hashlib.blake2b(text.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1


def gen_gaussian_matrix(m, n, seed):
    """``m x n`` matrix with i.i.d. N(0, 1/m) entries."""
    if m < 1 or n < 1:
        raise DomainError(f"dimensions must be positive, got {m}x{n}")
    if m > n:
        raise DomainError(f"need m <= N, got m={m}, N={n}")
    rng = make_rng(seed)
    return rng.standard_normal((m, n)) / np.sqrt(m)


def normalize_columns(phi):
    """Scale every column to unit l2 norm (zero columns are left alone)."""
    phi = np.asarray(phi, dtype=float)
    norms = np.linalg.norm(phi, axis=0)
    return phi / np.where(norms > 0, norms, 1.0)


def gen_near_orthogonal_matrix(m, eps, seed):
    """Square ``m x m`` random orthogonal matrix plus ``eps`` * N(0, 1/m) noise.

    Small ``eps`` gives small RIP constants at every order, which makes
    certified instances easy to draw for the conditional recovery checks.
    """
    if m < 1:
        raise DomainError(f"m must be positive, got {m}")
    if eps < 0:
        raise DomainError("eps must be non-negative")
    rng = make_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((m, m)))
    q = q * np.where(np.diag(r) < 0, -1.0, 1.0)
    return q + eps * rng.standard_normal((m, m)) / np.sqrt(m)


@dataclass(frozen=True)
class SparseSignal:
    values: np.ndarray
    support: np.ndarray
    model: str = "gaussian"
    params: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def k(self):
        return self.support.shape[0]


def random_support_order(n, k, rng):
    """First ``k`` entries of a partial Fisher-Yates shuffle of ``range(n)``."""
    perm = np.arange(n)
    for i in range(k):
        j = int(rng.integers(i, n))
        perm[i], perm[j] = perm[j], perm[i]
    return perm[:k].copy()


def gen_sparse_signal(n, k, model="gaussian", seed=0, p=1.0, c_x=1.0):
    """Draw a ``k``-sparse length-``n`` signal.

    ``power_law`` and ``exponential`` realize their magnitude envelopes with
    equality: the i-th largest magnitude is ``c_x * i**-p`` or
    ``c_x * exp(-p * i)``, placed at uniformly random positions with
    uniformly random signs.
    """
    if model not in SIGNAL_MODELS:
        raise DomainError(f"unknown signal model {model!r}")
    if k < 1 or k > n:
        raise DomainError(f"need 1 <= K <= N, got K={k}, N={n}")
    rng = make_rng(seed)
    order = random_support_order(n, k, rng)
    x = np.zeros(n)
    params = {}
    if model == "gaussian":
        x[order] = rng.standard_normal(k)
    elif model == "zero_one":
        x[order] = 1.0
    else:
        if c_x <= 0:
            raise DomainError("c_x must be positive")
        if model == "power_law" and p <= 0:
            raise DomainError("power-law exponent must be positive")
        if model == "exponential" and p <= 0:
            raise DomainError("decay rate must be positive")
        i = np.arange(1, k + 1, dtype=float)
        mags = c_x * i ** (-p) if model == "power_law" else c_x * np.exp(-p * i)
        signs = np.where(rng.integers(0, 2, size=k) == 1, 1.0, -1.0)
        x[order] = signs * mags
        params = {"p": p, "c_x": c_x}
    return SparseSignal(x, np.sort(order), model, params)


@dataclass(frozen=True)
class PerturbationSpec:
    kind: str = "none"
    sigma: float = 0.0

    def __post_init__(self):
        if self.kind not in PERTURBATION_KINDS:
            raise DomainError(f"unknown perturbation kind {self.kind!r}")
        if not self.sigma >= 0:
            raise DomainError(f"sigma must be non-negative, got {self.sigma}")


def apply_perturbation(x, spec, m, seed):
    """Return ``(perturbed_values, measurement_noise)``.

    ``signal`` replaces off-support entries by N(0, sigma^2) draws;
    ``measurement`` returns a length-``m`` N(0, sigma^2) noise vector.
    """
    values = np.array(x.values, dtype=float)
    noise = np.zeros(m)
    if spec.kind == "none" or spec.sigma == 0:
        return values, noise
    rng = make_rng(seed)
    if spec.kind == "signal":
        off = np.ones(values.shape[0], dtype=bool)
        off[x.support] = False
        values[off] = spec.sigma * rng.standard_normal(int(off.sum()))
    else:
        noise = spec.sigma * rng.standard_normal(m)
    return values, noise
