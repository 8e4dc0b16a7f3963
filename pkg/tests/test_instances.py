import itertools
import math

import numpy as np
import pytest
from scipy.stats import chi

from sparsepursuit.bounds import compute_rho_min
from sparsepursuit.errors import DomainError
from sparsepursuit.instances import (PerturbationSpec, apply_perturbation, derive_seed,
                                     gen_gaussian_matrix, gen_near_orthogonal_matrix,
                                     gen_sparse_signal, make_rng, random_support_order)


def test_matrix_is_deterministic():
    assert np.array_equal(gen_gaussian_matrix(6, 9, 123), gen_gaussian_matrix(6, 9, 123))
    assert not np.array_equal(gen_gaussian_matrix(6, 9, 123), gen_gaussian_matrix(6, 9, 124))


def test_matrix_rejects_tall():
    with pytest.raises(DomainError):
        gen_gaussian_matrix(5, 4, 0)


@pytest.mark.parametrize("seed", range(20))
def test_column_norms_near_one(seed):
    phi = gen_gaussian_matrix(128, 256, seed)
    assert 0.9 <= np.linalg.norm(phi, axis=0).mean() <= 1.1
    # entry mean within 4 standard errors of zero
    sd = 1 / math.sqrt(128)
    assert abs(phi.mean()) <= 4 * sd / math.sqrt(phi.size)


def test_derive_seed_is_stable_and_distinct():
    assert derive_seed(1, 10, "sp", 0) == derive_seed(1, 10, "sp", 0)
    seeds = {derive_seed(1, k, alg, t) for k in (5, 10) for alg in ("sp", "omp") for t in range(50)}
    assert len(seeds) == 200


def test_zero_one_rho_min():
    x = gen_sparse_signal(30, 4, "zero_one", 5)
    assert np.all(x.values[x.support] == 1.0)
    assert compute_rho_min(x) == pytest.approx(0.5, rel=1e-15)


def test_full_support():
    x = gen_sparse_signal(7, 7, "gaussian", 1)
    np.testing.assert_array_equal(x.support, np.arange(7))


def test_exponential_envelope_exact():
    x = gen_sparse_signal(40, 5, "exponential", 8, p=1.5, c_x=1.0)
    mags = np.sort(np.abs(x.values[x.support]))[::-1]
    expected = np.exp(-1.5 * np.arange(1, 6))
    np.testing.assert_allclose(mags, expected, rtol=1e-15, atol=0)
    assert np.count_nonzero(x.values) == 5


@pytest.mark.parametrize("p", [0.5, 1.0, 2.5])
def test_power_law_envelope_exact(p):
    x = gen_sparse_signal(50, 9, "power_law", 2, p=p, c_x=3.0)
    mags = np.sort(np.abs(x.values[x.support]))[::-1]
    np.testing.assert_allclose(mags, 3.0 * np.arange(1, 10) ** -p, rtol=1e-15, atol=0)


def test_support_uniformity():
    # 1e5 draws at N=10, K=3: each of the 120 supports within 5 sigma of 1/120
    rng = make_rng(2718)
    counts = {}
    draws = 100_000
    for _ in range(draws):
        s = tuple(sorted(random_support_order(10, 3, rng).tolist()))
        counts[s] = counts.get(s, 0) + 1
    assert len(counts) == 120
    p = 1 / 120
    sd = math.sqrt(p * (1 - p) / draws)
    assert max(abs(c / draws - p) for c in counts.values()) <= 5 * sd


def test_bad_model_and_sparsity():
    with pytest.raises(DomainError):
        gen_sparse_signal(10, 3, "bernoulli", 0)
    with pytest.raises(DomainError):
        gen_sparse_signal(10, 11, "gaussian", 0)


def test_zero_sigma_is_identity():
    x = gen_sparse_signal(20, 3, "gaussian", 4)
    for kind in ("signal", "measurement", "none"):
        values, e = apply_perturbation(x, PerturbationSpec(kind, 0.0), 8, 1)
        assert np.array_equal(values, x.values)
        assert np.array_equal(e, np.zeros(8))


def test_signal_perturbation_keeps_support_entries():
    x = gen_sparse_signal(20, 3, "gaussian", 4)
    values, e = apply_perturbation(x, PerturbationSpec("signal", 0.1), 8, 1)
    assert np.array_equal(values[x.support], x.values[x.support])
    off = np.setdiff1d(np.arange(20), x.support)
    assert np.all(values[off] != 0)
    assert np.array_equal(e, np.zeros(8))


def test_measurement_noise_norm_concentrates():
    # chi with 128 dof: P(sigma*chi outside [0.8, 1.4]) is about 1e-4 at sigma=0.1
    dist = chi(128, scale=0.1)
    assert dist.cdf(0.8) + dist.sf(1.4) < 2e-4
    x = gen_sparse_signal(256, 10, "zero_one", 0)
    for seed in range(20):
        values, e = apply_perturbation(x, PerturbationSpec("measurement", 0.1), 128, seed)
        assert np.array_equal(values, x.values)
        assert 0.8 <= np.linalg.norm(e) <= 1.4


def test_invalid_perturbation():
    with pytest.raises(DomainError):
        PerturbationSpec("shot", 0.1)
    with pytest.raises(DomainError):
        PerturbationSpec("signal", -1.0)


def test_near_orthogonal_is_orthogonal_at_zero_eps():
    q = gen_near_orthogonal_matrix(6, 0.0, 3)
    np.testing.assert_allclose(q.T @ q, np.eye(6), atol=1e-12)
