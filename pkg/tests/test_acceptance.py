"""Acceptance criteria, each run at its stated scale and tolerance.

Every test records one ``[PASS]``/``[FAIL]`` line, printed both inline and
in the terminal summary.
"""
import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from sparsepursuit.bench import (ExperimentConfig, run_frequency_experiment,
                                 run_iteration_experiment, run_noise_experiment)
from sparsepursuit.bounds import (EXACT_RECOVERY_DELTA, NOISY_RECOVERY_DELTA, compute_c_K,
                                  compute_c_prime_K, compute_rho_min, iteration_bound)
from sparsepursuit.instances import (gen_gaussian_matrix, gen_near_orthogonal_matrix,
                                     gen_sparse_signal, make_rng, normalize_columns)
from sparsepursuit.pursuit import l0_minimal_supports, sp_recover
from sparsepursuit.rip import (rip_constant_exact, verify_monotonicity,
                               verify_near_orthogonality, verify_projection_bounds,
                               verify_residue_properties)

pytestmark = pytest.mark.slow

M, N = 128, 256


def report(number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _rates(summary):
    return {(s["K"], s["alg"]): s["success_rate"] for s in summary}


def _frequency(tmp, model, ks, threads=1):
    cfg = ExperimentConfig(m=M, n=N, k_list=ks, trials=500, signal_model=model,
                           algorithms=["sp", "omp"], master_seed=1, output_dir=str(tmp),
                           threads=threads)
    return _rates(run_frequency_experiment(cfg))


def test_criterion_1_gaussian_phase_transition(tmp_path):
    r = _frequency(tmp_path, "gaussian", [22, 40, 50])
    ok = r[40, "sp"] >= 0.98 and r[50, "sp"] <= 0.95 and r[22, "omp"] < 1.0
    report(1, ok, f"SP rate K=40 {r[40, 'sp']:.3f} (>=0.98), K=50 {r[50, 'sp']:.3f} (<=0.95); "
                  f"OMP rate K=22 {r[22, 'omp']:.3f} (<1)")


def test_criterion_2_zero_one_phase_transition(tmp_path):
    r = _frequency(tmp_path, "zero_one", [13, 24, 34])
    ok = r[24, "sp"] >= 0.98 and r[34, "sp"] <= 0.95 and r[13, "omp"] < 1.0
    report(2, ok, f"SP rate K=24 {r[24, 'sp']:.3f} (>=0.98), K=34 {r[34, 'sp']:.3f} (<=0.95); "
                  f"OMP rate K=13 {r[13, 'omp']:.3f} (<1)")


def test_criterion_3_iteration_scaling(tmp_path):
    ks = [5, 10, 20, 40]
    cfg = ExperimentConfig(experiment="iterations", m=M, n=N, k_list=ks, trials=200,
                           signal_models=["zero_one", "exponential"], p=1.0, master_seed=1,
                           output_dir=str(tmp_path))
    rows = run_iteration_experiment(cfg)
    it = {(r["model"], r["K"]): r["mean_n_it"] for r in rows}
    ratio = it["zero_one", 40] / it["zero_one", 10]
    exp = [it["exponential", k] for k in ks]
    corr = float(np.corrcoef(ks, exp)[0, 1])
    ok = ratio <= 2.5 and corr >= 0.9
    report(3, ok, f"zero-one mean_n_it(40)/mean_n_it(10) = {ratio:.3f} (<=2.5); "
                  f"exponential p=1 corr(K, mean_n_it) = {corr:.3f} (>=0.9); "
                  f"means zero-one {[round(it['zero_one', k], 3) for k in ks]}, "
                  f"exponential {[round(v, 3) for v in exp]}")


def test_criterion_4_noise_linearity(tmp_path):
    cfg = ExperimentConfig(experiment="noise", m=M, n=N, k_list=[10], trials=500,
                           signal_model="zero_one", perturbation="measurement",
                           sigmas=[0.01, 0.02, 0.05, 0.1, 0.2], master_seed=1,
                           output_dir=str(tmp_path))
    _, fits = run_noise_experiment(cfg)
    fit = fits[0]
    ok = fit["r2"] >= 0.9 and fit["slope"] > 0
    report(4, ok, f"R^2 = {fit['r2']:.4f} (>=0.9), slope = {fit['slope']:.4f} (>0)")


def test_criterion_5_oracle_equivalence():
    compared = violations = 0
    for k in (1, 2, 3):
        for trial in range(200):
            ss = np.random.SeedSequence([5, k, trial])
            s_mat, s_sig = ss.spawn(2)
            phi = gen_gaussian_matrix(10, 20, s_mat)
            x = gen_sparse_signal(20, k, "gaussian", s_sig)
            y = phi @ x.values
            sp = sp_recover(phi, y, k)
            if sp.residue_norm > 1e-8 * np.linalg.norm(y):
                continue
            sups = l0_minimal_supports(phi, y, k)
            if len(sups) != 1:
                continue
            compared += 1
            l0_support = sups[0]
            l0_coef = np.linalg.lstsq(phi[:, l0_support], y, rcond=None)[0]
            l0_est = np.zeros(20)
            l0_est[l0_support] = l0_coef
            same = (np.array_equal(sp.support, l0_support) and
                    np.linalg.norm(sp.estimate - l0_est) <= 1e-6 * np.linalg.norm(l0_est))
            violations += not same
    report(5, violations == 0 and compared > 0,
           f"{compared} of 600 instances compared, {violations} violations (0 allowed)")


def test_criterion_6_lemma_suites():
    orth, energy = verify_residue_properties(1000, np.random.SeedSequence([6, 0]))
    mono = [verify_monotonicity(gen_gaussian_matrix(8, 10, np.random.SeedSequence([6, 1, i])), 3)
            for i in range(20)]
    near = verify_near_orthogonality(normalize_columns(gen_gaussian_matrix(
        8, 12, np.random.SeedSequence([6, 2]))), 500, np.random.SeedSequence([6, 3]))
    proj = verify_projection_bounds(gen_near_orthogonal_matrix(
        12, 0.1, np.random.SeedSequence([6, 4])), 500, np.random.SeedSequence([6, 5]))
    ok = (orth.passed and energy.passed and all(r.passed for r in mono) and near.passed
          and proj.passed and near.instances_checked == 500 and proj.instances_checked == 500)
    report(6, ok, f"orthogonality max {orth.max_violation:.2e}, energy split max "
                  f"{energy.max_violation:.2e} (<=1e-9, 1000 instances); monotone on "
                  f"{sum(r.passed for r in mono)}/20 matrices; near-orthogonality "
                  f"{near.instances_checked} checked max {near.max_violation:.2e}; projection "
                  f"bounds {proj.instances_checked} checked max {proj.max_violation:.2e}")


def test_criterion_7_theory_constants():
    half = Fraction(1, 2)
    items = {
        "c_K(1/2) = 12": compute_c_K(half) == 12 and compute_c_K(0.5) == 12.0,
        "c'_K(1/2) = 7": compute_c_prime_K(half) == 7 and compute_c_prime_K(0.5) == 7.0,
        "c_K(0.165)/(1-0.33) < 1":
            compute_c_K(Fraction(165, 1000)) / (1 - Fraction(33, 100)) < 1
            and compute_c_K(EXACT_RECOVERY_DELTA) / (1 - 0.33) < 1,
    }
    got = iteration_bound(2.0 ** -10, 0.5, 2)
    items[f"iteration_bound(2^-10, 0.5, 2) = 11 (got {got})"] = got == 11
    detail = "; ".join(f"{name} {'ok' if v else 'NOT MET'}" for name, v in items.items())
    report(7, all(items.values()), detail)


def test_criterion_8_conditional_theorems():
    certified = certified_noisy = violations = 0
    worst_ratio = 0.0
    for i in range(1000):
        ss = np.random.SeedSequence([2024, i])
        s_draw, s_mat, s_sig, s_e = ss.spawn(4)
        rng = make_rng(s_draw)
        k = int(rng.integers(1, 3))
        m = int(rng.integers(5 if k == 1 else 8, 13))
        if i % 2 == 0:
            phi = gen_near_orthogonal_matrix(m, float(rng.uniform(0.005, 0.25)), s_mat)
        else:
            phi = normalize_columns(gen_gaussian_matrix(m, int(rng.integers(m, 17)), s_mat))
        n = phi.shape[1]
        delta = rip_constant_exact(phi, 3 * k).delta
        x = gen_sparse_signal(n, k, "gaussian", s_sig)
        if delta < EXACT_RECOVERY_DELTA:
            certified += 1
            res = sp_recover(phi, phi @ x.values, k)
            exact = np.linalg.norm(res.estimate - x.values) <= 1e-6 * np.linalg.norm(x.values)
            bound = iteration_bound(compute_rho_min(x), compute_c_K(delta), k)
            violations += not exact or res.iterations > bound
        if 0 < delta < NOISY_RECOVERY_DELTA:
            certified_noisy += 1
            e = 0.01 * make_rng(s_e).standard_normal(m)
            res = sp_recover(phi, phi @ x.values + e, k)
            dist = np.linalg.norm(res.estimate - x.values)
            bound = compute_c_prime_K(delta) * np.linalg.norm(e)
            worst_ratio = max(worst_ratio, dist / bound)
            violations += dist > bound
    vacuous = 1000 - certified
    report(8, violations == 0 and certified > 0 and certified_noisy > 0,
           f"{certified} certified noiseless, {certified_noisy} certified noisy, "
           f"{vacuous} vacuous (uncertified) for the noiseless check, {violations} violations; "
           f"worst distortion / bound {worst_ratio:.3f}")


def test_criterion_9_determinism(tmp_path):
    files = []
    for threads in (1, 2):
        out = tmp_path / f"threads{threads}"
        _frequency(out, "gaussian", [22, 40, 50], threads=threads)
        files.append([(out / name).read_bytes() for name in ("trials.csv", "summary.csv")])
    same = files[0] == files[1]
    report(9, same, f"criterion 1 CSVs with 1 and 2 workers are "
                    f"{'byte-identical' if same else 'DIFFERENT'} "
                    f"({len(files[0][0])} + {len(files[0][1])} bytes)")
