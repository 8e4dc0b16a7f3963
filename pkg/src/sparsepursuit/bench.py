"""Monte-Carlo experiment campaigns and their CSV outputs.

Each trial draws a fresh sampling matrix, a fresh signal and (optionally)
fresh noise from a seed derived from ``(master_seed, K, algorithm,
trial_index)``. Trials are independent, so they can be farmed out to a
process pool; results are re-sorted before aggregation and the written
files do not depend on the worker count. Wall-clock timing is the one
non-deterministic field and is only recorded when ``timing`` is set.
"""
import csv
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from .errors import DomainError, PursuitError
from .instances import (PerturbationSpec, SIGNAL_MODELS, apply_perturbation,
                        derive_seed, gen_gaussian_matrix, gen_sparse_signal)
from .matfile import format_float
from .pursuit import l0_bruteforce, omp_recover, sp_recover, sp_recover_approx

log = logging.getLogger(__name__)

EXACT_RECOVERY_RTOL = 1e-6
ALGORITHMS = ("sp", "omp", "l0", "sp2k")
EXPERIMENTS = ("frequency", "iterations", "noise")

TRIALS_HEADER = ["trial", "K", "alg", "seed", "success", "rel_error", "n_it",
                 "wall_time_us", "e_norm"]
SUMMARY_HEADER = ["K", "alg", "success_rate", "mean_n_it", "mean_rel_error"]
ITERATIONS_HEADER = ["model", "K", "mean_n_it", "success_rate"]
NOISE_HEADER = ["kind", "sigma", "K", "mean_e_norm", "mean_distortion"]
NOISE_FIT_HEADER = ["kind", "K", "slope", "intercept", "r2", "levels"]


@dataclass
class ExperimentConfig:
    experiment: str = "frequency"
    m: int = 128
    n: int = 256
    k_list: list = field(default_factory=lambda: [10])
    trials: int = 500
    signal_model: str = "gaussian"
    signal_models: list = None
    p: float = 1.0
    c_x: float = 1.0
    algorithms: list = field(default_factory=lambda: ["sp"])
    perturbation: str = "none"
    sigmas: list = field(default_factory=lambda: [0.0])
    master_seed: int = 0
    output_dir: str = "results"
    threads: int = 1
    timing: bool = False

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise DomainError(f"unknown experiment {self.experiment!r}")
        if self.m < 1 or self.n < 1 or self.m > self.n:
            raise DomainError(f"need 1 <= m <= N, got m={self.m}, N={self.n}")
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        if not self.k_list:
            raise DomainError("empty K list")
        for alg in self.algorithms:
            if alg not in ALGORITHMS:
                raise DomainError(f"unknown algorithm {alg!r}")
        for model in self.models():
            if model not in SIGNAL_MODELS:
                raise DomainError(f"unknown signal model {model!r}")
        for k in self.k_list:
            if k < 1 or k > self.n:
                raise DomainError(f"K={k} outside [1, N]")
            if "sp" in self.algorithms and 2 * k > self.m:
                raise DomainError(f"SP needs 2K <= m, got K={k}, m={self.m}")
            if "sp2k" in self.algorithms and 4 * k > self.m:
                raise DomainError(f"sp2k needs 4K <= m, got K={k}, m={self.m}")
        PerturbationSpec(self.perturbation, 0.0)
        if self.experiment == "noise":
            if self.perturbation == "none":
                raise DomainError("noise experiment needs a perturbation kind")
            if any(s < 0 for s in self.sigmas):
                raise DomainError("sigma values must be non-negative")
        if self.experiment == "iterations" and list(self.algorithms) != ["sp"]:
            raise DomainError("iteration experiment runs SP only")
        if self.threads < 1:
            raise DomainError("threads must be >= 1")
        return self

    def models(self):
        return list(self.signal_models) if self.signal_models else [self.signal_model]


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    k: int
    alg: str
    seed: int
    success: bool
    rel_error: float
    n_it: int
    wall_time_us: int
    e_norm: float
    distortion: float = float("nan")
    model: str = ""
    sigma: float = 0.0
    error: str = ""

    def row(self):
        return [self.trial, self.k, self.alg, self.seed, int(self.success),
                format_float(self.rel_error), self.n_it, self.wall_time_us,
                format_float(self.e_norm)]


@dataclass(frozen=True)
class TrialTask:
    m: int
    n: int
    k: int
    alg: str
    trial: int
    master_seed: int
    model: str
    p: float
    c_x: float
    perturbation: str
    sigma: float
    timing: bool


def _recover(alg, phi, y, k):
    if alg == "sp":
        return sp_recover(phi, y, k)
    if alg == "sp2k":
        return sp_recover_approx(phi, y, k)
    if alg == "omp":
        return omp_recover(phi, y, k)
    if alg == "l0":
        return l0_bruteforce(phi, y, k)
    raise DomainError(f"unknown algorithm {alg!r}")


def run_trial(task):
    """Draw one instance, recover it, and score the estimate."""
    seed = derive_seed(task.master_seed, task.k, task.alg, task.trial)
    s_mat, s_sig, s_noise = np.random.SeedSequence(seed).spawn(3)
    phi = gen_gaussian_matrix(task.m, task.n, s_mat)
    signal = gen_sparse_signal(task.n, task.k, task.model, s_sig, p=task.p, c_x=task.c_x)
    x, e = apply_perturbation(signal, PerturbationSpec(task.perturbation, task.sigma),
                              task.m, s_noise)
    if task.perturbation == "signal":
        e_norm = float(np.linalg.norm(x - signal.values))
    else:
        e_norm = float(np.linalg.norm(e))
    y = phi @ x + e
    start = time.perf_counter()
    try:
        result = _recover(task.alg, phi, y, task.k)
    except PursuitError as exc:
        return TrialRecord(task.trial, task.k, task.alg, seed, False, float("nan"), -1, 0,
                           e_norm, float("nan"), task.model, task.sigma,
                           f"{type(exc).__name__}: {exc}")
    elapsed = int(round((time.perf_counter() - start) * 1e6)) if task.timing else 0
    distortion = float(np.linalg.norm(result.estimate - x))
    rel = distortion / float(np.linalg.norm(x))
    return TrialRecord(task.trial, task.k, task.alg, seed, rel <= EXACT_RECOVERY_RTOL, rel,
                       result.iterations, elapsed, e_norm, distortion, task.model, task.sigma)


def _single_thread_trial(task):
    with threadpool_limits(limits=1):
        return run_trial(task)


def run_tasks(tasks, threads=1):
    """Run ``tasks`` and return records in task order."""
    tasks = list(tasks)
    if threads <= 1 or len(tasks) < 2:
        with threadpool_limits(limits=1):
            return [run_trial(t) for t in tasks]
    chunk = max(1, len(tasks) // (threads * 8))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_single_thread_trial, tasks, chunksize=chunk))


def _tasks(cfg, ks, algs, models, sigmas):
    for model in models:
        for sigma in sigmas:
            for k in ks:
                for alg in algs:
                    for t in range(cfg.trials):
                        yield TrialTask(cfg.m, cfg.n, k, alg, t, cfg.master_seed, model,
                                        cfg.p, cfg.c_x, cfg.perturbation, sigma, cfg.timing)


def _mean(values):
    values = [v for v in values if not math.isnan(v)]
    return sum(values) / len(values) if values else float("nan")


def _write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def _write_errors(out, records):
    bad = [r for r in records if r.error]
    if bad:
        log.warning("%d trial(s) raised solver errors; see errors.csv", len(bad))
        _write_csv(out / "errors.csv", ["trial", "K", "alg", "seed", "sigma", "error"],
                   [[r.trial, r.k, r.alg, r.seed, format_float(r.sigma), r.error] for r in bad])


def summarize(records):
    """Per ``(K, alg)`` rows: success rate, mean iterations over successes, mean error."""
    groups = {}
    for r in records:
        groups.setdefault((r.k, r.alg), []).append(r)
    rows = []
    for (k, alg) in sorted(groups, key=lambda key: (key[0], ALGORITHMS.index(key[1]))):
        g = groups[(k, alg)]
        rate = sum(r.success for r in g) / len(g)
        rows.append({
            "K": k, "alg": alg, "success_rate": rate,
            "mean_n_it": _mean([float(r.n_it) for r in g if r.success]),
            "mean_rel_error": _mean([r.rel_error for r in g]),
        })
    return rows


def run_frequency_experiment(cfg):
    """Empirical exact-recovery rate per ``(K, algorithm)``.

    Writes ``trials.csv`` and ``summary.csv`` under ``cfg.output_dir`` and
    returns the summary rows.
    """
    cfg = replace(cfg, experiment="frequency").validate()
    records = run_tasks(_tasks(cfg, cfg.k_list, cfg.algorithms, [cfg.signal_model],
                               [cfg.sigmas[0] if cfg.perturbation != "none" else 0.0]),
                        cfg.threads)
    out = Path(cfg.output_dir)
    _write_csv(out / "trials.csv", TRIALS_HEADER, [r.row() for r in records])
    summary = summarize(records)
    _write_csv(out / "summary.csv", SUMMARY_HEADER,
               [[s["K"], s["alg"], format_float(s["success_rate"]), format_float(s["mean_n_it"]),
                 format_float(s["mean_rel_error"])] for s in summary])
    _write_errors(out, records)
    return summary


def run_iteration_experiment(cfg):
    """Mean SP iteration count (successful trials only) per ``(model, K)``."""
    cfg = replace(cfg, experiment="iterations", algorithms=["sp"]).validate()
    models = cfg.models()
    records = run_tasks(_tasks(cfg, cfg.k_list, ["sp"], models, [0.0]), cfg.threads)
    rows = []
    for model in models:
        for k in cfg.k_list:
            g = [r for r in records if r.model == model and r.k == k]
            ok = [r for r in g if r.success]
            rows.append({"model": model, "K": k,
                         "mean_n_it": _mean([float(r.n_it) for r in ok]),
                         "success_rate": len(ok) / len(g)})
    out = Path(cfg.output_dir)
    _write_csv(out / "trials.csv", ["model"] + TRIALS_HEADER,
               [[r.model] + r.row() for r in records])
    _write_csv(out / "iterations.csv", ITERATIONS_HEADER,
               [[r["model"], r["K"], format_float(r["mean_n_it"]),
                 format_float(r["success_rate"])] for r in rows])
    _write_errors(out, records)
    return rows


def linear_fit(xs, ys):
    """Least-squares line ``y = slope * x + intercept`` and its R^2."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else float("nan")
    return float(slope), float(intercept), r2


def run_noise_experiment(cfg):
    """Mean distortion ``||x - x_hat||_2`` across a sweep of noise levels.

    Returns ``(levels, fits)``: one row per ``(sigma, K)`` and one linear
    fit of mean distortion on mean perturbation norm per ``K``.
    """
    cfg = replace(cfg, experiment="noise").validate()
    alg = cfg.algorithms[0]
    records = run_tasks(_tasks(cfg, cfg.k_list, [alg], [cfg.signal_model], cfg.sigmas),
                        cfg.threads)
    levels = []
    fits = []
    for k in cfg.k_list:
        kl = []
        for sigma in cfg.sigmas:
            g = [r for r in records if r.k == k and r.sigma == sigma]
            kl.append({"kind": cfg.perturbation, "sigma": sigma, "K": k,
                       "mean_e_norm": _mean([r.e_norm for r in g]),
                       "mean_distortion": _mean([r.distortion for r in g])})
        levels.extend(kl)
        if len(kl) >= 2:
            slope, intercept, r2 = linear_fit([r["mean_e_norm"] for r in kl],
                                              [r["mean_distortion"] for r in kl])
            fits.append({"kind": cfg.perturbation, "K": k, "slope": slope,
                         "intercept": intercept, "r2": r2, "levels": len(kl)})
    out = Path(cfg.output_dir)
    _write_csv(out / "trials.csv", ["sigma"] + TRIALS_HEADER,
               [[format_float(r.sigma)] + r.row() for r in records])
    _write_csv(out / "noise.csv", NOISE_HEADER,
               [[r["kind"], format_float(r["sigma"]), r["K"], format_float(r["mean_e_norm"]),
                 format_float(r["mean_distortion"])] for r in levels])
    _write_csv(out / "noise_fit.csv", NOISE_FIT_HEADER,
               [[f["kind"], f["K"], format_float(f["slope"]), format_float(f["intercept"]),
                 format_float(f["r2"]), f["levels"]] for f in fits])
    _write_errors(out, records)
    return levels, fits


def default_threads():
    env = os.environ.get("PURSUIT_THREADS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        raise DomainError(f"PURSUIT_THREADS must be an integer, got {env!r}")
