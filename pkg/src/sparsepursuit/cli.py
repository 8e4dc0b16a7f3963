"""Command-line entry point.

Exit status: 0 on success, 1 on invalid input or usage, 2 on runtime failure.
"""
import argparse
import logging
import sys
import warnings
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import bench
from .errors import DimensionError, DomainError, PursuitError
from .instances import (PerturbationSpec, apply_perturbation, gen_gaussian_matrix,
                        gen_near_orthogonal_matrix, gen_sparse_signal, normalize_columns)
from .matfile import format_float, read_matrix, read_vector, write_matrix, write_vector
from .pursuit import (RecoveryOptions, l0_bruteforce, omp_recover, sp_recover,
                      sp_recover_approx)
from .rip import (LemmaReport, rip_constants, verify_monotonicity, verify_near_orthogonality,
                  verify_projection_bounds, verify_residue_properties)

log = logging.getLogger("sparsepursuit")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def parse_k_range(text):
    """``"10..60:5"`` (inclusive), ``"5,10,20"`` or ``"7"`` -> list of ints."""
    text = text.strip()
    try:
        if ".." in text:
            span, _, step = text.partition(":")
            lo, hi = (int(t) for t in span.split(".."))
            step = int(step) if step else 1
            if step < 1 or hi < lo:
                raise ValueError
            return list(range(lo, hi + 1, step))
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise DomainError(f"bad K range {text!r}; use lo..hi:step or a comma list")


def _floats(text):
    try:
        return [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise DomainError(f"bad number list {text!r}")


def read_config(path):
    """Plain ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path) as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


# config-file / CLI key -> (ExperimentConfig field, converter)
_KEYS = {
    "m": ("m", int),
    "n": ("n", int),
    "k": ("k_list", parse_k_range),
    "trials": ("trials", int),
    "signal": ("signal_model", str),
    "signals": ("signal_models", lambda s: [t.strip() for t in s.split(",") if t.strip()]),
    "p": ("p", float),
    "cx": ("c_x", float),
    "alg": ("algorithms", lambda s: [t.strip() for t in s.split(",") if t.strip()]),
    "perturbation": ("perturbation", str),
    "sigmas": ("sigmas", _floats),
    "seed": ("master_seed", int),
    "out": ("output_dir", str),
    "threads": ("threads", int),
    "timing": ("timing", lambda s: str(s).lower() in ("1", "true", "yes", "on")),
}

_DEFAULTS = {
    "frequency": dict(k_list=list(range(10, 61, 5)), algorithms=["sp", "omp"], trials=500),
    "iterations": dict(k_list=[5, 10, 20, 40], algorithms=["sp"], trials=200,
                       signal_models=["zero_one", "power_law", "exponential"]),
    "noise": dict(k_list=[10], algorithms=["sp"], trials=500, signal_model="zero_one",
                  perturbation="measurement", sigmas=[0.01, 0.02, 0.05, 0.1, 0.2]),
}


def build_config(experiment, args):
    values = dict(_DEFAULTS[experiment])
    values["threads"] = bench.default_threads()
    if getattr(args, "config", None):
        for key, raw in read_config(args.config).items():
            if key not in _KEYS:
                raise DomainError(f"unknown config key {key!r}")
            name, conv = _KEYS[key]
            values[name] = conv(raw)
    for key, (name, conv) in _KEYS.items():
        raw = getattr(args, key, None)
        if raw is not None:
            values[name] = conv(raw) if isinstance(raw, str) else raw
    known = {f.name for f in fields(bench.ExperimentConfig)}
    return bench.ExperimentConfig(experiment=experiment,
                                  **{k: v for k, v in values.items() if k in known}).validate()


def _common(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    g = parser.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=default, help="master seed")
    g.add_argument("--out", default=default, help="output file or directory")
    g.add_argument("--trials", type=int, default=default, help="Monte-Carlo trials")
    g.add_argument("--threads", type=int, default=default,
                   help="worker processes (fallback: $PURSUIT_THREADS)")
    g.add_argument("-v", "--verbose", action="store_true",
                   default=argparse.SUPPRESS if suppress else False)


def _bench_options(p):
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--k", help="K values: lo..hi:step, comma list or single value")
    p.add_argument("--signal", choices=["gaussian", "zero_one", "power_law", "exponential"])
    p.add_argument("--p", type=float, help="decay exponent for power_law/exponential")
    p.add_argument("--cx", type=float, help="decay amplitude c_x")
    p.add_argument("--timing", action="store_const", const=True,
                   help="record wall time per trial (makes output non-reproducible)")


def make_parser():
    parser = _Parser(prog="sparsepursuit",
                     description="Subspace Pursuit recovery, RIP certification and benchmarks.")
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("recover", help="recover one signal from measurement files")
    _common(p, suppress=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--measurements", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alg", choices=["sp", "sp2k", "omp", "l0"], default="sp")
    p.add_argument("--stopping-rule", choices=["residue_increase", "residue_zero"],
                   default="residue_increase")
    p.add_argument("--max-iterations", type=int)
    p.add_argument("--zero-tol", type=float, default=1e-8)

    p = sub.add_parser("rip", help="exact RIP constants of a matrix file")
    _common(p, suppress=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--k", type=int, required=True)

    p = sub.add_parser("generate", help="write a random instance to matrix files")
    _common(p, suppress=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--signal", default="gaussian",
                   choices=["gaussian", "zero_one", "power_law", "exponential"])
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--cx", type=float, default=1.0)
    p.add_argument("--sigma-e", type=float, default=0.0, help="measurement noise level")

    p = sub.add_parser("bench-frequency", help="exact-recovery rate versus K")
    _common(p, suppress=True)
    _bench_options(p)
    p.add_argument("--alg", help="comma list from sp,omp,l0,sp2k")

    p = sub.add_parser("bench-iterations", help="mean SP iterations versus K")
    _common(p, suppress=True)
    _bench_options(p)
    p.add_argument("--signals", help="comma list of signal models")

    p = sub.add_parser("bench-noise", help="distortion versus perturbation level")
    _common(p, suppress=True)
    _bench_options(p)
    p.add_argument("--alg", help="sp or sp2k")
    p.add_argument("--perturbation", choices=["signal", "measurement"])
    p.add_argument("--sigmas", help="comma list of noise standard deviations")

    p = sub.add_parser("verify-lemmas", help="numerical checks of the RIP and projection lemmas")
    _common(p, suppress=True)
    return parser


def cmd_recover(args):
    phi, _ = read_matrix(args.matrix)
    y, _ = read_vector(args.measurements)
    m, n = phi.shape
    if y.shape[0] != m:
        raise DimensionError(f"measurement length {y.shape[0]} != matrix rows {m}")
    k = args.k
    if args.alg in ("sp", "sp2k") and 2 * k > m:
        log.warning("K=%d exceeds m/2=%g; recovery may be unreliable", k, m / 2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        if args.alg == "sp":
            opts = RecoveryOptions(k=k, stopping_rule=args.stopping_rule,
                                   max_iterations=args.max_iterations,
                                   zero_tolerance=args.zero_tol)
            res = sp_recover(phi, y, opts)
        elif args.alg == "sp2k":
            res = sp_recover_approx(phi, y, k)
        elif args.alg == "omp":
            res = omp_recover(phi, y, k, zero_tolerance=args.zero_tol)
        else:
            res = l0_bruteforce(phi, y, k, zero_tolerance=args.zero_tol)
    print(f"algorithm {args.alg}")
    print(f"termination {res.termination}")
    print(f"iterations {res.iterations}")
    print("support " + ",".join(str(i) for i in res.support))
    print("coefficients " + " ".join(format_float(v) for v in res.estimate[res.support]))
    print("residue_norms " + " ".join(format_float(v) for v in res.residue_norms))
    if args.out:
        write_vector(args.out, res.estimate,
                     header=f"alg={args.alg} K={k} termination={res.termination}")
    return 0


def cmd_rip(args):
    phi, _ = read_matrix(args.matrix)
    for est in rip_constants(phi, args.k):
        print(f"{est.k} {format_float(est.delta)} {','.join(str(i) for i in est.witness)}")
    return 0


def cmd_generate(args):
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    seed = args.seed or 0
    s_mat, s_sig, s_noise = np.random.SeedSequence(seed).spawn(3)
    phi = gen_gaussian_matrix(args.m, args.n, s_mat)
    sig = gen_sparse_signal(args.n, args.k, args.signal, s_sig, p=args.p, c_x=args.cx)
    x, e = apply_perturbation(sig, PerturbationSpec(
        "measurement" if args.sigma_e > 0 else "none", args.sigma_e), args.m, s_noise)
    header = f"model={args.signal} seed={seed} K={args.k}"
    write_matrix(out / "matrix.txt", phi, header=header)
    write_vector(out / "signal.txt", x, header=header)
    write_vector(out / "measurements.txt", phi @ x + e,
                 header=f"{header} sigma_e={format_float(args.sigma_e)}")
    print(out / "matrix.txt")
    print(out / "signal.txt")
    print(out / "measurements.txt")
    return 0


def _print_rows(header, rows):
    print(",".join(header))
    for r in rows:
        print(",".join(format_float(r[h]) if isinstance(r[h], float) else str(r[h])
                       for h in header))


def cmd_bench(experiment, args):
    if args.out is None:
        args.out = f"results/{experiment}"
    cfg = build_config(experiment, args)
    if experiment == "frequency":
        _print_rows(bench.SUMMARY_HEADER, bench.run_frequency_experiment(cfg))
    elif experiment == "iterations":
        _print_rows(bench.ITERATIONS_HEADER, bench.run_iteration_experiment(cfg))
    else:
        levels, fits = bench.run_noise_experiment(cfg)
        _print_rows(bench.NOISE_HEADER, levels)
        _print_rows(bench.NOISE_FIT_HEADER, fits)
    log.info("wrote CSV files to %s", cfg.output_dir)
    return 0


def cmd_verify(args):
    trials = args.trials or 500
    seed = args.seed or 0
    reports = []
    mono = [verify_monotonicity(gen_gaussian_matrix(8, 10, np.random.SeedSequence([seed, 1, i])), 3)
            for i in range(20)]
    reports.append(LemmaReport("L1_monotonicity", sum(r.instances_checked for r in mono),
                               max(r.max_violation for r in mono), all(r.passed for r in mono)))
    phi = normalize_columns(gen_gaussian_matrix(8, 12, np.random.SeedSequence([seed, 2])))
    reports.append(verify_near_orthogonality(phi, trials, np.random.SeedSequence([seed, 3])))
    phi = normalize_columns(gen_gaussian_matrix(10, 14, np.random.SeedSequence([seed, 4])))
    reports.append(verify_projection_bounds(phi, trials, np.random.SeedSequence([seed, 5]),
                                            size_i=1, size_j=1))
    phi = gen_near_orthogonal_matrix(12, 0.1, np.random.SeedSequence([seed, 6]))
    reports.append(verify_projection_bounds(phi, trials, np.random.SeedSequence([seed, 7])))
    reports.extend(verify_residue_properties(2 * trials, np.random.SeedSequence([seed, 8])))
    for r in reports:
        print(r.line())
    return 0 if all(r.passed for r in reports) else 2


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s",
                        stream=sys.stderr)
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        if args.verbose:
            log.setLevel(logging.DEBUG)
        if args.command is None:
            parser.print_help(sys.stderr)
            return 1
        cmd = args.command
        if cmd == "recover":
            return cmd_recover(args)
        if cmd == "rip":
            return cmd_rip(args)
        if cmd == "generate":
            return cmd_generate(args)
        if cmd == "verify-lemmas":
            return cmd_verify(args)
        return cmd_bench(cmd.replace("bench-", ""), args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (DomainError, DimensionError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (PursuitError, OSError, ArithmeticError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
