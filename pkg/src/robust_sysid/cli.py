"""Command-line entry point: ``robust-sysid <command> --config FILE``.

Exit codes: 0 success, 1 configuration error, 2 I/O error.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import analysis
from .errors import ConfigError, EtaTooLarge, RobustSysIDError
from .estimator import pooled_ols, robust_sysid
from .experiment import estimator_config, make_dataset, run_experiment, write_outputs
from .matlib import frobenius_norm, spectral_norm
from .sim import load_dataset, save_dataset
from .config import load_config

log = logging.getLogger("robust_sysid")


def _dataset(config):
    if config.dataset:
        return load_dataset(config.dataset)
    return make_dataset(config, config.n, config.eta, config.noise_spec(), config.root_seed)


def cmd_simulate(args, config):
    data = _dataset(config)
    out = args.out or os.path.join(config.output_path, "dataset.csv")
    parent = os.path.dirname(out)
    if parent:
        os.makedirs(parent, exist_ok=True)
    save_dataset(data, out)
    log.info("wrote %d trajectories to %s", data.n, out)
    return {"path": out, "n": data.n, "horizon": data.horizon, "d": data.system_dim,
            "corrupted_indices": list(data.corrupted_indices)}


def _errors(a_hat, a):
    if a_hat.shape != a.shape:
        return {}
    return {"spectral_error": spectral_norm(a_hat - a), "frobenius_error": frobenius_norm(a_hat - a)}


def cmd_estimate(args, config):
    data = _dataset(config)
    a = config.lti().a
    report = {"n": data.n, "horizon": data.horizon, "d": data.system_dim}
    if "robust" in config.estimators:
        est = robust_sysid(data, estimator_config(config, config.delta, config.eta))
        report["robust"] = {
            "a_hat": est.a_hat.tolist(),
            "K": est.plan.k,
            "M": est.plan.m,
            "dropped": est.plan.dropped,
            "gm_iterations": est.gm_iterations,
            "converged": est.converged,
            "min_bucket_eig": float(np.min(est.min_bucket_eigs)),
            **_errors(est.a_hat, a),
        }
    if "pooled_ols" in config.estimators:
        a_hat = pooled_ols(data)
        report["pooled_ols"] = {"a_hat": a_hat.tolist(), **_errors(a_hat, a)}
    return report


def cmd_analyze(args, config):
    a = config.lti().a
    noise = config.noise_spec()
    sigma2, sigma4t = noise.variance(), noise.fourth_moment()
    g = analysis.gramian(a, config.horizon)
    report = {
        "d": a.shape[0],
        "horizon": config.horizon,
        "sigma2": sigma2,
        "sigma4t": sigma4t,
        "gramian": g.tolist(),
        "lambda_min": analysis.lambda_min(g),
        "C_A": analysis.c_a(a, config.horizon),
        "C_w": analysis.c_w(sigma2, sigma4t),
        "bounds": {},
    }
    if a.shape[0] == 1:
        report["g_T"] = analysis.g_scalar(float(a[0, 0]), config.horizon)
    inputs = analysis.BoundInputs(a, config.horizon, sigma2, sigma4t, config.n, config.delta,
                                  config.eta, config.big_c, config.k_constant, config.m_constant)
    for which in analysis.THEOREMS:
        if which == "scalar_thm1" and a.shape[0] != 1:
            continue
        try:
            report["bounds"][which] = analysis.theorem_bound(inputs, which)._asdict()
        except EtaTooLarge as exc:
            report["bounds"][which] = {"error": str(exc)}
    return report


def cmd_bench(args, config):
    if args.command == "corrupt-bench" and config.eta_values is None:
        raise ConfigError("corrupt-bench needs eta_values in the config")
    out = args.out or config.output_path
    records, summaries = run_experiment(config, threads=args.threads)
    write_outputs(records, summaries, out)
    log.info("wrote %d records and %d summaries to %s", len(records), len(summaries), out)
    return {"records": os.path.join(out, "records.csv"), "summary": os.path.join(out, "summary.csv"),
            "trials": len(records)}


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "analyze": cmd_analyze,
    "bench": cmd_bench,
    "corrupt-bench": cmd_bench,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="experiment JSON file")
    common.add_argument("--seed", type=int, default=None, help="override root_seed")
    common.add_argument("--threads", type=int, default=1,
                        help="worker processes (ROBUST_SYSID_THREADS overrides)")
    common.add_argument("--quiet", action="store_true")

    parser = argparse.ArgumentParser(prog="robust-sysid", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("simulate", parents=[common], help="generate and cache a dataset")
    p.add_argument("--out", help="dataset CSV path")
    sub.add_parser("estimate", parents=[common], help="one estimation run, JSON to stdout")
    sub.add_parser("analyze", parents=[common], help="closed-form quantities and bounds as JSON")
    for name in ("bench", "corrupt-bench"):
        p = sub.add_parser(name, parents=[common], help="Monte Carlo sweep to CSV")
        p.add_argument("--out", help="output directory")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s")
    try:
        config = load_config(args.config, seed=args.seed)
        report = COMMANDS[args.command](args, config)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return 1
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return 2
    except RobustSysIDError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return 1
    if not args.quiet or args.command in ("estimate", "analyze"):
        json.dump(report, sys.stdout, indent=2)
        sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
