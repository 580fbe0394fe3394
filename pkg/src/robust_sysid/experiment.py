"""Seeded Monte Carlo sweeps comparing Robust-SysID against pooled OLS.

Trial ``r`` at sweep point ``s`` draws its data from the seed
``derive_seed(root_seed, s, r)`` and its corruption from the stream
``(seed, 1)``, so every trial is reproducible in isolation and results do not
depend on how trials are scheduled. Rows are always written in
(sweep, trial, estimator) order.

Quantiles use the nearest-rank rule: the ``level`` quantile of ``n`` sorted
values is the value at 1-based rank ``ceil(level * n)``.
"""

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields

import numpy as np

from .errors import EmptyGroup, RobustSysIDError
from .estimator import (
    EstimatorConfig,
    plan_buckets,
    pooled_ols,
    resolve_bucket_count,
    robust_sysid,
)
from .matlib import frobenius_norm, spectral_norm
from .noise import derive_seed, make_rng
from .sim import CorruptionSpec, collect, corrupt

SUMMARY_LEVELS = {"median": 0.5, "q90": 0.9, "q99": 0.99, "q999": 0.999}


@dataclass(frozen=True)
class TrialRecord:
    sweep_index: int
    sweep_value: float
    trial_index: int
    estimator_name: str
    status: str
    d: int
    T: int
    N: int
    K: int
    M: int
    eta: float
    delta: float
    noise_kind: str
    kurtosis: float
    seed: int
    spectral_error: float
    frobenius_error: float
    gm_iterations: int
    min_bucket_eig: float
    elapsed_ms: float


@dataclass(frozen=True)
class QuantileSummary:
    estimator_name: str
    sweep_index: int
    sweep_value: float
    count: int
    failures: int
    mean: float
    median: float
    q90: float
    q99: float
    q999: float
    max: float


def estimator_config(config, delta, eta):
    return EstimatorConfig(
        bucket_count=config.bucket_count,
        delta=delta,
        mode=config.resolved_mode(eta),
        eta=eta,
        k_constant=config.k_constant,
        gm_tol=config.gm_tol,
    )


def make_dataset(config, n, eta, noise, seed):
    system = config.lti()
    data = collect(system, noise, config.horizon, n, seed)
    if eta > 0:
        spec = CorruptionSpec.from_dict(config.corruption, eta)
        data = corrupt(data, spec, make_rng(seed, 1))
    return data


def run_trial(config, sweep_index, trial_index):
    """All estimator records for one (sweep point, trial) pair."""
    _, values = config.sweep()
    n, delta, eta, noise = config.point(sweep_index)
    seed = derive_seed(config.root_seed, sweep_index, trial_index)
    data = make_dataset(config, n, eta, noise, seed)
    a = config.lti().a
    base = dict(
        sweep_index=sweep_index,
        sweep_value=float(values[sweep_index]),
        trial_index=trial_index,
        d=a.shape[0],
        T=config.horizon,
        N=n,
        eta=eta,
        delta=delta,
        noise_kind=noise.kind,
        kurtosis=noise.kurtosis(),
        seed=seed,
    )
    out = []
    for name in config.estimators:
        start = time.perf_counter()
        k = m = iters = 0
        min_eig = math.nan
        try:
            if name == "robust":
                est_cfg = estimator_config(config, delta, eta)
                plan = plan_buckets(n, resolve_bucket_count(est_cfg, n))
                k, m = plan.k, plan.m
                result = robust_sysid(data, est_cfg)
                a_hat, iters = result.a_hat, result.gm_iterations
                min_eig = float(np.min(result.min_bucket_eigs))
            else:
                k, m = 1, n
                a_hat = pooled_ols(data)
                x, _ = data.last_pairs()
                min_eig = float(np.linalg.eigvalsh(x.T @ x / n)[0])
            status = "ok"
            spec_err = spectral_norm(a_hat - a)
            frob_err = frobenius_norm(a_hat - a)
        except RobustSysIDError as exc:
            status = type(exc).__name__
            spec_err = frob_err = math.nan
        elapsed = (time.perf_counter() - start) * 1e3
        out.append(
            TrialRecord(
                estimator_name=name,
                status=status,
                K=k,
                M=m,
                spectral_error=spec_err,
                frobenius_error=frob_err,
                gm_iterations=iters,
                min_bucket_eig=min_eig,
                elapsed_ms=elapsed,
                **base,
            )
        )
    return out


def _run_task(args):
    return run_trial(*args)


def resolve_threads(threads=None):
    env = os.environ.get("ROBUST_SYSID_THREADS")
    if env:
        return max(1, int(env))
    return max(1, threads or 1)


def run_experiment(config, threads=None):
    """Run every trial of every sweep point; return ``(records, summaries)``."""
    _, values = config.sweep()
    tasks = [(config, s, r) for s in range(len(values)) for r in range(config.trials)]
    workers = resolve_threads(threads)
    if workers == 1:
        batches = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    records = [rec for batch in batches for rec in batch]
    return records, quantiles(records)


def nearest_rank(values, level):
    """Nearest-rank quantile of a non-empty sample."""
    v = sorted(values)
    if not v:
        raise EmptyGroup("quantile of an empty sample")
    if not 0 < level <= 1:
        raise ValueError("level must lie in (0, 1]")
    rank = max(1, math.ceil(round(level * len(v), 9)))
    return v[rank - 1]


def quantiles(records):
    """Spectral-error summaries per (estimator, sweep point).

    Failed trials are counted in ``failures`` and excluded from the
    statistics; a group with no successful trial reports NaN statistics.
    """
    if not records:
        raise EmptyGroup("no records to summarise")
    groups = {}
    for rec in records:
        groups.setdefault((rec.sweep_index, rec.estimator_name), []).append(rec)
    order = []
    for rec in records:
        if rec.estimator_name not in order:
            order.append(rec.estimator_name)
    summaries = []
    for (sweep_index, name), group in sorted(groups.items(), key=lambda kv: (kv[0][0], order.index(kv[0][1]))):
        errs = [r.spectral_error for r in group if r.status == "ok"]
        if errs:
            stats = {key: nearest_rank(errs, lvl) for key, lvl in SUMMARY_LEVELS.items()}
            mean, top = math.fsum(errs) / len(errs), max(errs)
        else:
            stats = dict.fromkeys(SUMMARY_LEVELS, math.nan)
            mean = top = math.nan
        summaries.append(
            QuantileSummary(
                estimator_name=name,
                sweep_index=sweep_index,
                sweep_value=group[0].sweep_value,
                count=len(errs),
                failures=len(group) - len(errs),
                mean=mean,
                max=top,
                **stats,
            )
        )
    return summaries


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(rows, path, row_type=None):
    """Write dataclass rows with a header of their field names.

    ``row_type`` fixes the header when ``rows`` is empty.
    """
    row_type = row_type or (type(rows[0]) if rows else TrialRecord)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f.name for f in fields(row_type)])
        for row in rows:
            writer.writerow([_fmt(v) for v in astuple(row)])


def read_csv(path, row_type=TrialRecord):
    kinds = {f.name: f.type for f in fields(row_type)}
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            conv = {}
            for key, raw in row.items():
                kind = kinds[key]
                conv[key] = int(raw) if kind in (int, "int") else float(raw) if kind in (float, "float") else raw
            out.append(row_type(**conv))
    return out


def write_outputs(records, summaries, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    write_csv(records, os.path.join(out_dir, "records.csv"), TrialRecord)
    write_csv(summaries, os.path.join(out_dir, "summary.csv"), QuantileSummary)
