"""Detection pipeline and the simulation study driver.

Every replicate of a simulation grid cell gets its own seed, derived from
the base seed and ``(n, K, replicate)``; from it three independent streams
are spawned for (labels and popularities, adjacency, clustering). Output is
sorted, so it does not depend on worker scheduling.
"""

import csv
import hashlib
import json
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .cluster import (LassoProblem, default_theta, osc_affinity, partition_affinity,
                      ssc_affinity)
from .errors import DegenerateSpectrumWarning, InvalidArgument, NumericFailure, PabmError
from .estimation import estimate_lambdas, reconstruct_P_blockwise, reconstruct_P_labelfree
from .metrics import community_error, rmse_P
from .model import edge_prob_matrix, mixture_weights, random_params, sample_adjacency, signature_for
from .spectral import ase, sym_eigen

METHODS = ("osc", "ssc")
RECORD_FIELDS = ["n", "K", "method", "replicate", "seed", "miscluster_count", "miscluster_rate",
                 "ari", "rmse_blockwise", "rmse_labelfree", "wall_ms", "flags"]
SUMMARY_METRICS = ["miscluster_count", "miscluster_rate", "ari", "rmse_blockwise", "rmse_labelfree"]


# -- detection pipeline ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DetectResult:
    clustering: object
    report: object = None
    embedding: object = None
    affinity: object = None


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PabmError as exc:
        if exc.stage is None:
            exc.stage = name
        raise


def run_detect(A, K, method="osc", labels=None, theta=None, mode="spectral", seed=0,
               clusterer="gmm", lasso_tol=1e-6, lasso_max_iter=500, restarts=10,
               max_iter=300, tol=1e-6, threshold=None, eig=None):
    """Embed, build the affinity and partition it into ``K`` communities.

    ``method`` is ``"osc"`` or ``"ssc"`` (SSC on the spectral embedding).
    With ``labels`` the result carries an :class:`~pabm.metrics.ErrorReport`.
    Library errors get ``stage`` set to ``embedding``, ``affinity`` or
    ``partition``.
    """
    if method not in METHODS:
        raise InvalidArgument(f"unknown method {method!r}; expected one of {METHODS}")
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    sig = _stage("embedding", signature_for, K)
    if sig.d > n:
        raise InvalidArgument(f"K^2={sig.d} exceeds n={n}")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegenerateSpectrumWarning)
        emb = _stage("embedding", ase, A, sig, eig=eig)
    if method == "osc":
        aff = _stage("affinity", osc_affinity, emb.vectors)
    else:
        theta = default_theta(n) if theta is None else theta
        prob = _stage("affinity", LassoProblem, theta, lasso_tol, lasso_max_iter)
        aff = _stage("affinity", ssc_affinity, emb.vectors, prob)
    res = _stage("partition", partition_affinity, aff, K, mode=mode, threshold=threshold,
                 seed=seed, clusterer=clusterer, restarts=restarts, max_iter=max_iter, tol=tol)
    res.diagnostics["method"] = method
    res.diagnostics["padded_eigenvalues"] = emb.padded
    if caught:
        res.diagnostics["degenerate_spectrum"] = True
    report = None
    if labels is not None:
        report = community_error(res.labels, labels)
    return DetectResult(clustering=res, report=report, embedding=emb, affinity=aff)


# -- simulation --------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    n_list: tuple = (128, 256, 512, 1024)
    K_list: tuple = (2, 3)
    balance: str = "balanced"
    replicates: int = 10
    seed: int = 0
    method: str = "osc"
    within_beta: tuple = (2.0, 1.0)
    between_beta: tuple = (1.0, 2.0)
    rho: float = 1.0
    theta: float = None
    partition: str = "spectral"
    clusterer: str = "gmm"
    gmm_restarts: int = 10
    gmm_max_iter: int = 300
    gmm_tol: float = 1e-6
    lasso_tol: float = 1e-6
    lasso_max_iter: int = 500
    estimate: bool = True
    record_timing: bool = False

    def __post_init__(self):
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(self, "K_list", tuple(int(k) for k in self.K_list))
        object.__setattr__(self, "within_beta", tuple(float(x) for x in self.within_beta))
        object.__setattr__(self, "between_beta", tuple(float(x) for x in self.between_beta))
        if self.replicates < 1:
            raise InvalidArgument("replicates must be at least 1")
        if not self.n_list or not self.K_list:
            raise InvalidArgument("n_list and K_list must be nonempty")
        if min(self.K_list) < 1:
            raise InvalidArgument("community counts must be positive")
        for n in self.n_list:
            for K in self.K_list:
                if n < K * K:
                    raise InvalidArgument(f"n={n} is smaller than K^2={K * K}")
        for shape in (self.within_beta, self.between_beta):
            if len(shape) != 2 or min(shape) <= 0:
                raise InvalidArgument(f"Beta shapes must be two positive numbers, got {shape}")
        if self.balance not in ("balanced", "imbalanced"):
            raise InvalidArgument(f"unknown balance {self.balance!r}")
        if self.method not in METHODS + ("both",):
            raise InvalidArgument(f"unknown method {self.method!r}")
        if not 0 < self.rho <= 1:
            raise InvalidArgument("rho must lie in (0, 1]")
        if self.theta is not None and self.theta <= 0:
            raise InvalidArgument("theta must be positive")

    @property
    def methods(self):
        return METHODS if self.method == "both" else (self.method,)


def replicate_seed(base_seed, n, K, replicate):
    """``base_seed`` XOR a stable 63-bit hash of the grid cell and replicate."""
    digest = hashlib.blake2b(f"{n},{K},{replicate}".encode(), digest_size=8).digest()
    h = int.from_bytes(digest, "little") & (2**63 - 1)
    return (int(base_seed) ^ h) & (2**63 - 1)


def _nan_record(n, K, method, r, seed, flags):
    return {"n": n, "K": K, "method": method, "replicate": r, "seed": seed,
            "miscluster_count": math.nan, "miscluster_rate": math.nan, "ari": math.nan,
            "rmse_blockwise": math.nan, "rmse_labelfree": math.nan, "wall_ms": math.nan,
            "flags": sorted(flags)}


def run_replicate(config, n, K, r):
    """Simulate one graph and evaluate every requested method on it."""
    seed = replicate_seed(config.seed, n, K, r)
    s_params, s_graph, s_detect = np.random.SeedSequence(seed).spawn(3)
    alpha = mixture_weights(K, config.balance)
    params = random_params(n, K, np.random.default_rng(s_params), alpha=alpha,
                           within=config.within_beta, between=config.between_beta, rho=config.rho)
    if np.any(params.community_sizes() == 0):
        return [_nan_record(n, K, m, r, seed, {"empty_community"}) for m in config.methods]

    P = edge_prob_matrix(params)
    A = sample_adjacency(P, np.random.default_rng(s_graph)).A
    gmm_seed = int(np.random.default_rng(s_detect).integers(2**32))

    shared = set()
    t0 = time.perf_counter()
    eig = sym_eigen(A)
    eig_ms = (time.perf_counter() - t0) * 1e3

    rmse_block = rmse_free = math.nan
    if config.estimate:
        est = estimate_lambdas(A, params.z)
        if est.degenerate:
            shared.add("degenerate_block")
        rmse_block = rmse_P(reconstruct_P_blockwise(est, params.z).P, P)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateSpectrumWarning)
            emb = ase(A, signature_for(K), eig=eig)
        rmse_free = rmse_P(reconstruct_P_labelfree(A, K, embedding=emb).P, P)

    records = []
    for method in config.methods:
        flags = set(shared)
        t0 = time.perf_counter()
        try:
            out = run_detect(
                A, K, method=method, labels=params.z, theta=config.theta, mode=config.partition,
                seed=gmm_seed, clusterer=config.clusterer, lasso_tol=config.lasso_tol,
                lasso_max_iter=config.lasso_max_iter, restarts=config.gmm_restarts,
                max_iter=config.gmm_max_iter, tol=config.gmm_tol, eig=eig,
            )
        except PabmError as exc:
            # the config was validated up front, so anything raised here comes
            # from the sampled graph (e.g. an all-zero affinity) and is recorded
            kind = "numeric_failure" if isinstance(exc, NumericFailure) else "degenerate_input"
            rec = _nan_record(n, K, method, r, seed, flags | {f"{kind}:{exc.stage}"})
            rec["rmse_blockwise"], rec["rmse_labelfree"] = rmse_block, rmse_free
            records.append(rec)
            continue
        wall = (time.perf_counter() - t0) * 1e3 + eig_ms
        diag = out.clustering.diagnostics
        if diag.get("degenerate_spectrum"):
            flags.add("degenerate_spectrum")
        if diag.get("fallback"):
            flags.add("partition_fallback")
        if diag.get("degenerate"):
            flags.add("degenerate_partition")
        rep = out.report
        records.append({
            "n": n, "K": K, "method": method, "replicate": r, "seed": seed,
            "miscluster_count": rep.miscluster_count, "miscluster_rate": rep.miscluster_rate,
            "ari": rep.ari, "rmse_blockwise": rmse_block, "rmse_labelfree": rmse_free,
            "wall_ms": wall if config.record_timing else math.nan, "flags": sorted(flags),
        })
    return records


def _cell(args):
    return run_replicate(*args)


def run_simulation(config, workers=1):
    """Run the whole grid and return records sorted by (n, K, method, replicate)."""
    tasks = [(config, n, K, r) for n in config.n_list for K in config.K_list
             for r in range(config.replicates)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_cell, tasks))
    else:
        chunks = [_cell(t) for t in tasks]
    records = [rec for chunk in chunks for rec in chunk]
    records.sort(key=lambda d: (d["n"], d["K"], d["method"], d["replicate"]))
    return records


# -- aggregation and output --------------------------------------------------


def _finite(values):
    return [v for v in values if v is not None and not math.isnan(v)]


def summarize(records):
    """Median and IQR of each metric per (n, K, method), skipping failures."""
    groups = {}
    for rec in records:
        groups.setdefault((rec["n"], rec["K"], rec["method"]), []).append(rec)
    out = []
    for (n, K, method), rows in sorted(groups.items()):
        entry = {"n": n, "K": K, "method": method, "replicates": len(rows),
                 "failures": sum(1 for r in rows if math.isnan(r["miscluster_count"]))}
        for metric in SUMMARY_METRICS:
            vals = _finite([r[metric] for r in rows])
            if vals:
                q25, med, q75 = np.percentile(vals, [25, 50, 75])
                entry[metric] = {"median": float(med), "q25": float(q25), "q75": float(q75),
                                 "iqr": float(q75 - q25)}
            else:
                entry[metric] = None
        out.append(entry)
    return out


def _fmt(value):
    if isinstance(value, float):
        return "" if math.isnan(value) else repr(value)
    if isinstance(value, list):
        return ";".join(value)
    return str(value)


def write_records(records, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_FIELDS)
        for rec in records:
            w.writerow([_fmt(rec[f]) for f in RECORD_FIELDS])


def read_records(path):
    """Inverse of :func:`write_records` (numbers back to int/float, NaN for blanks)."""
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            rec = {}
            for key, val in row.items():
                if key in ("n", "K", "replicate", "seed"):
                    rec[key] = int(val)
                elif key == "method":
                    rec[key] = val
                elif key == "flags":
                    rec[key] = val.split(";") if val else []
                elif key == "miscluster_count":
                    rec[key] = int(val) if val else math.nan
                else:
                    rec[key] = float(val) if val else math.nan
            out.append(rec)
    return out


def write_summary(config, records, path):
    doc = {"config": asdict(config), "aggregates": summarize(records)}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def simulate_to_dir(config, out_dir, workers=1):
    """Run the grid and write ``records.csv`` and ``summary.json`` into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = run_simulation(config, workers=workers)
    write_records(records, out_dir / "records.csv")
    write_summary(config, records, out_dir / "summary.json")
    return records
