"""Synthetic checkerboard benchmark harness.

Generates block-constant ground truth plus Gaussian noise and uniform
missingness, builds the two-level similarity graphs used in the flagship
simulation (weight 1 within a block, 0.001 across), and runs head-to-head
comparisons of the selection strategies on identical data realizations.
"""

import math
import os
import re
import time
from dataclasses import dataclass, replace

import numpy as np

from .completion import BmcProblem, check_assumption, complete
from .graph import WeightedGraph
from .io import trace_to_csv
from .selection import ImsConfig, grid_search, ims
from .system import ObservedMatrix
from .util import SolveCounter, stream_seed, substream, unvec, vec

__all__ = [
    "CheckerboardSpec",
    "Method",
    "ExperimentResult",
    "generate",
    "block_weights",
    "run_comparison",
    "summarize",
]


@dataclass(frozen=True)
class CheckerboardSpec:
    """Block-constant truth, noise level, and missingness for one benchmark."""

    row_blocks: tuple
    col_blocks: tuple
    means: np.ndarray
    noise_sd: float = 1.0
    missing_fraction: float = 0.1
    seed: int = 0
    cross_weight: float = 0.001  # 0 splits the graphs into per-block components

    def __post_init__(self):
        object.__setattr__(self, "row_blocks", tuple(int(b) for b in self.row_blocks))
        object.__setattr__(self, "col_blocks", tuple(int(b) for b in self.col_blocks))
        object.__setattr__(self, "means", np.asarray(self.means, dtype=np.float64))
        if any(b < 1 for b in self.row_blocks + self.col_blocks):
            raise ValueError("block sizes must be positive")
        if self.means.shape != (len(self.row_blocks), len(self.col_blocks)):
            raise ValueError("means must be R x C for R row blocks, C col blocks")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be >= 0")
        if self.cross_weight < 0:
            raise ValueError("cross_weight must be >= 0")
        if not 0 <= self.missing_fraction < 1:
            raise ValueError("missing_fraction must lie in [0, 1)")
        k = self.n_rows * self.n_cols
        if math.ceil(self.missing_fraction * k) >= k:
            raise ValueError("missing fraction leaves no observations")

    @property
    def n_rows(self):
        return sum(self.row_blocks)

    @property
    def n_cols(self):
        return sum(self.col_blocks)

    def truth(self):
        R = np.repeat(np.arange(len(self.row_blocks)), self.row_blocks)
        C = np.repeat(np.arange(len(self.col_blocks)), self.col_blocks)
        return self.means[R[:, None], C[None, :]]


def generate(spec):
    """Draw one (truth, observed) realization; pure function of spec.seed.

    X = truth + noise_sd * standard normal; exactly ceil(f * np) entries are
    masked, drawn uniformly without replacement. Noise and mask come from
    independent named substreams, so changing one never shifts the other.
    """
    M = spec.truth()
    n, p = M.shape
    k = n * p
    noise = substream(spec.seed, "noise").standard_normal((n, p))
    X = M + spec.noise_sd * noise
    n_missing = math.ceil(spec.missing_fraction * k)
    mask_vec = np.ones(k, dtype=bool)
    if n_missing:
        miss = substream(spec.seed, "mask").choice(k, size=n_missing, replace=False)
        mask_vec[miss] = False
    return M, ObservedMatrix(X, unvec(mask_vec, n, p))


def block_weights(block_sizes, within=1.0, cross=0.001):
    """Complete two-level similarity graph: ``within`` inside a block,
    ``cross`` across blocks. Positive cross weight means one component."""
    labels = np.repeat(np.arange(len(block_sizes)), block_sizes)
    n = labels.size
    iu, ju = np.triu_indices(n, k=1)
    w = np.where(labels[iu] == labels[ju], float(within), float(cross))
    keep = w > 0
    return WeightedGraph(n, iu[keep], ju[keep], w[keep])


@dataclass(frozen=True)
class Method:
    """One selection strategy in a comparison run."""

    kind: str  # ims_exact | ims_hutchinson | grid_bic | grid_cv
    n_probes: int = 5
    grid_points: int = 50
    folds: int = 5

    def __post_init__(self):
        if self.kind not in ("ims_exact", "ims_hutchinson", "grid_bic", "grid_cv"):
            raise ValueError(f"unknown method kind {self.kind!r}")

    @property
    def label(self):
        if self.kind == "ims_hutchinson":
            return f"ims_hutchinson({self.n_probes})"
        if self.kind == "grid_bic":
            return f"grid_bic({self.grid_points})"
        if self.kind == "grid_cv":
            return f"grid_cv({self.grid_points},{self.folds})"
        return self.kind

    @classmethod
    def parse(cls, text):
        """Parse compact forms like ims_exact, ims_hutchinson(5), grid_cv(50,5)."""
        m = re.fullmatch(r"\s*([a-z_]+)\s*(?:\(([\d\s,]*)\))?\s*", text)
        if not m:
            raise ValueError(f"cannot parse method {text!r}")
        kind = m.group(1)
        args = [int(a) for a in m.group(2).split(",")] if m.group(2) else []
        if kind == "ims_hutchinson" and args:
            return cls(kind, n_probes=args[0])
        if kind == "grid_bic" and args:
            return cls(kind, grid_points=args[0])
        if kind == "grid_cv" and args:
            return cls(kind, grid_points=args[0],
                       folds=args[1] if len(args) > 1 else 5)
        return cls(kind)


@dataclass(frozen=True)
class ExperimentResult:
    method: str
    replicate: int
    wall_seconds: float
    gamma_r: float
    gamma_c: float
    bic: float
    mse_missing: float
    mse_observed: float
    solve_count: int


def _realize(spec, master_seed, replicate):
    """Draw a replicate's data, regenerating the mask when coverage fails."""
    row_g = block_weights(spec.row_blocks, cross=spec.cross_weight)
    col_g = block_weights(spec.col_blocks, cross=spec.cross_weight)
    for attempt in range(20):
        rep_seed = stream_seed(master_seed, "replicate", replicate, "attempt", attempt)
        M, obs = generate(replace(spec, seed=rep_seed))
        problem = BmcProblem(obs, row_g, col_g)
        if check_assumption(problem).holds:
            return M, problem
    raise RuntimeError("no feasible mask realization in 20 attempts")


def _run_method(problem, method, rep_seed, solver_cfg, ims_cfg, exponent_range):
    if method.kind == "ims_exact":
        params, trace = ims(problem, mode="exact", cfg=ims_cfg,
                            solver_cfg=solver_cfg)
        return params, trace.iterates[-1].bic, trace
    if method.kind == "ims_hutchinson":
        cfg = replace(ims_cfg or ImsConfig(), n_probes=method.n_probes)
        params, trace = ims(problem, mode="hutchinson", cfg=cfg, seed=rep_seed,
                            solver_cfg=solver_cfg)
        return params, trace.iterates[-1].bic, trace
    if method.kind == "grid_bic":
        params, surface = grid_search(problem, "bic_exact", method.grid_points,
                                      exponent_range=exponent_range, cfg=solver_cfg)
        return params, float(np.min(surface)), None
    params, surface = grid_search(problem, "cv", method.grid_points,
                                  exponent_range=exponent_range, cfg=solver_cfg,
                                  seed=rep_seed, folds=method.folds)
    return params, float("nan"), None


def _replicate_results(args):
    (spec, methods, rep, master_seed, solver_cfg, ims_cfg, exponent_range,
     trace_dir) = args
    M, problem = _realize(spec, master_seed, rep)
    truth_vec = vec(M)
    x_vec = vec(problem.data.masked_values())
    mask_vec = vec(problem.data.mask)
    rep_seed = stream_seed(master_seed, "method-streams", rep)
    results = []
    for method in methods:
        t0 = time.perf_counter()
        with SolveCounter() as counter:
            params, bic, trace = _run_method(problem, method, rep_seed,
                                             solver_cfg, ims_cfg, exponent_range)
            Z = complete(problem, params, solver_cfg).estimate
        wall = time.perf_counter() - t0
        if trace_dir is not None and trace is not None:
            slug = re.sub(r"[^A-Za-z0-9_]+", "-", method.label).strip("-")
            trace_to_csv(os.path.join(trace_dir, f"{slug}-rep{rep}.csv"), trace)
        z_vec = vec(Z)
        err_truth = z_vec - truth_vec
        n_miss = int(np.count_nonzero(~mask_vec))
        mse_missing = (float(np.mean(err_truth[~mask_vec] ** 2))
                       if n_miss else float("nan"))
        mse_observed = float(np.mean((z_vec[mask_vec] - x_vec[mask_vec]) ** 2))
        results.append(ExperimentResult(
            method.label, rep, wall, params.gamma_r, params.gamma_c,
            bic, mse_missing, mse_observed, counter.count))
    return results


def run_comparison(spec, methods, replicates, master_seed=0, solver_cfg=None,
                   ims_cfg=None, exponent_range=(-9.0, 1.0), threads=1,
                   trace_dir=None):
    """Run every method on identical replicate realizations.

    Returns one ExperimentResult per (method, replicate), replicate-major.
    Apart from wall_seconds the output is a pure function of
    (spec, methods, master_seed); per-method solve counts are audited,
    not estimated. threads > 1 farms replicates out to worker processes
    without changing the results. trace_dir, when given, receives one
    selection-trace CSV per (descent method, replicate).
    """
    methods = tuple(Method.parse(m) if isinstance(m, str) else m
                    for m in methods)
    if trace_dir is not None:
        os.makedirs(trace_dir, exist_ok=True)
    jobs = [(spec, methods, rep, master_seed, solver_cfg, ims_cfg,
             tuple(exponent_range), trace_dir) for rep in range(replicates)]
    if threads > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(_replicate_results, jobs))
    else:
        chunks = [_replicate_results(job) for job in jobs]
    return [r for chunk in chunks for r in chunk]


def summarize(results):
    """Per-method mean/sd of every numeric metric, as a plain dict."""
    out = {}
    metrics = ("wall_seconds", "mse_missing", "mse_observed", "solve_count")
    for label in sorted({r.method for r in results}):
        rows = [r for r in results if r.method == label]
        entry = {"replicates": len(rows)}
        for metric in metrics:
            vals = np.array([getattr(r, metric) for r in rows], dtype=np.float64)
            entry[metric] = {"mean": float(vals.mean()),
                             "sd": float(vals.std(ddof=1)) if len(vals) > 1 else 0.0}
        out[label] = entry
    return out
