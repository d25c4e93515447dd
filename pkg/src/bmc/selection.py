"""Penalty selection: information criteria, randomized traces, and descent.

The selection objective is BIC(gamma) = |Omega| log(rss) + log|Omega| df with
df = tr(S^-1). Two evaluation modes exist:

* exact - traces and solves are computed in the joint eigenbasis of the two
  Laplacians. Q = Q_c kron Q_r simultaneously diagonalizes both penalty
  terms, so S is congruent to diag(c) - U U^T where U collects the missing
  coordinates of Q^T (orthonormal columns). Woodbury algebra over that
  missing block gives tr(S^-1), tr(S^-1 K S^-1), and solves in O(np * m^2)
  per gamma instead of O((np)^3), with no approximation.
* hutchinson - df is the Rademacher probe average (1/N) sum w^T S^-1 w with
  the probes drawn once and held fixed for a whole run, so the surrogate
  surface is deterministic and smooth descent on it is meaningful.

Quasi-Newton descent runs in eta = log(gamma) coordinates (positivity for
free; gradients mapped by the chain rule d/d_eta = gamma * d/d_gamma).
"""

import math
import time
import warnings
import weakref
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import solver as _solver
from .completion import BmcProblem, _require_assumption, check_assumption, complete
from .errors import (AssumptionViolated, BmcError, FoldInfeasible,
                     GradientUndefined, NotPositiveDefinite)
from .solver import SolveReport, SolverConfig
from .system import ObservedMatrix, PenaltyParams
from .util import count_solve, substream, unvec, vec

__all__ = [
    "ProbeSet",
    "ObjectiveEvaluation",
    "SelectionTrace",
    "IterateRecord",
    "ImsConfig",
    "degrees_of_freedom_exact",
    "hutchinson_trace",
    "sample_count_for",
    "evaluate_objective",
    "gradient",
    "ims",
    "grid_search",
    "cross_validate",
]

RSS_FLOOR = 1e-300
SPECTRAL_CAP = 5000  # unknowns; the engine keeps an np x m dense buffer
ETA_BOUND = 60.0  # |log gamma| cap; keeps unbounded BIC descent finite


@dataclass(frozen=True)
class ProbeSet:
    """Fixed Rademacher probes, drawn once per run and reused at every iterate."""

    probes: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        P = np.asarray(self.probes, dtype=np.float64)
        object.__setattr__(self, "probes", P)
        if P.ndim != 2:
            raise ValueError("probes must be an (N, np) array")
        if not np.all(np.abs(P) == 1.0):
            raise ValueError("probe entries must be +/-1")

    @classmethod
    def draw(cls, n_entries, n_probes, rng_or_seed=0):
        if isinstance(rng_or_seed, np.random.Generator):
            rng, seed = rng_or_seed, None
        else:
            seed = int(rng_or_seed)
            rng = np.random.default_rng(seed)
        P = rng.integers(0, 2, size=(n_probes, n_entries)) * 2.0 - 1.0
        return cls(P, seed)

    @property
    def n_probes(self):
        return self.probes.shape[0]


def sample_count_for(epsilon, delta):
    """Rademacher probe count guaranteeing relative error epsilon w.p. 1-delta.

    ceil(6 * epsilon^-2 * log(2/delta)).
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return math.ceil(6.0 / (epsilon * epsilon) * math.log(2.0 / delta))


class _WoodburyFactor:
    """Per-gamma state of the spectral engine; mimics a solve handle.

    Holds c = 1 + gamma_r lamR + gamma_c lamC and the Cholesky factor of the
    Woodbury block B = I_m - U^T diag(1/c) U. Solves and exact traces are
    then cheap; ``solve_count`` is audited like any solver handle.
    """

    method = "spectral"

    def __init__(self, engine, params):
        self.engine = engine
        self.params = params
        self.solve_count = 0
        e = engine
        self.c = 1.0 + params.gamma_r * e.lamR + params.gamma_c * e.lamC
        m = e.m
        if m:
            self.P = e.U / self.c[:, None]
            B = np.eye(m) - e.U.T @ self.P
            try:
                self.cB = sla.cho_factor(B, lower=True)
            except np.linalg.LinAlgError as exc:
                raise NotPositiveDefinite(str(exc)) from exc
        else:
            self.P = None
            self.cB = None
        self._Y = None
        self._trace = None

    # -- solves -----------------------------------------------------------
    def _solve_eigen(self, bt):
        if self.engine.m == 0:
            return bt / self.c
        return bt / self.c + self.P @ sla.cho_solve(self.cB, self.P.T @ bt)

    def solve(self, b):
        e = self.engine
        zt = self._solve_eigen(e.to_eigen(b))
        z = e.from_eigen(zt)
        self.solve_count += 1
        count_solve()
        nb = np.linalg.norm(b)
        res = 0.0 if nb == 0 else float(np.linalg.norm(self._apply_s(z) - b) / nb)
        return z, SolveReport("spectral", 0, res, self.solve_count > 1)

    def solve_many(self, B):
        return [self.solve(b) for b in B]

    def _apply_s(self, v):
        e = self.engine
        vt = e.to_eigen(v)
        st = self.c * vt
        if e.m:
            st -= e.U @ (e.U.T @ vt)
        return e.from_eigen(st)

    # -- exact traces -------------------------------------------------------
    def _ensure_Y(self):
        # Y = diag(1/c) U L^-T with B = L L^T, so tr(B^-1 P^T P) = ||Y||_F^2
        if self._Y is None and self.engine.m:
            self._Y = sla.solve_triangular(self.cB[0], self.P.T, lower=True).T

    def trace_inv(self):
        """Exact tr(S^-1)."""
        t = float(np.sum(1.0 / self.c))
        if self.engine.m:
            self._ensure_Y()
            t += float(np.einsum("ij,ij->", self._Y, self._Y))
        return t

    def grad_traces(self):
        """Exact (tr(S^-1 K_r S^-1), tr(S^-1 K_c S^-1)) via diag(S~^-2)."""
        e = self.engine
        d2 = 1.0 / (self.c * self.c)
        if e.m:
            self._ensure_Y()
            Y = self._Y
            d2 = d2 + 2.0 * np.einsum("ij,ij->i", Y, Y) / self.c
            d2 = d2 + np.einsum("ij,ij->i", Y @ (Y.T @ Y), Y)
        return float(e.lamR @ d2), float(e.lamC @ d2)


class _SpectralEngine:
    """Problem-level precomputation for exact selection math.

    Eigendecomposes both Laplacians once and stores the missing coordinates
    of Q^T as the orthonormal block U. Everything gamma-dependent lives in
    :class:`_WoodburyFactor`.
    """

    def __init__(self, p):
        n, q = p.n, p.p
        k = n * q
        if k > SPECTRAL_CAP:
            raise ValueError(
                f"{k} unknowns exceed the exact-evaluation cap {SPECTRAL_CAP}; "
                "use hutchinson mode with a direct or pcg solver")
        self.n, self.q = n, q
        lam_r, Q_r = np.linalg.eigh(p.L_r.toarray())
        lam_c, Q_c = np.linalg.eigh(p.L_c.toarray())
        self.Q_r, self.Q_c = Q_r, Q_c
        # pair (a, b) sits at l = a + n*b, matching column-major vec order
        self.lamR = np.tile(np.maximum(lam_r, 0.0), q)
        self.lamC = np.repeat(np.maximum(lam_c, 0.0), n)
        mask_vec = vec(p.data.mask)
        miss = np.flatnonzero(~mask_vec)
        self.m = miss.size
        if self.m:
            ii = miss % n
            jj = miss // n
            self.U = (Q_c[jj][:, :, None] * Q_r[ii][:, None, :]).reshape(self.m, k).T
        else:
            self.U = np.empty((k, 0))
        self.mask_vec = mask_vec
        self.x_vec = vec(p.data.masked_values())
        self.b_eigen = self.to_eigen(self.x_vec)
        self.n_obs = int(mask_vec.sum())

    def to_eigen(self, v):
        return vec(self.Q_r.T @ unvec(v, self.n, self.q) @ self.Q_c)

    def from_eigen(self, v):
        return vec(self.Q_r @ unvec(v, self.n, self.q) @ self.Q_c.T)

    def factor(self, params):
        return _WoodburyFactor(self, params)


_ENGINES = weakref.WeakKeyDictionary()


def _engine_for(p):
    eng = _ENGINES.get(p)
    if eng is None:
        eng = _SpectralEngine(p)
        _ENGINES[p] = eng
    return eng


def degrees_of_freedom_exact(op, cap=2000):
    """Oracle-scale exact df = tr(S^-1) via dense spectral decomposition.

    Stable at extreme penalties where explicit inversion loses digits.
    Raises AssumptionViolated when S is numerically singular, which is the
    operator-level signature of an uncovered patch.
    """
    k = op.shape[0]
    if k > cap:
        raise ValueError(f"{k} unknowns exceed dense oracle cap {cap}")
    w = np.linalg.eigvalsh(op.assemble_sparse().toarray())
    if w[0] <= w[-1] * k * np.finfo(float).eps * 10:
        raise AssumptionViolated("system is numerically singular; "
                                 "some patch has no observed entry")
    return float(np.sum(1.0 / w))


def hutchinson_trace(handle, probes):
    """Randomized trace estimate (1/N) sum w^T S^-1 w over the probe set."""
    results = handle.solve_many(list(probes.probes))
    samples = [float(w @ z) for w, (z, _) in zip(probes.probes, results)]
    return float(np.mean(samples))


@dataclass
class ObjectiveEvaluation:
    """One evaluation of the selection objective at fixed gamma.

    Caches the residual, solution, and probe solutions so the gradient can
    reuse them without re-solving; ``rss_floored`` marks a perfect fit whose
    log-likelihood term was clamped (descent treats such points as terminal).
    """

    gamma: PenaltyParams
    rss: float
    df: float
    bic: float
    aic: float
    mode: str
    n_solves: int
    rss_floored: bool = False
    residual: np.ndarray = field(default=None, repr=False)
    z: np.ndarray = field(default=None, repr=False)
    probe_solutions: np.ndarray = field(default=None, repr=False)
    _handle: object = field(default=None, repr=False)
    _aux_solution: np.ndarray = field(default=None, repr=False)


def _criteria(n_obs, rss, df):
    floored = rss < RSS_FLOOR
    rss_eff = max(rss, RSS_FLOOR)
    bic = n_obs * math.log(rss_eff) + math.log(n_obs) * df
    aic = n_obs * math.log(rss_eff) + 2.0 * df
    return bic, aic, floored


def _selection_handle(p, params, cfg):
    """Solve handle for selection: spectral engine by default, else solver."""
    k = p.n * p.p
    if cfg.method == "auto" and k <= SPECTRAL_CAP:
        return _engine_for(p).factor(params)
    return _solver.factorize(p.operator(params), cfg)


def evaluate_objective(p, params, mode="exact", probes=None, cfg=None):
    """Evaluate rss, df, BIC, and AIC at one penalty pair.

    exact mode performs one linear solve and computes df in closed form;
    hutchinson mode performs exactly N+1 solves (N probes plus the data
    right-hand side) against a single factorization.
    """
    _require_assumption(p)
    params = params if isinstance(params, PenaltyParams) else PenaltyParams(*params)
    cfg = cfg or SolverConfig()
    n_obs = p.data.n_observed
    x = vec(p.data.masked_values())
    mask_vec = vec(p.data.mask)

    if mode == "exact":
        fac = _engine_for(p).factor(params)
        z, _ = fac.solve(x)
        df = fac.trace_inv()
        handle = fac
        z_probes = None
        n_solves = 1
    elif mode == "hutchinson":
        if probes is None:
            probes = ProbeSet.draw(p.n * p.p, 5, 0)
        handle = _selection_handle(p, params, cfg)
        z, _ = handle.solve(x)
        z_probes = np.empty_like(probes.probes)
        for i, w in enumerate(probes.probes):
            z_probes[i], _ = handle.solve(w)
        df = float(np.mean(np.einsum("ij,ij->i", probes.probes, z_probes)))
        n_solves = 1 + probes.n_probes
    else:
        raise ValueError(f"unknown mode {mode!r}")

    r = np.where(mask_vec, z - x, 0.0)
    rss = float(r @ r)
    bic, aic, floored = _criteria(n_obs, rss, df)
    return ObjectiveEvaluation(params, rss, df, bic, aic, mode, n_solves,
                               floored, r, z, z_probes, handle)


def _kron_r(p, v):
    return vec(p.L_r @ unvec(v, p.n, p.p))


def _kron_c(p, v):
    return vec(unvec(v, p.n, p.p) @ p.L_c)


def gradient(p, evaluation, cfg=None):
    """Analytic BIC gradient (d/d_gamma_r, d/d_gamma_c) at an evaluation.

    Uses one additional solve v = S^-1 r (reused from the evaluation when
    already present). The data term is -(2|Omega|/rss) z^T K v; the trace
    term is exact in exact mode and the fixed-probe average
    (1/N) sum z_k^T K z_k in hutchinson mode, making the result the exact
    gradient of the fixed-probe surrogate.
    """
    ev = evaluation
    if ev.rss_floored:
        raise GradientUndefined("residual is zero; log(rss) has no gradient")
    handle = ev._handle
    if handle is None:
        raise ValueError("evaluation carries no solve handle")
    if ev._aux_solution is None:
        ev._aux_solution, _ = handle.solve(ev.residual)
        ev.n_solves += 1
    v = ev._aux_solution
    n_obs = p.data.n_observed
    scale = -2.0 * n_obs / ev.rss
    data_r = scale * float(ev.z @ _kron_r(p, v))
    data_c = scale * float(ev.z @ _kron_c(p, v))
    if ev.mode == "exact":
        tr_r, tr_c = handle.grad_traces()
    else:
        Zk = ev.probe_solutions
        tr_r = float(np.mean([zk @ _kron_r(p, zk) for zk in Zk]))
        tr_c = float(np.mean([zk @ _kron_c(p, zk) for zk in Zk]))
    log_n = math.log(n_obs)
    return (data_r - log_n * tr_r, data_c - log_n * tr_c)


@dataclass(frozen=True)
class IterateRecord:
    gamma: tuple
    bic: float
    grad_inf: float
    solves: int
    wall: float


@dataclass
class SelectionTrace:
    """Accepted-iterate history of one descent run, plus audit counters."""

    iterates: list
    status: str
    n_evaluations: int
    total_solves: int
    mode: str


@dataclass
class ImsConfig:
    max_iters: int = 200
    grad_tol: float = 1e-5  # inf-norm of the log-scale gradient
    memory: int = 10
    armijo_c1: float = 1e-4
    armijo_shrink: float = 0.5
    max_backtracks: int = 40
    n_probes: int = 5


def _two_loop(g, history):
    q = g.copy()
    alphas = []
    for s, y, rho in reversed(history):
        a = rho * float(s @ q)
        alphas.append(a)
        q -= a * y
    if history:
        s, y, _ = history[-1]
        q *= float(s @ y) / float(y @ y)
    for (s, y, rho), a in zip(history, reversed(alphas)):
        b = rho * float(y @ q)
        q += s * (a - b)
    return q


def ims(p, init_gamma=(1.0, 1.0), mode="exact", cfg=None, probes=None, seed=0,
        solver_cfg=None):
    """Iterative model selection: quasi-Newton BIC descent in log-gamma.

    Limited-memory BFGS directions with Armijo backtracking. In hutchinson
    mode the probe set is drawn once (or passed in) and held fixed, and the
    gradient is computed alongside every objective evaluation on the same
    factorization, so audited solves equal (N+2) per evaluation.

    Iterates are clamped to |log gamma| <= 60 so that problems whose BIC
    keeps improving as gamma diverges (no finite minimizer) end with a
    line-search failure at the box edge instead of overflowing. A trial
    step whose system rounds to numerically singular (gamma so extreme
    that factorization fails) is rejected and the step shrunk; only the
    starting point is required to be factorizable. Near minima that are
    flat to the bic's float resolution (the bic sits in the thousands, so
    its ulp can dwarf the decrease grad_tol asks for) equal-bic steps are
    still accepted while the gradient norm keeps falling; an accepted
    step that lowers neither the bic nor the gradient ends the run as
    line_search_failure instead of spinning until max_iters.

    Returns (selected PenaltyParams, SelectionTrace).
    """
    cfg = cfg or ImsConfig()
    solver_cfg = solver_cfg or SolverConfig()
    if mode == "hutchinson" and probes is None:
        probes = ProbeSet.draw(p.n * p.p, cfg.n_probes, substream(seed, "probes"))
    t0 = time.perf_counter()
    counters = {"evals": 0, "solves": 0}

    def eval_at(eta):
        params = PenaltyParams(*np.exp(eta))
        ev = evaluate_objective(p, params, mode, probes, solver_cfg)
        counters["evals"] += 1
        g = None
        if mode == "hutchinson" and not ev.rss_floored:
            # joint f+g: one extra solve per evaluation keeps the cost
            # accounting at exactly N+2 solves per evaluation round
            g = np.array(gradient(p, ev, solver_cfg))
        counters["solves"] += ev.n_solves
        return ev, g

    def log_grad(ev, g_gamma, eta):
        if g_gamma is None:
            g_gamma = np.array(gradient(p, ev, solver_cfg))
            counters["solves"] += 1
        return np.exp(eta) * g_gamma  # chain rule to eta coordinates

    eta = np.clip(np.log(np.asarray(init_gamma, dtype=np.float64)),
                  -ETA_BOUND, ETA_BOUND)
    records = []

    def record(ev, grad_inf):
        records.append(IterateRecord(ev.gamma.as_tuple(), ev.bic, grad_inf,
                                     counters["solves"],
                                     time.perf_counter() - t0))

    def finish(status):
        return PenaltyParams(*np.exp(eta)), SelectionTrace(
            records, status, counters["evals"], counters["solves"], mode)

    ev, g_joint = eval_at(eta)
    if ev.rss_floored:
        record(ev, float("nan"))
        return finish("converged")
    g = log_grad(ev, g_joint, eta)
    record(ev, float(np.max(np.abs(g))))
    if np.max(np.abs(g)) <= cfg.grad_tol:
        return finish("converged")

    history = []
    for _ in range(cfg.max_iters):
        d = -_two_loop(g, history)
        dd = float(g @ d)
        scaled = bool(history)
        if dd >= 0.0:
            d = -g
            dd = -float(g @ g)
            scaled = False
        # raw gradient directions carry no curvature scale; start the
        # search at a unit move instead of burning backtracks from huge
        # trial gammas (Nocedal-Wright first-step rule)
        step = 1.0 if scaled else min(1.0, 1.0 / float(np.max(np.abs(d))))
        accepted = None
        for _bt in range(cfg.max_backtracks + 1):
            eta_try = np.clip(eta + step * d, -ETA_BOUND, ETA_BOUND)
            try:
                ev_try, g_try = eval_at(eta_try)
            except NotPositiveDefinite:
                # extreme trial gamma rounds S to singular; treat like a
                # failed Armijo step and shrink back toward the iterate
                step *= cfg.armijo_shrink
                continue
            if ev_try.rss_floored or \
                    ev_try.bic <= ev.bic + cfg.armijo_c1 * step * dd:
                accepted = (eta_try, ev_try, g_try)
                break
            step *= cfg.armijo_shrink
        if accepted is None:
            return finish("line_search_failure")
        eta_new, ev_new, g_joint_new = accepted
        if np.array_equal(eta_new, eta):
            # the Armijo threshold underflowed at a point stationary to
            # machine precision and the search accepted a null move; no
            # progress is representable, so stop at the current iterate
            return finish("line_search_failure")
        if ev_new.rss_floored:
            eta = eta_new
            record(ev_new, float("nan"))
            return finish("converged")
        g_new = log_grad(ev_new, g_joint_new, eta_new)
        s = eta_new - eta
        yv = g_new - g
        sy = float(s @ yv)
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(yv):
            history.append((s, yv, 1.0 / sy))
            if len(history) > cfg.memory:
                history.pop(0)
        # near flat-to-ulp minima Armijo accepts equal-bic micro-moves;
        # those are fine while the gradient certificate keeps shrinking,
        # but an iterate improving neither quantity cannot make progress
        stalled = ev_new.bic >= ev.bic and \
            float(np.max(np.abs(g_new))) >= float(np.max(np.abs(g)))
        eta, ev, g = eta_new, ev_new, g_new
        record(ev, float(np.max(np.abs(g))))
        if np.max(np.abs(g)) <= cfg.grad_tol:
            return finish("converged")
        if stalled:
            return finish("line_search_failure")
    return finish("max_iters")


def _grid_values(n_points, exponent_range):
    lo, hi = exponent_range
    return np.exp(np.linspace(lo, hi, n_points))


def grid_search(p, objective="bic_exact", n_r=50, n_c=None,
                exponent_range=(-9.0, 1.0), cfg=None, probes=None, seed=0,
                folds=5, threads=1):
    """Evaluate the objective at every point of a log-spaced gamma grid.

    objective is one of bic_exact, bic_hutchinson (fixed probes across the
    whole grid), or cv (mean held-out MSE). Per-point failures are recorded
    as +inf with a warning. Returns (argmin PenaltyParams, surface) with
    rows indexing gamma_r and columns gamma_c; ties break to the lowest
    row-major index.
    """
    if n_c is None:
        n_c = n_r
    if n_r < 2 or n_c < 2:
        raise ValueError("grid needs at least 2 points per axis")
    if objective not in ("bic_exact", "bic_hutchinson", "cv"):
        raise ValueError(f"unknown objective {objective!r}")
    cfg = cfg or SolverConfig()
    if objective == "bic_hutchinson" and probes is None:
        probes = ProbeSet.draw(p.n * p.p, 5, substream(seed, "probes"))
    gr_vals = _grid_values(n_r, exponent_range)
    gc_vals = _grid_values(n_c, exponent_range)

    if threads > 1:
        from concurrent.futures import ProcessPoolExecutor
        rows = [(p, objective, gr_vals[i], gc_vals, cfg, probes, seed, folds)
                for i in range(n_r)]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            surface = np.vstack(list(pool.map(_grid_row, rows)))
    else:
        surface = np.vstack([
            _grid_row((p, objective, gr_vals[i], gc_vals, cfg, probes, seed, folds))
            for i in range(n_r)])

    flat = np.argmin(surface)  # row-major argmin = lowest-index tie-break
    i, j = divmod(int(flat), n_c)
    return PenaltyParams(gr_vals[i], gc_vals[j]), surface


def _grid_row(args):
    p, objective, gr, gc_vals, cfg, probes, seed, folds = args
    out = np.empty(gc_vals.size)
    for j, gc in enumerate(gc_vals):
        try:
            if objective == "cv":
                out[j] = cross_validate(p, (gr, gc), folds, seed, cfg)
            else:
                mode = "exact" if objective == "bic_exact" else "hutchinson"
                out[j] = evaluate_objective(p, (gr, gc), mode, probes, cfg).bic
        except (BmcError, np.linalg.LinAlgError) as exc:
            warnings.warn(f"grid point ({gr:g}, {gc:g}) failed: {exc}",
                          RuntimeWarning)
            out[j] = np.inf
    return out


def cross_validate(p, params, folds=5, seed=0, cfg=None):
    """Mean held-out squared error over a random K-fold split of Omega.

    Folds that break patch coverage trigger a deterministic reshuffle (up to
    20 attempts) before giving up with FoldInfeasible.
    """
    params = params if isinstance(params, PenaltyParams) else PenaltyParams(*params)
    n_obs = p.data.n_observed
    if folds < 2:
        raise ValueError("folds must be >= 2")
    if folds > n_obs:
        raise ValueError(f"cannot split {n_obs} observations into {folds} folds")
    _require_assumption(p)
    mask_vec = vec(p.data.mask)
    obs = np.flatnonzero(mask_vec)

    chosen = None
    for attempt in range(20):
        rng = substream(seed, "folds", attempt)
        parts = np.array_split(rng.permutation(obs), folds)
        trainers = []
        for part in parts:
            tm = mask_vec.copy()
            tm[part] = False
            prob = BmcProblem(
                ObservedMatrix(p.data.values, unvec(tm, p.n, p.p)),
                p.row_graph, p.col_graph)
            if not check_assumption(prob).holds:
                trainers = None
                break
            trainers.append((part, prob))
        if trainers is not None:
            chosen = trainers
            break
    if chosen is None:
        raise FoldInfeasible(
            "no shuffle produced feasible training folds in 20 attempts")

    x = vec(p.data.masked_values())
    fold_mse = []
    for part, prob in chosen:
        Z = complete(prob, params, cfg).estimate
        err = vec(Z)[part] - x[part]
        fold_mse.append(float(np.mean(err * err)))
    return float(np.mean(fold_mse))
