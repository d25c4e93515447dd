"""Direct and preconditioned-CG solvers for the normal-equations system.

The direct path is a Cholesky-type factorization: dense LAPACK below a size
cap (the flagship graphs are complete, so S is effectively dense there, and
LAPACK detects indefiniteness exactly), sparse SuperLU in symmetric mode
above it. The iterative path is conjugate gradient with a no-fill incomplete
Cholesky preconditioner, with the breakdown -> diagonal-shift -> fallback
protocol. Factorization handles are reusable across many right-hand sides at
fixed penalties, which is what makes randomized trace estimation cheap.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from numba import njit
from scipy.sparse.linalg import splu

from .errors import MaxItersExceeded, NotPositiveDefinite
from .util import count_solve

__all__ = ["SolverConfig", "SolveReport", "factorize", "solve", "solve_many"]


@dataclass
class SolverConfig:
    """Solver selection and tolerances.

    method "auto" picks direct at or below auto_threshold unknowns and PCG
    above. Within the direct path, problems at or below dense_cap unknowns
    use dense LAPACK Cholesky, larger ones sparse LU with a fill-reducing
    ordering ("mmd") or natural ordering ("natural").
    """

    method: str = "auto"
    cg_rel_tol: float = 1e-8
    cg_max_iters: int = 0  # 0 -> 10*sqrt(np) + 200 at solve time
    ic_drop_tol: float = 0.0
    auto_threshold: int = 50_000
    dense_cap: int = 4096
    ordering: str = "mmd"

    def __post_init__(self):
        if self.method not in ("direct", "pcg", "auto"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.cg_rel_tol <= 0:
            raise ValueError("cg_rel_tol must be > 0")
        if self.auto_threshold < 1:
            raise ValueError("auto_threshold must be >= 1")
        if self.ordering not in ("mmd", "natural"):
            raise ValueError(f"unknown ordering {self.ordering!r}")

    def resolved_method(self, k):
        if self.method == "auto":
            return "direct" if k <= self.auto_threshold else "pcg"
        return self.method

    def max_iters_for(self, k):
        return self.cg_max_iters or int(10 * math.sqrt(k)) + 200


@dataclass
class SolveReport:
    method: str
    iterations: int
    relative_residual: float
    factorization_reused: bool


def _relative_residual(op, z, b):
    nb = np.linalg.norm(b)
    if nb == 0.0:
        return 0.0
    return float(np.linalg.norm(op.apply(z) - b) / nb)


class _DirectFactor:
    """Dense-Cholesky or sparse-LU handle; immutable once built."""

    method = "direct"

    def __init__(self, op, cfg):
        self.op = op
        self.solve_count = 0
        k = op.shape[0]
        self._dense = k <= cfg.dense_cap
        S = op.assemble_sparse()
        if self._dense:
            Sd = S.toarray()
            try:
                self._cho = sla.cho_factor(Sd, lower=True)
            except np.linalg.LinAlgError as e:
                raise NotPositiveDefinite(str(e)) from e
            # exactly singular inputs can round to a tiny positive pivot
            piv = np.diag(self._cho[0]) ** 2
            floor = k * np.finfo(float).eps * Sd.diagonal().max()
            if piv.min() <= floor:
                raise NotPositiveDefinite("numerically singular pivot in Cholesky")
        else:
            perm = "NATURAL" if cfg.ordering == "natural" else "MMD_AT_PLUS_A"
            try:
                self._lu = splu(S.tocsc(), permc_spec=perm, diag_pivot_thresh=0.0,
                                options=dict(SymmetricMode=True))
            except RuntimeError as e:
                if "singular" in str(e).lower():
                    raise NotPositiveDefinite(str(e)) from e
                raise
            du = self._lu.U.diagonal()
            if du.min() <= du.max() * k * np.finfo(float).eps * 100:
                raise NotPositiveDefinite("nonpositive or vanishing pivot in LU")

    def solve(self, b):
        b = np.asarray(b, dtype=np.float64)
        reused = self.solve_count > 0
        if self._dense:
            z = sla.cho_solve(self._cho, b)
        else:
            z = self._lu.solve(b)
        self.solve_count += 1
        count_solve()
        report = SolveReport("direct", 0, _relative_residual(self.op, z, b), reused)
        return z, report

    def solve_many(self, B):
        # looped on purpose: results must be elementwise identical to
        # repeated solve, and blocked multi-RHS BLAS rounds differently
        return [self.solve(b) for b in B]


@njit(cache=True)
def _ic0(n, indptr, indices, data):
    """In-place no-fill incomplete Cholesky of a lower-triangular CSC matrix.

    Each column must store its diagonal first (sorted row indices). Returns
    -1 on success, else the column where a nonpositive pivot broke it down.
    """
    for col in range(n):
        start = indptr[col]
        end = indptr[col + 1]
        if end == start or indices[start] != col:
            return col
        d = data[start]
        if d <= 0.0:
            return col
        d = math.sqrt(d)
        data[start] = d
        for t in range(start + 1, end):
            data[t] /= d
        for t in range(start + 1, end):
            j = indices[t]
            ljc = data[t]
            u = t
            v = indptr[j]
            jend = indptr[j + 1]
            while u < end and v < jend:
                ri = indices[u]
                rj = indices[v]
                if ri == rj:
                    data[v] -= ljc * data[u]
                    u += 1
                    v += 1
                elif ri < rj:
                    u += 1
                else:
                    v += 1
    return -1


@njit(cache=True)
def _lower_solve(n, indptr, indices, data, b):
    y = b.copy()
    for col in range(n):
        start = indptr[col]
        y[col] /= data[start]
        yc = y[col]
        for t in range(start + 1, indptr[col + 1]):
            y[indices[t]] -= data[t] * yc
    return y


@njit(cache=True)
def _upper_solve(n, indptr, indices, data, y):
    x = y.copy()
    for col in range(n - 1, -1, -1):
        start = indptr[col]
        s = x[col]
        for t in range(start + 1, indptr[col + 1]):
            s -= data[t] * x[indices[t]]
        x[col] = s / data[start]
    return x


def _build_ic_preconditioner(S, drop_tol):
    """IC(0), retried with growing diagonal shifts on breakdown; None means
    no preconditioner."""
    k = S.shape[0]
    diag = S.diagonal()
    strict = sp.tril(S, k=-1).tocoo()
    if drop_tol > 0:
        scale = np.sqrt(np.maximum(diag[strict.row] * diag[strict.col], 0.0))
        keep = np.abs(strict.data) > drop_tol * scale
        strict = sp.coo_matrix(
            (strict.data[keep], (strict.row[keep], strict.col[keep])), shape=(k, k))
    base = (sp.coo_matrix((diag, (np.arange(k), np.arange(k))), shape=(k, k))
            + strict).tocsc()
    base.sort_indices()
    diag_pos = base.indptr[:-1]  # diagonal is first in each column by sortedness
    if not np.array_equal(base.indices[diag_pos], np.arange(k)):
        warnings.warn("system diagonal not fully stored; "
                      "continuing with unpreconditioned CG", RuntimeWarning)
        return None

    alpha = 0.0
    for attempt in range(9):  # unshifted try + 8 shifted retries
        L = base.copy()
        if alpha > 0.0:
            L.data[diag_pos] = diag * (1.0 + alpha)
        fail_col = _ic0(k, L.indptr, L.indices, L.data)
        if fail_col < 0:
            return L
        alpha = 1e-3 if alpha == 0.0 else alpha * 2.0
    warnings.warn("incomplete Cholesky broke down after shift retries; "
                  "continuing with unpreconditioned CG", RuntimeWarning)
    return None


class _PcgHandle:
    """Reusable CG context: assembled preconditioner, matrix-free matvec."""

    method = "pcg"

    def __init__(self, op, cfg):
        self.op = op
        self.cfg = cfg
        self.solve_count = 0
        self._L = _build_ic_preconditioner(op.assemble_sparse(), cfg.ic_drop_tol)

    def _precondition(self, r):
        if self._L is None:
            return r
        k = self.op.shape[0]
        y = _lower_solve(k, self._L.indptr, self._L.indices, self._L.data, r)
        return _upper_solve(k, self._L.indptr, self._L.indices, self._L.data, y)

    def solve(self, b):
        b = np.asarray(b, dtype=np.float64)
        reused = self.solve_count > 0
        k = self.op.shape[0]
        tol = self.cfg.cg_rel_tol
        max_iters = self.cfg.max_iters_for(k)
        nb = np.linalg.norm(b)
        if nb == 0.0:
            self.solve_count += 1
            count_solve()
            return np.zeros(k), SolveReport("pcg", 0, 0.0, reused)
        x = np.zeros(k)  # cold start by design; no warm starts across gammas
        r = b.copy()
        z = self._precondition(r)
        p = z.copy()
        rz = float(r @ z)
        iters = 0
        while True:
            if np.linalg.norm(r) <= tol * nb:
                # recurrence residual can drift; trust only the true one
                r = b - self.op.apply(x)
                if np.linalg.norm(r) <= tol * nb:
                    break
                z = self._precondition(r)
                p = z.copy()
                rz = float(r @ z)
            if iters >= max_iters:
                raise MaxItersExceeded(
                    f"PCG did not reach {tol:g} in {max_iters} iterations")
            q = self.op.apply(p)
            alpha = rz / float(p @ q)
            x += alpha * p
            r -= alpha * q
            z = self._precondition(r)
            rz_new = float(r @ z)
            p = z + (rz_new / rz) * p
            rz = rz_new
            iters += 1
        self.solve_count += 1
        count_solve()
        report = SolveReport("pcg", iters, _relative_residual(self.op, x, b), reused)
        return x, report

    def solve_many(self, B):
        return [self.solve(b) for b in B]


def factorize(op, cfg=None):
    """Prepare a reusable solve handle for S at fixed penalties.

    Direct methods factorize; PCG builds its preconditioner once. Raises
    NotPositiveDefinite when S is singular or indefinite, which is exactly
    the observable signature of a violated coverage assumption.
    """
    cfg = cfg or SolverConfig()
    if cfg.resolved_method(op.shape[0]) == "direct":
        return _DirectFactor(op, cfg)
    return _PcgHandle(op, cfg)


def solve(target, b, cfg=None):
    """Solve S z = b. ``target`` is a handle from :func:`factorize` or a
    SystemOperator (a fresh handle is then built from ``cfg``)."""
    if hasattr(target, "solve_count"):
        return target.solve(b)
    return factorize(target, cfg).solve(b)


def solve_many(target, B, cfg=None):
    """Solve one system for each right-hand side, amortizing the handle."""
    if hasattr(target, "solve_count"):
        return target.solve_many(B)
    return factorize(target, cfg).solve_many(B)
