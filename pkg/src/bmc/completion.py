"""The penalized completion estimator and its closed-form infinite-penalty limit.

A problem couples an observed matrix with row/column similarity graphs. When
every bicluster patch (one row component crossed with one column component)
contains at least one observation, the penalized least-squares estimate
exists, is unique, and tends to the patch-means matrix as both penalties
diverge. Estimation refuses to run when that coverage assumption fails,
because the solution set is then an affine subspace and any particular
member is arbitrary.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import solver as _solver
from .errors import AssumptionViolated
from .graph import build_incidence, build_laplacian, connected_components
from .system import ObservedMatrix, PenaltyParams, SystemOperator
from .util import unvec

__all__ = [
    "BmcProblem",
    "CompletedMatrix",
    "PatchMeans",
    "AssumptionCheck",
    "check_assumption",
    "complete",
    "patch_means",
    "limiting_solution",
    "penalty_value",
]


class BmcProblem:
    """Observed matrix plus row and column similarity graphs.

    Immutable; Laplacians, incidences, and component partitions are computed
    once and shared by every solve at any penalty value.
    """

    def __init__(self, data, row_graph, col_graph):
        if not isinstance(data, ObservedMatrix):
            raise TypeError("data must be an ObservedMatrix")
        if row_graph.n_vertices != data.n_rows:
            raise ValueError("row graph size does not match matrix rows")
        if col_graph.n_vertices != data.n_cols:
            raise ValueError("column graph size does not match matrix columns")
        self.data = data
        self.row_graph = row_graph
        self.col_graph = col_graph

    @property
    def n(self):
        return self.data.n_rows

    @property
    def p(self):
        return self.data.n_cols

    @cached_property
    def L_r(self):
        return build_laplacian(self.row_graph)

    @cached_property
    def L_c(self):
        return build_laplacian(self.col_graph)

    @cached_property
    def incidence_r(self):
        return build_incidence(self.row_graph)

    @cached_property
    def incidence_c(self):
        return build_incidence(self.col_graph)

    @cached_property
    def row_partition(self):
        return connected_components(self.row_graph)

    @cached_property
    def col_partition(self):
        return connected_components(self.col_graph)

    def operator(self, params):
        params = params if isinstance(params, PenaltyParams) else PenaltyParams(*params)
        return SystemOperator(self.data.mask, self.L_r, self.L_c, params)

    @cached_property
    def _patch_counts(self):
        rp, cp = self.row_partition, self.col_partition
        ii, jj = np.nonzero(self.data.mask)
        flat = rp.labels[ii] * cp.component_count + cp.labels[jj]
        counts = np.bincount(flat, minlength=rp.component_count * cp.component_count)
        return counts.reshape(rp.component_count, cp.component_count)


@dataclass(frozen=True)
class AssumptionCheck:
    """Result of the patch-coverage check; patch ids are 1-based."""

    holds: bool
    first_violation: tuple | None
    patch_counts: np.ndarray


@dataclass(frozen=True)
class CompletedMatrix:
    """Estimate plus the penalties and solve report that produced it.

    ``at_limit`` marks the closed-form infinite-penalty solution, which has
    no finite penalty parameters or solver involvement.
    """

    estimate: np.ndarray
    params: PenaltyParams | None
    report: object | None
    at_limit: bool = False


@dataclass(frozen=True)
class PatchMeans:
    """Observed mean and observation count for every bicluster patch."""

    means: np.ndarray
    counts: np.ndarray


def check_assumption(p):
    """Verify every patch A_r x B_c holds at least one observed entry.

    Runs in O(n + p + |Omega|) by bucketing observed indices into patches.
    Returns the 1-based id of the first empty patch (row-major order) when
    coverage fails.
    """
    counts = p._patch_counts
    empty = np.argwhere(counts == 0)
    if empty.size:
        r, c = empty[0]
        return AssumptionCheck(False, (int(r) + 1, int(c) + 1), counts)
    return AssumptionCheck(True, None, counts)


def _require_assumption(p):
    chk = check_assumption(p)
    if not chk.holds:
        raise AssumptionViolated(
            f"patch {chk.first_violation} has no observed entries; "
            "the estimate is not unique", patch=chk.first_violation)
    return chk


def complete(p, params, cfg=None):
    """Solve for the penalized estimate Z at fixed penalties.

    Parameters
    ----------
    p : BmcProblem
    params : PenaltyParams or (gamma_r, gamma_c)
    cfg : SolverConfig, optional

    Raises
    ------
    AssumptionViolated
        When some patch has no observation (infinitely many minimizers).
    """
    _require_assumption(p)
    params = params if isinstance(params, PenaltyParams) else PenaltyParams(*params)
    op = p.operator(params)
    z, report = _solver.solve(op, op.rhs(p.data), cfg)
    return CompletedMatrix(unvec(z, p.n, p.p), params, report)


def patch_means(p):
    """Mean of observed entries within every patch, compensated summation."""
    _require_assumption(p)
    rp, cp = p.row_partition, p.col_partition
    R, C = rp.component_count, cp.component_count
    means = np.zeros((R, C))
    counts = p._patch_counts
    X = p.data.values
    M = p.data.mask
    for r in range(R):
        rows = rp.supports[r]
        for c in range(C):
            cols = cp.supports[c]
            block = X[np.ix_(rows, cols)]
            sel = M[np.ix_(rows, cols)]
            means[r, c] = math.fsum(block[sel]) / counts[r, c]
    return PatchMeans(means, counts)


def limiting_solution(p):
    """Closed-form infinite-penalty estimate: patch means tiled over patches."""
    pm = patch_means(p)
    rp, cp = p.row_partition, p.col_partition
    Z = pm.means[rp.labels[:, None], cp.labels[None, :]]
    return CompletedMatrix(Z, None, None, at_limit=True)


def penalty_value(p, Z, params):
    """Smoothing penalty J(Z), evaluated through the incidence factorization.

    J = gamma_r/2 * ||Phi_r Z||_F^2 + gamma_c/2 * ||Z Phi_c^T||_F^2, which is
    nonnegative in floating point by construction.
    """
    params = params if isinstance(params, PenaltyParams) else PenaltyParams(*params)
    rz = p.incidence_r @ Z
    cz = Z @ p.incidence_c.T
    return 0.5 * params.gamma_r * float(np.sum(rz * rz)) \
        + 0.5 * params.gamma_c * float(np.sum(cz * cz))
