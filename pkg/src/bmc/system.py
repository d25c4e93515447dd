"""The vectorized normal-equations operator for penalized completion.

With z = vec(Z) column-major (entry (i, j) at k = i + n*j), the stationarity
condition of the penalized least-squares objective is S z = P_Omega x with

    S = P_Omega + gamma_r (I kron L_r) + gamma_c (L_c kron I).

S is applied matrix-free through the Kronecker identities
(I kron L_r) v = vec(L_r V) and (L_c kron I) v = vec(V L_c); it is assembled
sparse only for the direct solver / preconditioner, and never inverted
explicitly anywhere in the package.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import AssemblyCapExceeded
from .util import unvec, vec

__all__ = ["ObservedMatrix", "PenaltyParams", "SystemOperator", "project"]


@dataclass(frozen=True)
class ObservedMatrix:
    """Data values plus observation mask.

    ``values`` may hold anything (NaN included) at unobserved positions;
    all arithmetic goes through :meth:`masked_values`.
    """

    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        object.__setattr__(self, "mask", np.asarray(self.mask, dtype=bool))
        if self.values.ndim != 2 or self.values.shape != self.mask.shape:
            raise ValueError("values and mask must be 2-d arrays of equal shape")
        if not self.mask.any():
            raise ValueError("at least one entry must be observed")
        if not np.all(np.isfinite(self.values[self.mask])):
            raise ValueError("observed entries must be finite")

    @property
    def n_rows(self):
        return self.values.shape[0]

    @property
    def n_cols(self):
        return self.values.shape[1]

    @property
    def n_observed(self):
        return int(self.mask.sum())

    def masked_values(self):
        """Values with unobserved positions zeroed (safe for vector algebra)."""
        return np.where(self.mask, self.values, 0.0)


@dataclass(frozen=True)
class PenaltyParams:
    """Row/column smoothing strengths; both strictly positive."""

    gamma_r: float
    gamma_c: float

    def __post_init__(self):
        for name in ("gamma_r", "gamma_c"):
            v = float(getattr(self, name))
            object.__setattr__(self, name, v)
            if not np.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be finite and > 0")

    def as_tuple(self):
        return (self.gamma_r, self.gamma_c)


def project(mask, v):
    """Apply P_Omega: zero the unobserved coordinates of a length-np vector."""
    m = vec(np.asarray(mask, dtype=bool))
    v = np.asarray(v, dtype=np.float64)
    if v.shape != m.shape:
        raise ValueError("vector length does not match mask size")
    return np.where(m, v, 0.0)


class SystemOperator:
    """S = P_Omega + gamma_r (I kron L_r) + gamma_c (L_c kron I), size np x np."""

    def __init__(self, mask, L_r, L_c, params):
        self.mask = np.asarray(mask, dtype=bool)
        if self.mask.ndim != 2:
            raise ValueError("mask must be the n x p observation mask")
        self.n, self.p = self.mask.shape
        if L_r.shape != (self.n, self.n):
            raise ValueError("row Laplacian size does not match mask rows")
        if L_c.shape != (self.p, self.p):
            raise ValueError("column Laplacian size does not match mask columns")
        self.L_r = sp.csr_matrix(L_r)
        self.L_c = sp.csr_matrix(L_c)
        self.params = params
        self._mask_vec = vec(self.mask)

    @property
    def shape(self):
        k = self.n * self.p
        return (k, k)

    def apply(self, v):
        """Matrix-free S @ v via the Kronecker identities; O(nnz(L)*dim + np)."""
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.n * self.p,):
            raise ValueError("vector length must be n*p")
        V = unvec(v, self.n, self.p)
        out = np.where(self._mask_vec, v, 0.0)
        out += self.params.gamma_r * vec(self.L_r @ V)
        out += self.params.gamma_c * vec(V @ self.L_c)
        return out

    def assemble_sparse(self, cap=10**6):
        """Materialize S as sparse CSR; refuses above ``cap`` unknowns."""
        k = self.n * self.p
        if k > cap:
            raise AssemblyCapExceeded(f"{k} unknowns exceed assembly cap {cap}")
        S = sp.diags(self._mask_vec.astype(np.float64), format="csr")
        S = S + self.params.gamma_r * sp.kron(sp.eye(self.p), self.L_r, format="csr")
        S = S + self.params.gamma_c * sp.kron(self.L_c, sp.eye(self.n), format="csr")
        S.sort_indices()
        return S

    def rhs(self, data):
        """Right-hand side P_Omega x for the normal equations."""
        return vec(data.masked_values())
