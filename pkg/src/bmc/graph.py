"""Weighted similarity graphs, their Laplacians, and k-nearest-neighbor sparsification.

Row and column similarity graphs drive the smoothing penalty: the Laplacian
kernel is spanned by connected-component indicators, so the graphs' component
structure determines what the estimator shrinks toward.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components as _cc

__all__ = [
    "WeightedGraph",
    "ComponentPartition",
    "build_laplacian",
    "build_incidence",
    "connected_components",
    "knn_sparsify",
    "weights_from_features",
]


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph with positive edge weights, stored once per pair.

    Parameters
    ----------
    n_vertices : int
        Number of vertices; vertex ids are 0-based.
    head, tail : ndarray of int
        Edge endpoints with head < tail elementwise.
    weight : ndarray of float
        Strictly positive weights (zero-weight edges are never stored, so
        connectivity is defined by stored edges alone).
    """

    n_vertices: int
    head: np.ndarray = field(default=None)
    tail: np.ndarray = field(default=None)
    weight: np.ndarray = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "head", np.asarray(
            self.head if self.head is not None else [], dtype=np.int64))
        object.__setattr__(self, "tail", np.asarray(
            self.tail if self.tail is not None else [], dtype=np.int64))
        object.__setattr__(self, "weight", np.asarray(
            self.weight if self.weight is not None else [], dtype=np.float64))
        if self.n_vertices < 1:
            raise ValueError("graph needs at least one vertex")
        if not (self.head.shape == self.tail.shape == self.weight.shape):
            raise ValueError("edge arrays must have matching length")
        if self.head.size:
            if self.head.min() < 0 or self.tail.max() >= self.n_vertices:
                raise ValueError("edge endpoint out of range")
            if np.any(self.head >= self.tail):
                raise ValueError("edges must satisfy head < tail (no self-loops)")
            if np.any(~np.isfinite(self.weight)) or np.any(self.weight <= 0):
                raise ValueError("edge weights must be finite and positive")
            key = self.head * self.n_vertices + self.tail
            if np.unique(key).size != key.size:
                raise ValueError("duplicate edge")

    @classmethod
    def from_edges(cls, n_vertices, edges):
        """Build from an iterable of (i, j, weight); zero weights are dropped."""
        head, tail, weight = [], [], []
        for i, j, w in edges:
            if w < 0:
                raise ValueError(f"negative weight on edge ({i}, {j})")
            if w == 0:
                continue
            if i == j:
                raise ValueError(f"self-loop on vertex {i}")
            a, b = (i, j) if i < j else (j, i)
            head.append(a)
            tail.append(b)
            weight.append(w)
        return cls(n_vertices, np.array(head, dtype=np.int64),
                   np.array(tail, dtype=np.int64), np.array(weight))

    @property
    def n_edges(self):
        return int(self.head.size)

    def adjacency(self):
        """Symmetric sparse adjacency matrix (CSR)."""
        n = self.n_vertices
        rows = np.concatenate([self.head, self.tail])
        cols = np.concatenate([self.tail, self.head])
        vals = np.concatenate([self.weight, self.weight])
        return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))

    def degrees(self):
        """Weighted degree of every vertex."""
        d = np.zeros(self.n_vertices)
        np.add.at(d, self.head, self.weight)
        np.add.at(d, self.tail, self.weight)
        return d


@dataclass(frozen=True)
class ComponentPartition:
    """Connected components of a graph: labels plus per-component vertex sets."""

    component_count: int
    labels: np.ndarray
    supports: tuple

    def indicator(self, r):
        """0/1 indicator vector of component ``r`` (0-based)."""
        chi = np.zeros(self.labels.size)
        chi[self.supports[r]] = 1.0
        return chi


def build_laplacian(g):
    """Graph Laplacian L = degree − adjacency as a canonical CSR matrix.

    Rows sum to zero and L is positive semidefinite with kernel spanned by
    the component indicators. Assembly is sorted by (row, col) so repeated
    builds serialize identically.
    """
    n = g.n_vertices
    rows = np.concatenate([g.head, g.tail, np.arange(n)])
    cols = np.concatenate([g.tail, g.head, np.arange(n)])
    vals = np.concatenate([-g.weight, -g.weight, g.degrees()])
    L = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    L.sort_indices()
    return L


def build_incidence(g):
    """Signed square-root-weight edge incidence Phi with Phi.T @ Phi = L.

    Row l has +sqrt(w_l) at the edge head (lower vertex id) and -sqrt(w_l)
    at the tail. The factorization gives a nonnegative-by-construction way
    to evaluate the smoothing penalty in floating point.
    """
    m = g.n_edges
    s = np.sqrt(g.weight)
    rows = np.repeat(np.arange(m), 2)
    cols = np.stack([g.head, g.tail], axis=1).reshape(-1)
    vals = np.stack([s, -s], axis=1).reshape(-1)
    Phi = sp.csr_matrix((vals, (rows, cols)), shape=(m, g.n_vertices))
    Phi.sort_indices()
    return Phi


def connected_components(g):
    """Partition vertices into connected components (stored edges only).

    Components are numbered in order of their first-encountered vertex, so
    labeling is deterministic.
    """
    count, labels = _cc(g.adjacency(), directed=False)
    supports = tuple(np.flatnonzero(labels == r) for r in range(count))
    return ComponentPartition(int(count), labels.astype(np.int64), supports)


def knn_sparsify(g, k):
    """Keep edge (i, j) iff j ranks in i's top-k neighbors or vice versa.

    Ranking per vertex is by weight descending; ties at the k-th rank keep
    the lower vertex index first. The union rule preserves symmetry in one
    pass and is idempotent.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = g.n_vertices
    # neighbor lists from the stored arrays
    nbr = [[] for _ in range(n)]
    for e in range(g.n_edges):
        i, j, w = int(g.head[e]), int(g.tail[e]), g.weight[e]
        nbr[i].append((j, w, e))
        nbr[j].append((i, w, e))
    keep = np.zeros(g.n_edges, dtype=bool)
    for i in range(n):
        if not nbr[i]:
            continue
        idx = np.array([t[0] for t in nbr[i]])
        wts = np.array([t[1] for t in nbr[i]])
        eid = np.array([t[2] for t in nbr[i]])
        order = np.lexsort((idx, -wts))  # weight desc, then lower index
        keep[eid[order[:k]]] = True
    return WeightedGraph(n, g.head[keep], g.tail[keep], g.weight[keep])


def weights_from_features(features, k):
    """Similarity graph from row features: exponentiated Pearson correlation.

    w_ij = exp(rho_ij) over all pairs, then :func:`knn_sparsify` with the
    given k. Rows with zero variance have undefined correlations and are
    rejected by index.

    Parameters
    ----------
    features : ndarray, shape (n, d)
        One feature row per graph vertex; d >= 2.
    k : int
        Neighbor count for sparsification.
    """
    F = np.asarray(features, dtype=np.float64)
    if F.ndim != 2 or F.shape[0] < 2:
        raise ValueError("features must be a 2-d array with at least two rows")
    sd = F.std(axis=1)
    dead = np.flatnonzero(sd == 0)
    if dead.size:
        raise ValueError(f"feature row {int(dead[0])} has zero variance")
    rho = np.corrcoef(F)
    n = F.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    g = WeightedGraph(n, iu, ju, np.exp(rho[iu, ju]))
    return knn_sparsify(g, k)
