"""Shared fixtures and independent oracles.

Oracles here deliberately avoid the library's own code paths: Laplacians are
assembled by edge loops, S by explicit np.kron, connectivity by Warshall
closure, and patch coverage by brute enumeration, so agreement is evidence
rather than tautology.
"""

import math

import numpy as np
import pytest

from bmc import BmcProblem, ObservedMatrix, WeightedGraph, vec


def dense_laplacian_oracle(g):
    """Edge-loop Laplacian: diagonal degree minus adjacency."""
    L = np.zeros((g.n_vertices, g.n_vertices))
    for i, j, w in zip(g.head, g.tail, g.weight):
        L[i, i] += w
        L[j, j] += w
        L[i, j] -= w
        L[j, i] -= w
    return L


def dense_system_oracle(p, gamma_r, gamma_c):
    """S = P_Omega + gamma_r (I kron L_r) + gamma_c (L_c kron I), by np.kron."""
    Lr = dense_laplacian_oracle(p.row_graph)
    Lc = dense_laplacian_oracle(p.col_graph)
    P = np.diag(vec(p.data.mask).astype(np.float64))
    return (P + gamma_r * np.kron(np.eye(p.p), Lr)
            + gamma_c * np.kron(Lc, np.eye(p.n)))


def dense_solve_oracle(p, gamma_r, gamma_c):
    S = dense_system_oracle(p, gamma_r, gamma_c)
    x = vec(p.data.masked_values())
    return np.linalg.solve(S, x)


def warshall_components_oracle(g):
    """Component labels via boolean transitive closure, O(n^3)."""
    n = g.n_vertices
    A = np.eye(n, dtype=bool)
    for i, j in zip(g.head, g.tail):
        A[i, j] = A[j, i] = True
    for k in range(n):
        A |= A[:, k][:, None] & A[k, :][None, :]
    labels = np.full(n, -1)
    nxt = 0
    for v in range(n):
        if labels[v] < 0:
            labels[A[v]] = nxt
            nxt += 1
    return nxt, labels


def brute_patch_counts_oracle(mask, row_labels, col_labels):
    R = int(row_labels.max()) + 1
    C = int(col_labels.max()) + 1
    counts = np.zeros((R, C), dtype=int)
    n, p = mask.shape
    for i in range(n):
        for j in range(p):
            if mask[i, j]:
                counts[row_labels[i], col_labels[j]] += 1
    return counts


def brute_patch_means_oracle(values, mask, row_labels, col_labels):
    counts = brute_patch_counts_oracle(mask, row_labels, col_labels)
    R, C = counts.shape
    sums = np.zeros((R, C))
    n, p = mask.shape
    for i in range(n):
        for j in range(p):
            if mask[i, j]:
                sums[row_labels[i], col_labels[j]] += values[i, j]
    return sums / counts


def random_graph(rng, n, p_edge=0.5, w_low=0.2, w_high=2.0):
    head, tail, weight = [], [], []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p_edge:
                head.append(i)
                tail.append(j)
                weight.append(rng.uniform(w_low, w_high))
    return WeightedGraph(n, np.array(head, dtype=np.int64),
                         np.array(tail, dtype=np.int64), np.array(weight))


def random_mask(rng, n, p, missing_fraction):
    k = n * p
    n_missing = math.ceil(missing_fraction * k)
    mask = np.ones(k, dtype=bool)
    if n_missing:
        mask[rng.choice(k, size=n_missing, replace=False)] = False
    return mask.reshape((n, p), order="F")


def random_problem(rng, n, p, missing_fraction=0.3, p_edge=0.5,
                   require_coverage=True, max_tries=200):
    """Random data/graphs/mask; resamples the mask until every patch is hit."""
    from bmc import check_assumption

    row_g = random_graph(rng, n, p_edge)
    col_g = random_graph(rng, p, p_edge)
    values = rng.standard_normal((n, p))
    for _ in range(max_tries):
        mask = random_mask(rng, n, p, missing_fraction)
        prob = BmcProblem(ObservedMatrix(values, mask), row_g, col_g)
        if not require_coverage or check_assumption(prob).holds:
            return prob
    raise RuntimeError("could not draw a coverage-satisfying mask")


def checkerboard_problem(rng, row_blocks, col_blocks, means, noise_sd,
                         missing_fraction, cross_weight=0.0, max_tries=200):
    """Block-constant instance with two-level block graphs.

    cross_weight=0 keeps one graph component per block (the exact-recovery
    regime); positive cross weights merge everything into one component.
    """
    from bmc import block_weights, check_assumption

    row_g = block_weights(row_blocks, cross=cross_weight)
    col_g = block_weights(col_blocks, cross=cross_weight)
    means = np.asarray(means, dtype=np.float64)
    rlab = np.repeat(np.arange(len(row_blocks)), row_blocks)
    clab = np.repeat(np.arange(len(col_blocks)), col_blocks)
    M = means[rlab[:, None], clab[None, :]]
    n, p = M.shape
    X = M + noise_sd * rng.standard_normal((n, p))
    for _ in range(max_tries):
        mask = random_mask(rng, n, p, missing_fraction)
        prob = BmcProblem(ObservedMatrix(X, mask), row_g, col_g)
        if check_assumption(prob).holds:
            return M, prob
    raise RuntimeError("could not draw a coverage-satisfying mask")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
