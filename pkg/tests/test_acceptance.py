"""End-to-end acceptance checks, one test per shipped guarantee.

Each test pins its tolerance and asserts its own wall-clock budget, so a
plain ``pytest -v tests/test_acceptance.py`` reads as a pass/fail line per
guarantee.
"""

import math
import time

import numpy as np
import pytest

from bmc import (BmcProblem, ObservedMatrix, NotPositiveDefinite, ProbeSet,
                 SolveCounter, SolverConfig, block_weights, check_assumption,
                 complete, degrees_of_freedom_exact, evaluate_objective,
                 factorize, gradient, grid_search, ims, sample_count_for,
                 vec)
from bmc.simulate import CheckerboardSpec, Method, generate, run_comparison, summarize

from conftest import (brute_patch_counts_oracle, brute_patch_means_oracle,
                      checkerboard_problem, dense_system_oracle, random_graph,
                      random_mask, random_problem, warshall_components_oracle)


def test_criterion_1_exact_recovery(rng):
    t0 = time.perf_counter()
    X, prob = checkerboard_problem(rng, [10, 10], [10, 10],
                                   [[10.0, -25.0], [25.0, -10.0]],
                                   noise_sd=0.0, missing_fraction=0.5,
                                   cross_weight=0.0)
    norm_x = np.linalg.norm(X)
    for gr in (1e-3, 1.0, 1e3):
        for gc in (1e-3, 1.0, 1e3):
            Z = complete(prob, (gr, gc)).estimate
            assert np.linalg.norm(Z - X) / norm_x < 1e-6
    assert time.perf_counter() - t0 < 1.0


def test_criterion_2_limiting_solution(rng):
    t0 = time.perf_counter()
    M, prob = checkerboard_problem(rng, [10, 10], [10, 10],
                                   [[10.0, 2.0], [3.0, 8.0]],
                                   noise_sd=1.0, missing_fraction=0.3,
                                   cross_weight=1e-4)
    _, rlab = warshall_components_oracle(prob.row_graph)
    _, clab = warshall_components_oracle(prob.col_graph)
    patch = brute_patch_means_oracle(prob.data.values, prob.data.mask,
                                     rlab, clab)
    z_star = patch[rlab[:, None], clab[None, :]]
    norm_star = np.linalg.norm(z_star)
    dist = []
    for t in range(9):
        Z = complete(prob, (10.0 ** t, 10.0 ** t)).estimate
        dist.append(np.linalg.norm(Z - z_star))
    for a, b in zip(dist, dist[1:]):
        assert b <= a + 1e-9
    assert dist[8] < 1e-3 * norm_star
    assert time.perf_counter() - t0 < 5.0


def test_criterion_3_df_properties(rng):
    t0 = time.perf_counter()
    # lower bound and joint-ladder monotonicity on random instances
    for _ in range(4):
        prob = random_problem(rng, 12, 10, missing_fraction=0.35, p_edge=0.3)
        rc = warshall_components_oracle(prob.row_graph)[0] * \
            warshall_components_oracle(prob.col_graph)[0]
        ladder = [degrees_of_freedom_exact(prob.operator((g, 1.7 * g)))
                  for g in (1e-2, 1e-1, 1e0, 1e1, 1e2)]
        for df in ladder:
            assert df >= rc - 1e-8
        for a, b in zip(ladder, ladder[1:]):
            assert b <= a + 1e-9
    # gamma -> 1e10 pins df to the patch count on fully observed data
    row_g = block_weights([6, 6], cross=0.0)
    col_g = block_weights([5, 5], cross=0.0)
    data = ObservedMatrix(rng.standard_normal((12, 10)),
                          np.ones((12, 10), dtype=bool))
    prob = BmcProblem(data, row_g, col_g)
    df = degrees_of_freedom_exact(prob.operator((1e10, 1e10)))
    assert abs(df - 4.0) < 1e-3
    assert time.perf_counter() - t0 < 2.0


def test_criterion_4_gradient_fidelity(rng):
    t0 = time.perf_counter()
    checked = 0
    for n, p in ((5, 4), (6, 5), (4, 6)):
        prob = random_problem(rng, n, p, missing_fraction=0.3)
        for _ in range(5):
            gamma = np.exp(rng.uniform(-2.0, 2.0, size=2))
            ev = evaluate_objective(prob, tuple(gamma), mode="exact")
            got = gradient(prob, ev)
            for k in range(2):
                h = 1e-5 * gamma[k]
                lo, hi = gamma.copy(), gamma.copy()
                lo[k] -= h
                hi[k] += h
                fd = (evaluate_objective(prob, tuple(hi), mode="exact").bic
                      - evaluate_objective(prob, tuple(lo), mode="exact").bic) / (2 * h)
                assert abs(got[k] - fd) < 1e-4 * max(abs(fd), 1.0)
                checked += 1
    assert checked == 30  # 15 (instance, gamma) pairs x 2 partials
    assert time.perf_counter() - t0 < 5.0


def test_criterion_5_hutchinson_statistics(rng):
    t0 = time.perf_counter()
    prob = random_problem(rng, 5, 4, missing_fraction=0.25)
    S = dense_system_oracle(prob, 0.7, 1.3)
    Sinv = np.linalg.inv(S)
    exact = float(np.trace(Sinv))
    var_theory = 2.0 * (float(np.sum(Sinv * Sinv))
                        - float(np.sum(np.diag(Sinv) ** 2)))
    draws = ProbeSet.draw(20, 10_000, rng).probes
    samples = np.einsum("ij,jk,ik->i", draws, Sinv, draws)
    mean = float(samples.mean())
    var_emp = float(samples.var(ddof=1))
    se = math.sqrt(var_emp / 10_000)
    assert abs(mean - exact) < 4.0 * se
    assert abs(var_emp - var_theory) < 0.10 * var_theory
    assert sample_count_for(1.0, 2.0 / math.e) == 6
    assert time.perf_counter() - t0 < 10.0


def _flagship_problem(f, seed):
    spec = CheckerboardSpec(row_blocks=[25, 25], col_blocks=[25, 25],
                            means=[[10.0, -25.0], [25.0, -10.0]],
                            noise_sd=1.0, missing_fraction=f, seed=seed)
    M, obs = generate(spec)
    return M, BmcProblem(obs, block_weights([25, 25]), block_weights([25, 25]))


def test_criterion_6_ims_vs_grid_economy():
    t0 = time.perf_counter()
    M, prob = _flagship_problem(0.1, seed=17)
    with SolveCounter() as ims_counter:
        params, trace = ims(prob)
    assert trace.status == "converged"
    assert len(trace.iterates) - 1 <= 50
    with SolveCounter() as grid_counter:
        grid_params, surface = grid_search(prob, "bic_exact", 50)
    assert trace.iterates[-1].bic <= float(surface.min()) + 1e-6
    assert ims_counter.count < 0.05 * grid_counter.count
    assert time.perf_counter() - t0 < 300.0


def test_criterion_7_hutchinson_ims_quality():
    t0 = time.perf_counter()
    methods = [Method.parse("ims_exact"), Method.parse("ims_hutchinson(5)")]
    for f in (0.1, 0.3, 0.5):
        spec = CheckerboardSpec(row_blocks=[25, 25], col_blocks=[25, 25],
                                means=[[10.0, -25.0], [25.0, -10.0]],
                                noise_sd=1.0, missing_fraction=f)
        summ = summarize(run_comparison(spec, methods, replicates=10,
                                        master_seed=7))
        exact = summ["ims_exact"]
        hutch = summ["ims_hutchinson(5)"]
        ratio = hutch["mse_missing"]["mean"] / exact["mse_missing"]["mean"]
        assert abs(ratio - 1.0) <= 0.10
        assert hutch["wall_seconds"]["mean"] < exact["wall_seconds"]["mean"]
    assert time.perf_counter() - t0 < 900.0


def test_criterion_8_checker_correctness(rng):
    t0 = time.perf_counter()
    n_held = n_violated = 0
    for _ in range(200):
        n = int(rng.integers(2, 16))
        p = int(rng.integers(2, 13))
        row_g = random_graph(rng, n, p_edge=float(rng.uniform(0.05, 0.5)))
        col_g = random_graph(rng, p, p_edge=float(rng.uniform(0.05, 0.5)))
        mask = random_mask(rng, n, p, float(rng.uniform(0.1, 0.8)))
        prob = BmcProblem(ObservedMatrix(rng.standard_normal((n, p)), mask),
                          row_g, col_g)
        counts = brute_patch_counts_oracle(mask,
                                           warshall_components_oracle(row_g)[1],
                                           warshall_components_oracle(col_g)[1])
        holds = bool(counts.min() > 0)
        assert check_assumption(prob).holds == holds
        op = prob.operator((1.0, 1.0))
        try:
            factorize(op)
            factorized = True
        except NotPositiveDefinite:
            factorized = False
        assert factorized == holds
        eig_min = float(np.linalg.eigvalsh(dense_system_oracle(prob, 1.0, 1.0)).min())
        if holds:
            n_held += 1
            assert eig_min > 0.0
        else:
            n_violated += 1
            assert abs(eig_min) < 1e-10
    assert n_held >= 20 and n_violated >= 20
    assert time.perf_counter() - t0 < 10.0


def test_criterion_9_solver_cross_validation(rng):
    t0 = time.perf_counter()
    pcg_cfg = SolverConfig(method="pcg", cg_rel_tol=1e-10)
    for _ in range(50):
        n = int(rng.integers(5, 41))
        p = int(rng.integers(4, 31))
        prob = random_problem(rng, n, p, missing_fraction=0.3, p_edge=0.3)
        gamma = tuple(np.exp(rng.uniform(-2.0, 2.0, size=2)))
        op = prob.operator(gamma)
        b = vec(prob.data.masked_values())
        z_d, rep_d = factorize(op, SolverConfig(method="direct")).solve(b)
        z_p, rep_p = factorize(op, pcg_cfg).solve(b)
        assert np.linalg.norm(z_d - z_p) / np.linalg.norm(z_d) < 1e-6
        S = dense_system_oracle(prob, *gamma)
        nb = np.linalg.norm(b)
        for z, rep in ((z_d, rep_d), (z_p, rep_p)):
            actual = float(np.linalg.norm(S @ z - b) / nb)
            assert abs(actual - rep.relative_residual) < 1e-12
        assert rep_p.relative_residual <= pcg_cfg.cg_rel_tol
    assert time.perf_counter() - t0 < 30.0
