"""Benchmark harness: data generation, method parsing, comparison runs."""

import math
import os

import numpy as np
import pytest

from bmc import (CheckerboardSpec, Method, block_weights,
                 connected_components, generate, run_comparison, summarize)


BLOCK_MEANS = [[10.0, -25.0], [25.0, -10.0]]


def small_spec(**kw):
    base = dict(row_blocks=(4, 4), col_blocks=(4, 4), means=BLOCK_MEANS,
                noise_sd=1.0, missing_fraction=0.2)
    base.update(kw)
    return CheckerboardSpec(**base)


# ------------------------------------------------------------------- spec

def test_spec_validation():
    with pytest.raises(ValueError):
        small_spec(means=[[1.0, 2.0]])  # shape mismatch
    with pytest.raises(ValueError):
        small_spec(noise_sd=-0.5)
    with pytest.raises(ValueError):
        small_spec(missing_fraction=1.0)
    with pytest.raises(ValueError):
        small_spec(missing_fraction=-0.1)
    with pytest.raises(ValueError):
        small_spec(cross_weight=-1.0)
    with pytest.raises(ValueError):
        CheckerboardSpec((1, 1), (1, 1), [[1.0, 2.0], [3.0, 4.0]],
                         missing_fraction=0.99)  # nothing left observed
    with pytest.raises(ValueError):
        small_spec(row_blocks=(4, 0))


def test_truth_tiles_block_means():
    M = small_spec().truth()
    assert M.shape == (8, 8)
    assert np.all(M[:4, :4] == 10.0)
    assert np.all(M[:4, 4:] == -25.0)
    assert np.all(M[4:, :4] == 25.0)
    assert np.all(M[4:, 4:] == -10.0)


# --------------------------------------------------------------- generate

def test_generate_noiseless_full_mask():
    spec = small_spec(noise_sd=0.0, missing_fraction=0.0)
    M, obs = generate(spec)
    assert np.array_equal(obs.values, M)
    assert obs.mask.all()


def test_generate_exact_missing_count():
    spec = CheckerboardSpec((25, 25), (25, 25), BLOCK_MEANS,
                            missing_fraction=0.5, seed=3)
    M, obs = generate(spec)
    assert obs.mask.size - obs.mask.sum() == 1250


def test_generate_noise_mean_clt():
    spec = CheckerboardSpec((500, 500), (500, 500),
                            [[1.0, 2.0], [3.0, 4.0]],
                            noise_sd=1.0, missing_fraction=0.0, seed=11)
    M, obs = generate(spec)
    assert abs(float(np.mean(obs.values - M))) < 4.0 / 1000.0


def test_generate_deterministic():
    a = generate(small_spec(seed=7))
    b = generate(small_spec(seed=7))
    c = generate(small_spec(seed=8))
    assert np.array_equal(a[1].values, b[1].values)
    assert np.array_equal(a[1].mask, b[1].mask)
    assert not np.array_equal(a[1].values, c[1].values)


def test_generate_noise_and_mask_streams_independent():
    # changing the missing fraction must not perturb the noise draw
    a = generate(small_spec(seed=7, missing_fraction=0.0))
    b = generate(small_spec(seed=7, missing_fraction=0.4))
    assert np.array_equal(a[1].values, b[1].values)


# ------------------------------------------------------------ block weights

def test_block_weights_flagship_values():
    g = block_weights([25, 25])
    A = g.adjacency().toarray()
    assert A[0, 1] == 1.0  # same block
    assert A[0, 25] == 0.001  # across blocks
    assert np.all(np.diag(A) == 0.0)
    assert connected_components(g).component_count == 1


def test_block_weights_zero_cross_splits():
    g = block_weights([3, 4, 2], cross=0.0)
    assert connected_components(g).component_count == 3


# ----------------------------------------------------------------- methods

def test_method_parse_forms():
    assert Method.parse("ims_exact") == Method("ims_exact")
    assert Method.parse("ims_hutchinson(7)") == Method("ims_hutchinson",
                                                       n_probes=7)
    assert Method.parse("grid_bic(10)") == Method("grid_bic", grid_points=10)
    assert Method.parse("grid_cv(10,3)") == Method("grid_cv", grid_points=10,
                                                   folds=3)
    assert Method.parse(" grid_cv( 10 , 3 ) ") == Method("grid_cv",
                                                         grid_points=10,
                                                         folds=3)
    assert Method.parse("grid_cv(10)").folds == 5


def test_method_label_round_trip():
    for m in (Method("ims_exact"), Method("ims_hutchinson", n_probes=3),
              Method("grid_bic", grid_points=12),
              Method("grid_cv", grid_points=8, folds=4)):
        assert Method.parse(m.label) == m


def test_method_rejects_unknown_kind():
    with pytest.raises(ValueError):
        Method.parse("simulated_annealing")
    with pytest.raises(ValueError):
        Method.parse("grid bic")
    with pytest.raises(ValueError):
        Method("gcv")


# ------------------------------------------------------------ run_comparison

def _strip_wall(results):
    # repr() keeps NaN bic values (grid_cv has no BIC) comparable
    return [(r.method, r.replicate, repr(r.gamma_r), repr(r.gamma_c),
             repr(r.bic), repr(r.mse_missing), repr(r.mse_observed),
             r.solve_count) for r in results]


def test_comparison_is_deterministic_up_to_wall_time():
    spec = small_spec(seed=0)
    kw = dict(methods=["ims_exact", "grid_bic(4)"], replicates=2,
              master_seed=3)
    a = run_comparison(spec, **kw)
    b = run_comparison(spec, **kw)
    assert _strip_wall(a) == _strip_wall(b)


def test_comparison_noiseless_recovers_missing_cells():
    spec = small_spec(noise_sd=0.0, cross_weight=0.0)
    results = run_comparison(spec, ["ims_exact", "grid_bic(4)"],
                             replicates=1, master_seed=1)
    for r in results:
        assert r.mse_missing < 1e-8
        assert r.mse_observed < 1e-8


def test_comparison_methods_share_realizations():
    # the same strategy listed twice must reproduce itself exactly: both
    # entries see one realization and one method seed
    spec = small_spec(seed=0)
    results = run_comparison(spec, ["grid_cv(4,3)", "grid_cv(4,3)"],
                             replicates=1, master_seed=5)
    a, b = results
    assert _strip_wall([a]) == _strip_wall([b])


def test_comparison_solve_count_ordering():
    # matched budgets: CV grid >= BIC grid >= IMS, and the BIC grid count
    # is exactly points + final refit
    spec = CheckerboardSpec((10, 10), (10, 10), BLOCK_MEANS,
                            noise_sd=1.0, missing_fraction=0.1)
    results = run_comparison(
        spec, ["grid_cv(5,3)", "grid_bic(5)", "ims_exact"],
        replicates=1, master_seed=2)
    by = {r.method: r for r in results}
    assert by["grid_bic(5)"].solve_count == 5 * 5 + 1
    assert by["grid_cv(5,3)"].solve_count >= by["grid_bic(5)"].solve_count
    assert by["grid_bic(5)"].solve_count >= by["ims_exact"].solve_count


def test_comparison_hutchinson_solves_follow_budget():
    spec = small_spec(seed=0)
    results = run_comparison(spec, ["ims_hutchinson(3)"], replicates=1,
                             master_seed=4)
    (r,) = results
    # (N+2) solves per evaluation round, plus one final refit
    assert (r.solve_count - 1) % (3 + 2) == 0
    assert r.solve_count > 1


def test_comparison_parallel_matches_serial():
    spec = small_spec(seed=0)
    kw = dict(methods=["grid_bic(3)"], replicates=2, master_seed=6)
    serial = run_comparison(spec, threads=1, **kw)
    parallel = run_comparison(spec, threads=2, **kw)
    assert _strip_wall(serial) == _strip_wall(parallel)


def test_comparison_writes_traces(tmp_path):
    spec = small_spec(seed=0)
    td = tmp_path / "traces"
    run_comparison(spec, ["ims_exact", "ims_hutchinson(3)", "grid_bic(3)"],
                   replicates=2, master_seed=1, trace_dir=str(td))
    names = sorted(os.listdir(td))
    assert names == ["ims_exact-rep0.csv", "ims_exact-rep1.csv",
                     "ims_hutchinson-3-rep0.csv", "ims_hutchinson-3-rep1.csv"]
    header = (td / "ims_exact-rep0.csv").read_text().splitlines()[0]
    assert header.split(",")[0] == "iterate"


def test_comparison_result_invariants():
    spec = small_spec(seed=0)
    results = run_comparison(spec, ["ims_exact"], replicates=3, master_seed=7)
    assert [r.replicate for r in results] == [0, 1, 2]
    for r in results:
        assert r.mse_missing >= 0.0
        assert r.mse_observed >= 0.0
        assert r.wall_seconds >= 0.0
        assert r.gamma_r > 0.0 and r.gamma_c > 0.0
        assert math.isfinite(r.bic)


# ---------------------------------------------------------------- summarize

def test_summarize_means_and_sds():
    spec = small_spec(seed=0)
    results = run_comparison(spec, ["ims_exact", "grid_bic(3)"],
                             replicates=2, master_seed=3)
    summary = summarize(results)
    assert set(summary) == {"ims_exact", "grid_bic(3)"}
    entry = summary["grid_bic(3)"]
    assert entry["replicates"] == 2
    rows = [r for r in results if r.method == "grid_bic(3)"]
    counts = [r.solve_count for r in rows]
    assert entry["solve_count"]["mean"] == pytest.approx(np.mean(counts))
    assert entry["solve_count"]["sd"] == pytest.approx(np.std(counts, ddof=1))
    for metric in ("wall_seconds", "mse_missing", "mse_observed"):
        assert set(entry[metric]) == {"mean", "sd"}
