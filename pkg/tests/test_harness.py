import json
import math

import numpy as np
import pytest

from censcorr.correlation import NAIVE, pcc
from censcorr.harness import (
    BENCH_N_GRID,
    CellParseError,
    DataError,
    Dataset,
    MissingColumnError,
    all_positive_signs,
    benchmark_runtime,
    benchmark_table,
    benchmark_to_dict,
    censor,
    detection_limit,
    load_censored_pair,
    load_csv,
    read_censored_csv,
    run_experiment,
    run_trial,
    synth_generate,
)


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_load_csv_well_formed(tmp_path):
    ds = load_csv(write(tmp_path, "a,b,c\n1,2,3\n4,5,6\n"))
    assert (ds.n, ds.p) == (2, 3)
    assert ds.names == ("a", "b", "c")


def test_load_csv_missing_column(tmp_path):
    with pytest.raises(MissingColumnError, match="zz"):
        load_csv(write(tmp_path, "a,b,c\n1,2,3\n"), ["a", "zz"])


def test_load_csv_blank_cell_dropped(tmp_path):
    ds = load_csv(write(tmp_path, "a,b,c\n1,2,3\n4,,6\n7,8,9\n"))
    assert ds.n == 2
    assert ds.dropped_rows == 1


def test_load_csv_unparseable_reports_position(tmp_path):
    with pytest.raises(CellParseError) as info:
        load_csv(write(tmp_path, "a,b,c\n1,2,3\n4,x5,6\n"))
    assert info.value.row == 3 and info.value.column == "b"


def test_dataset_invariants():
    with pytest.raises(DataError):
        Dataset(("a", "b"), np.ones((3, 2)))
    with pytest.raises(DataError):
        Dataset(("a", "b", "c"), np.array([[1.0, np.nan, 2.0]]))


def test_censor_exact_count():
    rng = np.random.default_rng(0)
    vals = np.column_stack([rng.permutation(100), rng.permutation(100), rng.normal(size=100)]).astype(float)
    ds = Dataset(("a", "b", "s"), vals)
    data = censor(ds, "a", "b", 0.8)
    assert (~data.visible_a).sum() == 80 and (~data.visible_b).sum() == 80
    assert data.side_info.shape == (1, 100)
    near_zero = censor(ds, "a", "b", 1e-9)
    assert near_zero.visible_a.all()
    assert near_zero.theta_a <= vals[:, 0].min()


def test_censor_ties_and_rules():
    col = np.array([1, 2, 3, 3, 3, 3, 4, 5, 6, 7], float)
    ds = Dataset(("a", "b", "s"), np.column_stack([col, col[::-1], np.arange(10.0)]))
    data = censor(ds, "a", "b", 0.3)
    # quantile lands in the tie group of 3; strictly-below keeps the whole group
    assert (~data.visible_a).sum() == 2
    assert np.all(col[~data.visible_a] < data.theta_a)
    with pytest.raises(DataError):
        censor(Dataset(("a", "b", "s"), np.column_stack([np.ones(10), col, col])), "a", "b", 0.5)
    with pytest.raises(ValueError):
        censor(ds, "a", "b", 1.0)
    with pytest.raises(DataError):
        censor(ds, "a", "a", 0.5)


def test_censor_then_uncensor_reproduces_reference():
    ds = synth_generate(4, 50, 0.5, 1)
    data = censor(ds, "v1", "v2", 0.8)
    assert np.all(ds.column("v1")[~data.visible_a] < data.theta_a)
    assert np.all(ds.column("v1")[data.visible_a] >= data.theta_a)
    restored_a = np.where(data.visible_a, data.y_a, ds.column("v1"))
    restored_b = np.where(data.visible_b, data.y_b, ds.column("v2"))
    assert pcc(restored_a, restored_b) == pcc(ds.column("v1"), ds.column("v2"))


def test_detection_limit_rank():
    v = np.arange(10.0)
    assert detection_limit(v, 0.29) == 2.0
    assert detection_limit(v, 0.3) == 3.0


def test_run_trial_collapse_and_determinism():
    ds = synth_generate(5, 300, 0.6, 2)
    tr = run_trial(ds, "v1", "v2", 50, 1e-9, seed=3)
    assert all(e < 1e-10 for e in tr.errors.values())
    a = run_trial(ds, "v1", "v2", 50, 0.8, seed=4, sign_knowledge=all_positive_signs(ds.names))
    b = run_trial(ds, "v1", "v2", 50, 0.8, seed=4, sign_knowledge=all_positive_signs(ds.names))
    assert a.errors == b.errors and a.estimates == b.estimates and a.reference == b.reference
    assert all(e >= 0 for e in a.errors.values() if e is not None)
    with pytest.raises(DataError):
        run_trial(ds, "v1", "v2", 301, 0.8, 0)


def test_run_trial_records_missing_naive():
    # two rows out of ten survive in each series; with disjoint survivors the
    # naive estimate is unavailable but the trial still completes
    vals = np.array(
        [[0, 9, 1], [1, 8, 2], [2, 7, 3], [3, 6, 4], [4, 5, 5], [5, 4, 6], [6, 3, 7], [7, 2, 8], [8, 1, 9], [9, 0, 1]],
        float,
    )
    ds = Dataset(("a", "b", "s"), vals)
    tr = run_trial(ds, "a", "b", 10, 0.8, seed=0)
    assert tr.errors[NAIVE] is None
    assert NAIVE in tr.failures


def test_run_experiment_single_trial_and_report():
    ds = synth_generate(4, 200, 0.5, 5)
    rep = run_experiment(ds, [("v1", "v2"), ("v3", "v4")], n_sub=30, trials=1, base_seed=7)
    for pair in rep.pairs:
        for m in rep.methods:
            mean, std, k = rep.summary(pair, m)
            assert std == 0.0 and k == 1
            assert mean == [r for r in rep.results if r.pair == pair][0].errors[m]
    table = rep.to_table()
    assert "(0.000)" in table and "wins" in table
    doc = json.loads(rep.to_json())
    assert doc["config"]["n_sub"] == 30 and len(doc["results"]) == 2


def test_run_experiment_seeds_and_recompute():
    ds = synth_generate(4, 200, 0.5, 6)
    pairs = [("v1", "v2")]
    a = run_experiment(ds, pairs, n_sub=30, trials=3, base_seed=0)
    b = run_experiment(ds, pairs, n_sub=30, trials=3, base_seed=100)
    assert [r.seed for r in a.results] == [0, 1, 2]
    assert a.summary(pairs[0], NAIVE) != b.summary(pairs[0], NAIVE)
    assert len(a.results) == len(b.results)
    errs = np.array([r.errors["sym_tobit"] for r in a.results])
    mean, std, _ = a.summary(pairs[0], "sym_tobit")
    assert mean == pytest.approx(errs.mean(), abs=1e-15)
    assert std == pytest.approx(errs.std(), abs=1e-15)


def test_run_experiment_parallel_matches_serial():
    ds = synth_generate(4, 200, 0.5, 8)
    pairs = [("v1", "v2"), ("v2", "v1")]
    s = run_experiment(ds, pairs, n_sub=30, trials=2)
    p = run_experiment(ds, pairs, n_sub=30, trials=2, jobs=2)
    assert [r.errors for r in s.results] == [r.errors for r in p.results]


def test_run_experiment_validation():
    ds = synth_generate(3, 50, 0.5, 0)
    with pytest.raises(MissingColumnError):
        run_experiment(ds, [("v1", "zz")], trials=1)
    with pytest.raises(ValueError):
        run_experiment(ds, trials=0)


def test_synth_generate():
    a = synth_generate(4, 3000, 0.0, 1)
    C = np.corrcoef(a.values.T)
    assert np.all(np.abs(C[np.triu_indices(4, 1)]) < 4 / math.sqrt(3000))
    b = synth_generate(5, 10000, 0.7, 2)
    C = np.corrcoef(b.values.T)
    assert np.all(np.abs(C[np.triu_indices(5, 1)] - 0.7) < 0.03)
    np.testing.assert_array_equal(synth_generate(3, 20, 0.3, 9).values, synth_generate(3, 20, 0.3, 9).values)
    neg = synth_generate(4, 4000, -0.3, 3)
    C = np.corrcoef(neg.values.T)
    assert np.all(np.abs(C[np.triu_indices(4, 1)] + 0.3) < 0.05)
    with pytest.raises(ValueError):
        synth_generate(5, 10, -0.3, 0)
    with pytest.raises(ValueError):
        synth_generate(2, 10, 0.3, 0)


def test_benchmark_layout_and_trend():
    ds = synth_generate(5, 300, 0.5, 0)
    rows = benchmark_runtime(ds, [10, 100, 1000], iters=5, repeats=2)
    recs = benchmark_to_dict(rows)
    assert [r["n"] for r in recs] == [10, 100, 1000]
    assert {"n", "asym", "sym", "asym_std", "sym_std", "ratio"} <= set(recs[0])
    assert recs[-1]["source"] == "synthetic"
    assert len(rows[0].times["asymmetric"]) == 2
    assert recs[-1]["sym"] > recs[0]["sym"]
    assert "ratio" in benchmark_table(rows).splitlines()[0]
    assert BENCH_N_GRID == (10, 17, 31, 56, 100, 177, 316, 562, 1000)


def test_read_censored_csv(tmp_path):
    p = write(tmp_path, "a,b,s\n<1,2,0.5\n3,<2,1.5\n4,5,2\n1.5,6,3\n")
    names, side, cols = read_censored_csv(p, ("a", "b"))
    assert names == ("s",)
    assert cols["a"].theta == 1.0 and list(cols["a"].visible) == [False, True, True, True]
    data = load_censored_pair(p, "a", "b")
    assert np.isnan(data.y_a[0]) and data.visible_b.sum() == 3
    with pytest.raises(DataError):
        read_censored_csv(write(tmp_path, "a,b,s\n<2,1,1\n1,2,3\n", "bad.csv"), ("a", "b"))
