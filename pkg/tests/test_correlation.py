import json

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from censcorr.correlation import (
    ASYM_TOBIT,
    METHODS,
    NAIVE,
    SYM_TOBIT,
    CorrelationConfig,
    InsufficientDataError,
    PairedCensoredData,
    StageFailure,
    UndefinedCorrelationError,
    estimate,
    naive_pcc,
    pcc,
    preprocess_signs,
    relative_sign,
    tobit_pcc,
)
from censcorr.tobit import ASYMMETRIC, SYMMETRIC


def mp_pcc(a, b):
    a = [mp.mpf(x) for x in a]
    b = [mp.mpf(x) for x in b]
    ma, mb = mp.fsum(a) / len(a), mp.fsum(b) / len(b)
    cov = mp.fsum((x - ma) * (y - mb) for x, y in zip(a, b))
    return float(cov / mp.sqrt(mp.fsum((x - ma) ** 2 for x in a) * mp.fsum((y - mb) ** 2 for y in b)))


def synthetic_pair(seed, rho=0.7, n=200, ratio=0.8, n_side=2, labels="positive"):
    rng = np.random.default_rng(seed)
    k = 2 + n_side
    C = np.full((k, k), rho) + (1 - rho) * np.eye(k)
    Z = rng.multivariate_normal(np.zeros(k), C, size=n).T
    ya, yb = Z[0], Z[1]
    ta, tb = np.sort(ya)[int(ratio * n)], np.sort(yb)[int(ratio * n)]
    names = tuple(f"s{h}" for h in range(n_side))
    signs = {} if labels is None else {name: labels for name in ("A", "B") + names}
    data = PairedCensoredData(ya, yb, ya >= ta, yb >= tb, ta, tb, Z[2:], names, "A", "B", signs)
    return data, ya, yb


def uncensored(seed=0, n=40):
    rng = np.random.default_rng(seed)
    Z = rng.normal(size=(4, n))
    Z[1] += Z[0]
    return PairedCensoredData(Z[0], Z[1], np.ones(n, bool), np.ones(n, bool), Z[0].min(), Z[1].min(), Z[2:]), Z


def test_pcc_examples():
    assert pcc([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0)
    assert pcc([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)
    assert pcc([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-15)
    assert mp_pcc([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-15)


def test_pcc_errors():
    with pytest.raises(UndefinedCorrelationError):
        pcc([1, 1, 1], [1, 2, 3])
    with pytest.raises(ValueError):
        pcc([1, 2], [1, 2, 3])
    with pytest.raises(InsufficientDataError):
        pcc([1.0], [2.0])


@settings(max_examples=100)
@given(st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=2, max_size=30))
def test_pcc_bounded_and_matches_high_precision(pairs):
    a = np.array([p[0] for p in pairs])
    b = np.array([p[1] for p in pairs])
    try:
        r = pcc(a, b)
    except UndefinedCorrelationError:
        return
    assert abs(r) <= 1 + 1e-12
    if np.ptp(a) > 1e-6 and np.ptp(b) > 1e-6:
        assert r == pytest.approx(mp_pcc(a, b), abs=1e-9)


def test_relative_sign():
    assert relative_sign("positive", "positive") == "positive"
    assert relative_sign("negative", "positive") == "negative"
    assert relative_sign("negative", "negative") == "positive"
    assert relative_sign("unknown", "positive") == "unknown"
    with pytest.raises(ValueError):
        relative_sign("up", "positive")


def test_preprocess_signs():
    X = np.arange(6.0).reshape(3, 2)
    out, ipos = preprocess_signs(X, ["positive"] * 3)
    np.testing.assert_array_equal(out, X)
    assert ipos == [0, 1, 2]
    out, ipos = preprocess_signs(X, ["positive", "negative", "unknown"])
    np.testing.assert_array_equal(out[1], -X[1])
    np.testing.assert_array_equal(out[[0, 2]], X[[0, 2]])
    assert ipos == [0, 1]
    out, ipos = preprocess_signs(X, ["unknown"] * 3)
    np.testing.assert_array_equal(out, X)
    assert ipos == []
    with pytest.raises(ValueError):
        preprocess_signs(X, ["positive"])


def test_paired_data_hides_censored_values():
    data, ya, _ = synthetic_pair(0)
    assert np.all(np.isnan(data.y_a[~data.visible_a]))
    np.testing.assert_array_equal(data.y_a[data.visible_a], ya[data.visible_a])
    with pytest.raises(ValueError):
        PairedCensoredData([0.0, 1.0], [0.0, 1.0], [True, True], [True, True], 0.5, 0.0, np.ones((1, 2)))
    with pytest.raises(ValueError):
        PairedCensoredData([0.0, 1.0], [0.0, 1.0], [True, True], [True, True], 0.0, 0.0, np.array([[1.0, np.nan]]))
    with pytest.raises(ValueError):
        PairedCensoredData([0.0, 1.0], [0.0, 1.0], [True, True], [True, True], 0.0, 0.0, np.ones((1, 3)))


def test_naive_uncensored_equals_pcc():
    data, Z = uncensored()
    est = naive_pcc(data)
    assert est.r == pcc(Z[0], Z[1])
    assert est.n_effective == Z.shape[1]


def test_naive_two_rows_is_collinear():
    ya = np.array([5.0, 6.0, 0.0, 0.0])
    yb = np.array([1.0, 3.0, 9.0, 0.0])
    data = PairedCensoredData(ya, yb, [True, True, False, False], [True, True, True, False], 1.0, 1.0, np.ones((1, 4)))
    assert abs(naive_pcc(data).r) == pytest.approx(1.0)


def test_naive_subset_case():
    rng = np.random.default_rng(2)
    ya, yb = rng.uniform(5, 10, 10), rng.uniform(5, 10, 10)
    va = np.array([1, 1, 1, 1, 1, 0, 0, 1, 0, 0], bool)
    vb = np.array([1, 1, 0, 1, 1, 1, 0, 0, 0, 1], bool)
    data = PairedCensoredData(ya, yb, va, vb, 5.0, 5.0, rng.normal(size=(1, 10)))
    est = naive_pcc(data)
    both = va & vb
    assert est.n_effective == 4
    assert est.r == pytest.approx(mp_pcc(ya[both], yb[both]), abs=1e-13)


def test_naive_insufficient():
    data = PairedCensoredData([3.0, 0.0], [0.0, 3.0], [True, False], [False, True], 1.0, 1.0, np.ones((1, 2)))
    with pytest.raises(InsufficientDataError):
        naive_pcc(data)


@pytest.mark.parametrize("kind", [SYMMETRIC, ASYMMETRIC])
def test_tobit_uncensored_collapse(kind):
    data, Z = uncensored(3)
    est = tobit_pcc(data, kind)
    assert est.r == pcc(Z[0], Z[1])
    assert est.diagnostics["n_imputed_a"] == 0


def test_asym_with_unknown_signs_equals_sym():
    data, _, _ = synthetic_pair(4, labels=None)
    cfg = CorrelationConfig(infer_pair_sign=False)
    assert tobit_pcc(data, ASYMMETRIC, cfg).r == pytest.approx(tobit_pcc(data, SYMMETRIC, cfg).r, abs=1e-12)


def test_asym_beats_naive_on_average():
    ea, en = [], []
    for seed in range(50):
        data, ya, yb = synthetic_pair(seed)
        ea.append(abs(tobit_pcc(data, ASYMMETRIC).r - 0.7))
        en.append(abs(naive_pcc(data).r - 0.7))
    assert np.mean(ea) < np.mean(en)


def test_pair_sign_inference_and_labels():
    data, _, _ = synthetic_pair(5, labels=None)
    assert tobit_pcc(data, ASYMMETRIC).diagnostics["pair_sign_source"] == "inferred"
    off = tobit_pcc(data, ASYMMETRIC, CorrelationConfig(infer_pair_sign=False)).diagnostics
    assert off["pair_sign"] == "unknown"
    data, _, _ = synthetic_pair(5)
    assert tobit_pcc(data, ASYMMETRIC).diagnostics["pair_sign_source"] == "labels"


def test_properties_bounded_deterministic_order_invariant():
    data, _, _ = synthetic_pair(6, n=60)
    perm = np.random.default_rng(0).permutation(data.n)
    shuffled = PairedCensoredData(
        data.y_a[perm], data.y_b[perm], data.visible_a[perm], data.visible_b[perm],
        data.theta_a, data.theta_b, data.side_info[:, perm], data.side_names, "A", "B", data.sign_knowledge,
    )
    for m in METHODS:
        r1 = estimate(data, m).r
        assert abs(r1) <= 1 + 1e-12
        assert estimate(data, m).r == r1
        assert estimate(shuffled, m).r == pytest.approx(r1, abs=1e-12)


def test_stage_failure_identified():
    # B has a single visible row and constant side info: stage 1 is fine,
    # but A with no visible rows cannot be fitted
    ya = np.zeros(5)
    yb = np.arange(5.0)
    data = PairedCensoredData(ya, yb, np.zeros(5, bool), np.ones(5, bool), 1.0, 0.0, np.arange(5.0)[None] ** 2)
    with pytest.raises(StageFailure) as info:
        tobit_pcc(data, SYMMETRIC)
    assert info.value.stage == "stage2"


def test_estimate_json_roundtrip():
    data, _, _ = synthetic_pair(7, n=50)
    doc = json.loads(estimate(data, SYM_TOBIT).to_json())
    assert set(doc) == {"method", "r", "n_effective", "diagnostics"}
    assert doc["method"] == SYM_TOBIT
    with pytest.raises(ValueError):
        estimate(data, "spearman")
    with pytest.raises(ValueError):
        tobit_pcc(data, "other")
