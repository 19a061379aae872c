import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmeans.emulation import (
    CentroidSet,
    ErrorBudget,
    argmin_label,
    argmin_labels,
    characteristic_vectors,
    cluster_means,
    consistent_noise,
    context_bytes,
    expected_collection_bound,
    noisy_distance_matrix,
    noisy_sq_distance,
    recover_centroids,
    sample_cluster_sequence,
)
from qmeans.errors import EmptyCluster, EmptyInput, ZeroVector


def test_derive_default():
    b = ErrorBudget.derive_default(0.5, 4.0, 10)
    assert b.eps1 == 0.25
    assert b.eps3 == b.eps4 == pytest.approx(0.5 / 8)
    assert b.eps2 == pytest.approx(b.eps4**2 / (10 * 10 * math.log(10)))


def test_budget_validation():
    with pytest.raises(ValueError):
        ErrorBudget(eps1=-1)
    with pytest.raises(ValueError):
        ErrorBudget(capital_delta=0.5)
    with pytest.raises(ValueError):
        ErrorBudget(noise_mode="gaussian")


# --- consistent noise ------------------------------------------------------------


def test_zero_bound():
    assert consistent_noise(1, b"x", 0.0, "uniform") == 0.0
    assert consistent_noise(1, b"x", 5.0, "zero") == 0.0


def test_noise_is_deterministic():
    a = consistent_noise(99, b"ctx", 1.0, "uniform")
    assert a == consistent_noise(99, b"ctx", 1.0, "uniform")
    assert a != consistent_noise(99, b"ctx2", 1.0, "uniform")
    assert a != consistent_noise(98, b"ctx", 1.0, "uniform")


def test_adversarial_sits_on_bound():
    vals = [consistent_noise(3, context_bytes("a", i), 0.7, "adversarial") for i in range(200)]
    assert all(abs(v) == 0.7 for v in vals)
    assert min(vals) < 0 < max(vals)


def test_uniform_noise_statistics():
    vals = np.array([consistent_noise(5, context_bytes("u", i), 1.0, "uniform") for i in range(100_000)])
    assert np.all(np.abs(vals) <= 1.0)
    assert abs(vals.mean()) < 0.02


# --- distance estimation ---------------------------------------------------------


def test_same_vector_zero_noise():
    v = np.array([1.0, 2.0])
    est = noisy_sq_distance(v, v, ErrorBudget.zero(), b"c")
    assert est.value == 0.0 and est.true_value == 0.0


def test_same_vector_with_noise():
    v = np.array([1.0, 2.0])
    b = ErrorBudget(eps1=0.3, noise_mode="adversarial")
    for i in range(50):
        est = noisy_sq_distance(v, v, b, context_bytes("c", i))
        assert 0.0 <= est.value <= 0.3


def test_orthogonal_units():
    est = noisy_sq_distance([1.0, 0.0], [0.0, 1.0], ErrorBudget.zero(), b"c")
    assert est.value == pytest.approx(2.0, abs=1e-15)


def test_distance_ten_within_half():
    c = np.array([0.0, 1.0])
    v = np.array([math.sqrt(10.0), 1.0])
    b = ErrorBudget(eps1=0.5)
    for i in range(200):
        est = noisy_sq_distance(v, c, b, context_bytes("t", i))
        assert est.true_value == pytest.approx(10.0)
        assert 9.5 - 1e-12 <= est.value <= 10.5 + 1e-12


def test_zero_vector_rejected():
    with pytest.raises(ZeroVector):
        noisy_sq_distance([0.0, 0.0], [1.0, 0.0], ErrorBudget.zero(), b"c")


def test_noise_amplified_through_norms():
    # the same relative p-offset is worth more distance for longer vectors
    b = ErrorBudget(eps1=0.2, noise_mode="adversarial")
    short = noisy_sq_distance([1.0, 0.0], [0.0, 1.0], b, b"k")
    long_ = noisy_sq_distance([10.0, 0.0], [0.0, 10.0], b, b"k")
    assert abs(short.value - short.true_value) == pytest.approx(0.2)
    assert abs(long_.value - long_.true_value) == pytest.approx(0.2)


@settings(max_examples=200)
@given(
    st.lists(st.floats(-5, 5), min_size=3, max_size=3),
    st.lists(st.floats(-5, 5), min_size=3, max_size=3),
    st.floats(0, 2),
    st.sampled_from(["uniform", "adversarial"]),
    st.integers(0, 2**32),
)
def test_distance_bound_property(v, c, eps1, mode, seed):
    v, c = np.array(v), np.array(c)
    if np.linalg.norm(v) == 0 or np.linalg.norm(c) == 0:
        return
    est = noisy_sq_distance(v, c, ErrorBudget(eps1=eps1, noise_mode=mode, master_seed=seed), b"p")
    assert abs(est.value - est.true_value) <= eps1
    assert not est.failed


def test_matrix_consistency_and_bound(rng):
    V = rng.standard_normal((40, 4)) + 3
    C = rng.standard_normal((5, 4)) + 3
    b = ErrorBudget(eps1=0.4, master_seed=11)
    est1, true, failed = noisy_distance_matrix(V, C, b, iteration=3)
    est2, _, _ = noisy_distance_matrix(V, C, b, iteration=3)
    np.testing.assert_array_equal(est1, est2)
    assert not failed.any()
    assert np.all(np.abs(est1 - true) <= 0.4)
    est3, _, _ = noisy_distance_matrix(V, C, b, iteration=4)
    assert not np.array_equal(est1, est3)


def test_matrix_zero_budget_is_exact(rng):
    V = rng.standard_normal((30, 3))
    C = rng.standard_normal((4, 3))
    est, true, _ = noisy_distance_matrix(V, C, ErrorBudget.zero())
    np.testing.assert_array_equal(est, true)


def test_failure_injection_rate(rng):
    V = rng.standard_normal((500, 3)) + 2
    C = rng.standard_normal((4, 3)) + 2
    b = ErrorBudget(eps1=0.1, capital_delta=0.1, master_seed=1)
    est, true, failed = noisy_distance_matrix(V, C, b)
    rate = failed.mean()
    assert abs(rate - 0.2) < 0.03
    ok = ~failed
    assert np.all(np.abs(est[ok] - true[ok]) <= 0.1)
    cap = (np.linalg.norm(V, axis=1)[:, None] + np.linalg.norm(C, axis=1)[None, :]) ** 2
    assert np.all(est <= cap) and np.all(est >= 0)


def test_inconsistent_mode_uses_rng(rng):
    V = rng.standard_normal((10, 2)) + 2
    C = rng.standard_normal((3, 2)) + 2
    b = ErrorBudget(eps1=0.5, consistent=False)
    a, _, _ = noisy_distance_matrix(V, C, b, rng=np.random.default_rng(1))
    c, _, _ = noisy_distance_matrix(V, C, b, rng=np.random.default_rng(2))
    assert not np.array_equal(a, c)


# --- argmin ------------------------------------------------------------------------


def test_argmin_simple():
    assert argmin_label([3.0]) == 0
    assert argmin_label([2.0, 1.0, 1.0]) == 1


def test_argmin_empty():
    with pytest.raises(EmptyInput):
        argmin_label([])


def test_argmin_permutations(rng):
    for _ in range(1000):
        k = int(rng.integers(1, 12))
        perm = rng.permutation(np.arange(1, k + 1)).astype(float)
        scan = 0
        for j in range(k):
            if perm[j] < perm[scan]:
                scan = j
        assert argmin_label(perm) == scan == int(np.flatnonzero(perm == 1)[0])


def test_argmin_rows_tie_rule():
    np.testing.assert_array_equal(argmin_labels([[1.0, 1.0], [2.0, 0.5]]), [0, 1])


# --- centroid recovery ----------------------------------------------------------------


def test_characteristic_vectors_unit_l1():
    chi = characteristic_vectors([0, 1, 1, 0, 1], 2)
    np.testing.assert_allclose(chi.sum(axis=1), [1.0, 1.0])
    V = np.arange(10.0).reshape(5, 2)
    means, _ = cluster_means(V, np.array([0, 1, 1, 0, 1]), 2)
    np.testing.assert_allclose(chi @ V, means)


def test_recover_zero_budget_is_exact(rng):
    V = rng.standard_normal((50, 4))
    labels = rng.integers(0, 3, 50)
    means, _ = cluster_means(V, labels, 3)
    out = recover_centroids(V, labels, ErrorBudget.zero(), k=3)
    np.testing.assert_array_equal(out.centroids, means)


def test_recover_hand_mean():
    out = recover_centroids([[0.0, 2.0], [2.0, 0.0]], [0, 0], ErrorBudget.zero())
    np.testing.assert_allclose(out.centroids, [[1.0, 1.0]])


def test_recover_empty_cluster():
    with pytest.raises(EmptyCluster) as info:
        recover_centroids(np.eye(3), [0, 0, 2], ErrorBudget.zero(), k=3)
    assert info.value.cluster == 1


@pytest.mark.parametrize("mode", ["uniform", "adversarial"])
def test_epsilon_centroid_bound(mode):
    rng = np.random.default_rng(2024)
    eta = 4.0
    b = ErrorBudget(eps3=0.1, eps4=0.1, eps2=1e-4, noise_mode=mode)
    worst = 0.0
    for trial in range(1000):
        V = rng.standard_normal((20, 5))
        V *= np.sqrt(eta) / np.linalg.norm(V, axis=1, keepdims=True) * rng.uniform(0.5, 1.0, (20, 1))
        labels = rng.integers(0, 3, 20)
        labels[:3] = [0, 1, 2]
        means, _ = cluster_means(V, labels, 3)
        out = recover_centroids(V, labels, b.with_seed(trial), k=3)
        err = np.linalg.norm(out.centroids - means, axis=1)
        worst = max(worst, err.max())
        assert np.all(err <= np.sqrt(eta) * (0.2 + 1e-4) + 1e-12)
    assert worst > 0


def test_adversarial_error_decomposition():
    # norm error and direction error both sit on their bounds
    mean = np.array([[3.0, 4.0]])
    b = ErrorBudget(eps3=0.1, eps4=0.05, noise_mode="adversarial")
    out = recover_centroids(mean, [0], b)
    c = out.centroids[0]
    assert abs(np.linalg.norm(c) - 5.0) == pytest.approx(0.5)
    unit = c / np.linalg.norm(c)
    assert np.linalg.norm(unit - mean[0] / 5.0) == pytest.approx(0.05)
    assert out.reported_norms[0] == pytest.approx(np.linalg.norm(c))


def test_recovery_is_consistent(rng):
    V = rng.standard_normal((30, 3))
    labels = rng.integers(0, 2, 30)
    b = ErrorBudget(eps3=0.1, eps4=0.1, master_seed=4)
    a = recover_centroids(V, labels, b, iteration=2, k=2).centroids
    c = recover_centroids(V, labels, b, iteration=2, k=2).centroids
    np.testing.assert_array_equal(a, c)


def test_centroidset_defaults():
    C = CentroidSet([[3.0, 4.0]])
    assert C.k == 1 and C.d == 2
    np.testing.assert_allclose(C.reported_norms, [5.0])


# --- coupon collector --------------------------------------------------------------------


def test_single_cluster_sequence(rng):
    assert sample_cluster_sequence([7], rng) == [0]


def test_coupon_collector_mean(rng):
    lengths = [len(sample_cluster_sequence([25, 25, 25, 25], rng)) for _ in range(10_000)]
    h4 = 1 + 1 / 2 + 1 / 3 + 1 / 4
    assert abs(np.mean(lengths) - 4 * h4) <= 0.1 * 4 * h4
    assert expected_collection_bound([25] * 4) == pytest.approx(4 * h4)


def test_rare_cluster_frequency(rng):
    # every sequence holds exactly one draw of the rare cluster, so its
    # long-run share of all draws estimates the per-draw probability 1/N
    n, runs = 50, 3000
    total = sum(len(sample_cluster_sequence([n - 1, 1], rng)) for _ in range(runs))
    mean_len = total / runs
    assert abs(mean_len - n) <= 4 * n / np.sqrt(runs) + 1
    assert runs / total == pytest.approx(1 / n, rel=0.1)


def test_sequence_rejects_empty(rng):
    with pytest.raises(EmptyCluster):
        sample_cluster_sequence([3, 0], rng)
