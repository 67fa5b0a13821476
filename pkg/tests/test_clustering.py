import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from corridorlimits.clustering import (ACCParams, ClusterModel, FeatureStats, acc_cluster, assign_nearest,
                                       lloyd, nearest, normalize, sq_distances, sse)

FAST = ACCParams(ants=10, iterations=30, stagnation=8)


def blobs(rng, k=3, n=40, dim=4, spread=0.3):
    centers = rng.normal(0, 10, (k, dim))
    X = np.vstack([c + spread * rng.standard_normal((n, dim)) for c in centers])
    return X, np.repeat(np.arange(k), n)


def test_zscore_and_degenerate_dimension():
    X = np.array([[1.0, 5.0, 2.0], [3.0, 5.0, 4.0]])
    stats = FeatureStats.fit(X)
    Z = normalize(X, stats)
    np.testing.assert_allclose(Z[:, 0], [-1.0, 1.0])
    assert np.all(Z[:, 1] == 0.0)
    with pytest.raises(ValueError):
        normalize(np.ones(4), stats)


def test_nearest_breaks_ties_to_lowest_index():
    C = np.array([[1.0, 0.0], [-1.0, 0.0]])
    assert nearest(np.zeros((1, 2)), C)[0] == 0


def test_recovers_separated_blobs():
    rng = np.random.default_rng(0)
    X, truth = blobs(rng)
    m = acc_cluster(X, 3, FAST, seed=1)
    # same partition up to relabeling
    pairs = {(int(a), int(b)) for a, b in zip(truth, m.assignments)}
    assert len(pairs) == 3
    assert m.objective <= m.init_objective + 1e-9


def test_result_is_a_lloyd_fixpoint_and_deterministic():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(150, 5))
    a = acc_cluster(X, 4, FAST, seed=7)
    b = acc_cluster(X, 4, FAST, seed=7)
    assert a.to_json() == b.to_json()
    Z = normalize(X, a.stats)
    np.testing.assert_array_equal(nearest(Z, a.centers), a.assignments)
    for j in range(4):
        np.testing.assert_allclose(a.centers[j], Z[a.assignments == j].mean(axis=0), atol=1e-12)


def test_k_bounds_and_k1():
    X = np.arange(12.0).reshape(6, 2)
    with pytest.raises(ValueError):
        acc_cluster(X, 7)
    with pytest.raises(ValueError):
        acc_cluster(X, 0)
    m = acc_cluster(X, 1, FAST)
    np.testing.assert_allclose(m.raw_centers()[0], X.mean(axis=0))


def test_model_json_round_trip_and_assign():
    rng = np.random.default_rng(5)
    X, _ = blobs(rng, k=2, n=20, dim=3)
    m = acc_cluster(X, 2, FAST, seed=2, feature_names=["a", "b", "c"])
    back = ClusterModel.from_dict(__import__("json").loads(m.to_json()))
    assert back.hash() == m.hash()
    for x, j in zip(X, m.assignments):
        assert assign_nearest(x, back) == j


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 5))
def test_acc_never_worse_than_its_seeding(seed, k):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(60, 3))
    m = acc_cluster(X, k, FAST, seed=seed)
    Z = normalize(X, m.stats)
    assert m.objective == pytest.approx(sse(Z, m.assignments, m.centers))
    assert m.objective <= m.init_objective + 1e-9


def test_lloyd_monotone():
    rng = np.random.default_rng(8)
    Z = rng.normal(size=(80, 2))
    C0 = Z[:3].copy()
    before = sse(Z, nearest(Z, C0), C0)
    assign, C = lloyd(Z, C0)
    assert sse(Z, assign, C) <= before + 1e-12
    assert sq_distances(Z, C).shape == (80, 3)
