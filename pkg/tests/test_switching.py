import numpy as np
import pytest

from corridorlimits.clustering import ACCParams, acc_cluster
from corridorlimits.netcase import compute_ptdf, corridor_flows
from corridorlimits.rulegen import build_rule_set
from corridorlimits.switching import (brute_force_switching, check_argmin, distance_diff, encode_membership,
                                      solve_switching_uc, squared_distances)
from corridorlimits.ucmodel import UCConfig, UCInfeasible, build_uc, solve_uc

FAST = ACCParams(ants=10, iterations=20, stagnation=5)


@pytest.fixture(scope="module")
def setup(six_bus, dataset):
    table, labels, flows = dataset
    out = {}
    for k in (1, 3):
        m = acc_cluster(table.X[:600], k, FAST, seed=0)
        cf = corridor_flows(m.raw_centers(), compute_ptdf(six_bus), six_bus)
        out[k] = (m, build_rule_set(m, flows[:600], labels.labels[:600], ["A", "B"], cf, resolution=(8, 8)))
    return out


def test_distance_difference_is_linear_form():
    rng = np.random.default_rng(0)
    c1, c2, x = rng.normal(size=(3, 5))
    d = squared_distances(x, np.vstack([c1, c2]))
    assert distance_diff(c1, c2, x) == pytest.approx(d[0] - d[1])


def test_big_m_never_binds_inside_bounds(six_bus, setup):
    m, _ = setup[3]
    model = build_uc(six_bus, UCConfig())
    C = m.raw_centers()
    rng = np.random.default_rng(1)
    lo, hi = model.feature_bounds(0)
    encode_membership(model, m)
    for _ in range(200):
        x = rng.uniform(lo, hi)
        for j in range(3):
            for jj in range(3):
                if j != jj:
                    coef = -2 * (C[j] - C[jj])
                    M = float(C[j] @ C[j] - C[jj] @ C[jj]) + np.maximum(coef * lo, coef * hi).sum()
                    assert distance_diff(C[j], C[jj], x) <= M + 1e-6


def test_single_cluster_equals_static_limits(six_bus, setup):
    m, rs = setup[1]
    cfg = UCConfig(limit_regime="independent")
    sw = solve_switching_uc(six_bus, cfg, rs, m)
    static = solve_uc(six_bus, UCConfig(limit_regime="conservative"), (rs.rule(0).upper, rs.rule(0).lower))
    assert sw.active_cluster == [0] * six_bus.horizon
    assert sw.objective == pytest.approx(static.objective, rel=1e-7)


@pytest.mark.parametrize("regime", ["independent", "coupled"])
def test_reduction_matches_enumeration(six_bus, setup, regime):
    m, rs = setup[3]
    cfg = UCConfig(limit_regime=regime)
    a = solve_switching_uc(six_bus, cfg, rs, m)
    b = brute_force_switching(six_bus, cfg, rs, m)
    assert a.objective == pytest.approx(b.objective, rel=1e-6)
    assert b.subproblems == 3 ** six_bus.horizon
    check_argmin(a, m.raw_centers())
    for t, lims in enumerate(a.active_limits):
        for s, (lo, hi) in enumerate(lims.values()):
            assert lo - 1e-6 <= a.flows[s, t] <= hi + 1e-6
    doc = a.to_dict(six_bus)
    assert [p["active_cluster"] for p in doc["periods"]] == a.active_cluster


def test_brute_force_guard(six_bus, setup):
    m, rs = setup[3]
    with pytest.raises(ValueError, match="guard"):
        brute_force_switching(six_bus, UCConfig(limit_regime="coupled"), rs, m, guard=10)


def test_unattainable_limits_report_hint(six_bus, setup):
    m, rs = setup[3]
    for r in rs.rules:
        r.upper[:] = -500.0
        r.coupled = []
    with pytest.raises(UCInfeasible, match="unattainable"):
        solve_switching_uc(six_bus, UCConfig(limit_regime="independent"), rs, m)
