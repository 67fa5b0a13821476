import numpy as np
import pytest

from corridorlimits import fixtures
from corridorlimits.netcase import case_from_dict, case_to_dict
from corridorlimits.ucmodel import (ModelError, UCConfig, UCInfeasible, apply_static_limits, build_uc,
                                    compute_metrics, solve_uc)


def single_unit_case(demand, a=0.05, pmin=10.0, pmax=110.0):
    return case_from_dict({
        "buses": [{"id": 1, "slack": True}],
        "lines": [],
        "generators": [{"id": "G", "bus": 1, "pmin": pmin, "pmax": pmax, "a": a, "b": 10, "c": 30}],
        "loads": [{"id": "D", "bus": 1, "demand": list(demand)}],
    })


@pytest.mark.parametrize("segments", [1, 2, 5])
def test_linearization_error_within_chord_bound(segments):
    case = single_unit_case([47.0])
    sol = solve_uc(case, UCConfig(cost_linearization_segments=segments))
    exact = case.generators[0].cost(47.0)
    delta = 100.0 / segments
    assert 0.0 <= sol.objective - exact <= 0.05 * (delta / 2) ** 2 + 1e-7


def test_capacity_shortfall_detected_before_solving():
    case = single_unit_case([50.0, 200.0])
    with pytest.raises(UCInfeasible, match=r"periods \[1\]"):
        build_uc(case, UCConfig())


def test_conservative_bound_caps_corridor_flows(six_bus):
    S = len(six_bus.corridors)
    sol = solve_uc(six_bus, UCConfig(limit_regime="conservative"), (np.full(S, 120.0), np.full(S, -120.0)))
    assert np.all(np.abs(sol.flows) <= 120.0 + 1e-6)
    free = solve_uc(six_bus, UCConfig())
    assert free.objective <= sol.objective + 1e-6
    assert np.abs(free.flows).max() > 120.0


def test_static_limit_validation(six_bus):
    model = build_uc(six_bus, UCConfig())
    with pytest.raises(ModelError, match="lower bound exceeds"):
        apply_static_limits(model, [10.0, 10.0], [20.0, 0.0])
    rows = model.lp.num_rows
    apply_static_limits(model, [1e9, 50.0], [-1e9, -1e9])
    assert model.lp.num_rows == rows + six_bus.horizon
    with pytest.raises(ModelError, match="needs corridor bounds"):
        build_uc(six_bus, UCConfig(limit_regime="conservative"))
    with pytest.raises(ModelError, match="rule set"):
        build_uc(six_bus, UCConfig(limit_regime="coupled"))
    with pytest.raises(ModelError, match="big_m"):
        build_uc(six_bus, UCConfig(big_m=100.0))


def test_unit_constraints_hold_in_solution():
    doc = fixtures.two_corridor_doc(6)
    for d in doc["loads"]:
        d["demand"] = [v * f for v, f in zip(d["demand"], [1.2, 0.5, 0.5, 1.25, 0.45, 1.2])]
    case = case_from_dict(doc)
    cfg = UCConfig(reserve_fraction=0.1)
    sol = solve_uc(case, cfg)
    demand = case.demand().sum(axis=0)
    np.testing.assert_allclose(sol.p_g.sum(axis=0) + sol.p_w.sum(axis=0), demand, atol=1e-6)
    for i, g in enumerate(case.generators):
        u, p = sol.u_g[i], sol.p_g[i]
        assert np.all(p <= g.p_max * u + 1e-6) and np.all(p >= g.p_min * u - 1e-6)
        for t in range(1, case.horizon):
            if u[t] and u[t - 1]:
                assert -g.ramp_down - 1e-6 <= p[t] - p[t - 1] <= g.ramp_up + 1e-6
            if u[t] and not u[t - 1]:
                assert p[t] <= g.p_min + 1e-6
                assert all(u[t:t + g.min_up])
            if u[t - 1] and not u[t]:
                assert p[t - 1] <= g.p_min + 1e-6
                assert not any(u[t:t + g.min_down])
    head = np.array([g.p_max for g in case.generators]) @ sol.u_g - sol.p_g.sum(axis=0)
    assert np.all(head >= 0.1 * demand - 1e-6)


def test_builtin_backend_agrees_with_highs():
    case = fixtures.three_bus_case(horizon=2)
    a = solve_uc(case, UCConfig(backend="builtin"))
    b = solve_uc(case, UCConfig(backend="highs"))
    assert a.objective == pytest.approx(b.objective, rel=1e-6)


def test_metrics_and_json_schema(six_bus):
    sol = solve_uc(six_bus, UCConfig())
    m = compute_metrics(sol, six_bus)
    assert 0.0 <= m.consumption_rate <= 1.0
    doc = sol.to_dict(six_bus, m)
    assert set(doc) >= {"objective", "periods", "metrics", "case_hash", "regime"}
    per = doc["periods"][0]
    assert set(per) >= {"t", "pg", "ug", "pw", "flows", "active_cluster", "active_limits"}
    nowind = case_to_dict(fixtures.three_bus_case())
    nowind["wind"][0]["available"] = [0.0]
    case = case_from_dict(nowind)
    assert compute_metrics(solve_uc(case, UCConfig()), case).consumption_rate == 1.0
