import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from corridorlimits import fixtures
from corridorlimits.netcase import (CaseError, OperatingScenario, ScenarioTable, bus_ptdf, case_from_dict,
                                    case_to_dict, compute_ptdf, corridor_flow, corridor_flows, parse_case,
                                    read_scenarios, write_scenarios)
from oracles import b_theta_flows


def test_three_bus_ptdf_hand_values(three_bus):
    H = bus_ptdf(three_bus)
    # injection at bus 2, withdrawal at the slack: 2/3 on the direct line, 1/3 around
    assert H[0, 1] == pytest.approx(-2 / 3)
    assert H[1, 1] == pytest.approx(1 / 3)
    assert H[2, 1] == pytest.approx(-1 / 3)
    assert np.all(H[:, three_bus.slack] == 0.0)


def test_corridor_flow_single_scenario(three_bus):
    ptdf = compute_ptdf(three_bus)
    sc = OperatingScenario("s", np.array([100.0, 50.0]), np.array([40.0]), np.array([60.0, 90.0]))
    # direct check: bus injections 100 (1), -10 (2), -50 (3)
    flows = b_theta_flows([1, 2, 3], [(1, 1, 2, 0.1), (2, 2, 3, 0.1), (3, 1, 3, 0.1)], 1, [100, -10, -50])
    assert corridor_flow(sc, ptdf, three_bus)[0] == pytest.approx(flows[0] + flows[2])


def test_ieee39_parses_with_expected_counts():
    case = fixtures.ieee39_case()
    assert (len(case.buses), len(case.lines), len(case.generators)) == (39, 46, 10)
    assert [w.bus for w in case.wind_units] == [17, 21]
    assert case.buses[case.slack].id == 31


def test_validation_errors_name_the_path():
    doc = fixtures.two_corridor_doc()
    doc["corridors"][0]["members"][0]["line"] = 99
    with pytest.raises(CaseError, match=r"corridors\[0\]\.members\[0\]\.line"):
        case_from_dict(doc)
    doc = fixtures.two_corridor_doc()
    doc["buses"][0]["slack"] = False
    with pytest.raises(CaseError, match="slack"):
        case_from_dict(doc)
    doc = fixtures.two_corridor_doc()
    doc["lines"][0]["x"] = 0
    with pytest.raises(CaseError, match=r"lines\[0\]\.x"):
        case_from_dict(doc)
    doc = fixtures.two_corridor_doc()
    doc["generators"][0]["pmin"] = 700
    with pytest.raises(CaseError, match=r"generators\[0\]"):
        case_from_dict(doc)


def test_islanding_contingency_rejected():
    doc = fixtures.two_corridor_doc()
    doc["lines"] = [l for l in doc["lines"] if l["id"] != 8]
    doc["contingencies"] = [{"id": "x", "kind": "line_outage", "line": 7}]
    case_from_dict(doc)  # still connected through the receiving area
    doc["lines"] = [l for l in doc["lines"] if l["id"] not in (5,)]
    doc["corridors"] = doc["corridors"][:1]
    with pytest.raises(CaseError, match="islands"):
        case_from_dict(doc)


def test_case_round_trip(six_bus):
    again = parse_case(json.dumps(case_to_dict(six_bus)))
    assert case_to_dict(again) == case_to_dict(six_bus)


def test_scenario_csv_round_trip_and_errors(six_bus):
    table = fixtures.synthetic_scenarios(six_bus, 5, seed=3)
    text = write_scenarios(table, six_bus)
    back = read_scenarios(text, six_bus)
    assert back.ids == table.ids
    np.testing.assert_allclose(back.X, table.X, atol=1e-6)
    bad = text.splitlines()
    bad[2] = bad[2].replace(bad[2].split(",")[1], "-4", 1)
    with pytest.raises(CaseError, match=r"<scenarios>:3"):
        read_scenarios("\n".join(bad), six_bus)
    with pytest.raises(CaseError, match="missing columns"):
        read_scenarios("scenario_id,g_G1\ns,1\n", six_bus)


def test_corridor_flows_batch_matches_single(six_bus):
    table = fixtures.synthetic_scenarios(six_bus, 20, seed=1)
    ptdf = compute_ptdf(six_bus)
    batch = corridor_flows(table.X, ptdf, six_bus)
    for k in range(len(table)):
        np.testing.assert_allclose(batch[k], corridor_flow(table.scenario(six_bus, k), ptdf, six_bus), atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_ptdf_matches_b_theta_on_random_networks(seed):
    rng = np.random.default_rng(seed)
    case = fixtures.random_case(rng, n_bus=int(rng.integers(3, 8)), extra_lines=int(rng.integers(0, 4)))
    H = bus_ptdf(case)
    assert np.all(H[:, case.slack] == 0.0)
    assert np.max(np.abs(H)) <= 1 + 1e-9
    P = rng.normal(0, 50, len(case.buses))
    lines = [(l.id, l.from_bus, l.to_bus, l.reactance) for l in case.lines]
    ref = b_theta_flows([b.id for b in case.buses], lines, case.buses[case.slack].id, P)
    np.testing.assert_allclose(H @ P, ref, atol=1e-8)
