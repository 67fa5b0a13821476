import numpy as np
import pytest

from corridorlimits import fixtures
from corridorlimits.netcase import CaseError, Contingency, ScenarioTable, scenario_from_vector
from corridorlimits.security import (IslandingError, SecurityLabelTable, assess_scenario, dc_power_flow,
                                     label_dataset)
from oracles import b_theta_flows


def _scenario(case, g, w, d):
    return scenario_from_vector(case, "s", np.concatenate([g, w, d]))


def test_three_bus_thermal_labels(three_bus):
    ok = _scenario(three_bus, [60, 50], [40], [60, 90])
    heavy = _scenario(three_bus, [250, 0], [0], [60, 190])
    n0 = Contingency("n0", "none")
    l1 = Contingency("l1", "line_outage", 1)
    assert assess_scenario(three_bus, ok, n0) == 1
    assert assess_scenario(three_bus, heavy, n0) == 0  # ~163 MW on line 1-3
    assert assess_scenario(three_bus, ok, l1) == 1
    # N-1 on line 1: everything runs 1-3-2, 110 MW on line 1-3 > 100
    mid = _scenario(three_bus, [110, 0], [0], [60, 50])
    assert assess_scenario(three_bus, mid, n0) == 1
    assert assess_scenario(three_bus, mid, l1) == 0


def test_dc_power_flow_outage_matches_reference(six_bus):
    table = fixtures.synthetic_scenarios(six_bus, 3, seed=4)
    sc = table.scenario(six_bus, 0)
    from corridorlimits.security import bus_injections
    P = bus_injections(six_bus, sc.vector)[0]
    lines = [(l.id, l.from_bus, l.to_bus, l.reactance) for l in six_bus.lines]
    ref = b_theta_flows([b.id for b in six_bus.buses], lines, 1, P, outage=2)
    np.testing.assert_allclose(dc_power_flow(six_bus, sc, outage=2), ref, atol=1e-9)


def test_islanding_outage_raises_and_labels_unsafe():
    from corridorlimits.netcase import case_from_dict, case_to_dict
    doc = case_to_dict(fixtures.three_bus_case())
    doc["lines"] = doc["lines"][:2]
    doc["corridors"] = [{"id": "S1", "members": [{"line": 1, "dir": 1}]}]
    doc["contingencies"] = [{"id": "n0", "kind": "none"}]
    radial = case_from_dict(doc)
    sc = _scenario(radial, [10, 0], [0], [5, 5])
    with pytest.raises(IslandingError):
        dc_power_flow(radial, sc, outage=1)
    assert assess_scenario(radial, sc, Contingency("x", "line_outage", 1)) == 0


def test_external_labels_override_and_pass_through(six_bus):
    table = fixtures.synthetic_scenarios(six_bus, 6, seed=2)
    table.labels = {"n0": np.zeros(6, int), "transient": np.array([1, 0, 1, 1, 0, 1])}
    labels = label_dataset(six_bus, table)
    assert labels.contingency_ids[-1] == "transient"
    assert labels.sources["n0"] == "external" and labels.sources["l2"] == "computed"
    assert np.all(labels.labels[:, 0] == 0)
    assert np.all(labels.aggregate == 0)
    table.labels["transient"][2] = -1
    with pytest.raises(CaseError, match="blank"):
        label_dataset(six_bus, table)


def test_label_csv_round_trip(six_bus):
    table = fixtures.synthetic_scenarios(six_bus, 10, seed=5)
    labels = label_dataset(six_bus, table)
    text = labels.to_csv()
    assert text.splitlines()[0] == "scenario_id,label_n0,label_l2,label_l5,label_l8,aggregate"
    back = SecurityLabelTable.from_csv(text)
    assert back.scenario_ids == labels.scenario_ids
    np.testing.assert_array_equal(back.labels, labels.labels)


def test_no_contingencies_means_all_safe():
    t = SecurityLabelTable(["a", "b"], [], np.zeros((2, 0), int))
    assert t.aggregate.tolist() == [1, 1]
