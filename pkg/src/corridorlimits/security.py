"""Thermal N-0 / N-1 screening that produces per-contingency safety labels.

Only DC thermal checks are computed here. Transient and voltage stability
labels come in as ``label_<contingency>`` columns of the scenario CSV and take
precedence over anything computed for the same contingency.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field

import numpy as np

from .netcase import (CaseError, Contingency, NetworkCase, OperatingScenario, ScenarioTable,
                      StructureError)

log = logging.getLogger(__name__)

THERMAL_TOL = 1e-6  # MW

__all__ = ["Contingency", "IslandingError", "SecurityLabelTable", "dc_power_flow",
           "assess_scenario", "label_dataset"]


class IslandingError(StructureError):
    """The requested outage splits the network."""


def bus_injections(case: NetworkCase, X: np.ndarray) -> np.ndarray:
    """Net bus injections (MW) for scenario rows ``X``; shape (n, buses)."""
    X = np.atleast_2d(X)
    ng, nw = len(case.generators), len(case.wind_units)
    gb, wb, db = case.element_buses()
    P = np.zeros((X.shape[0], len(case.buses)))
    np.add.at(P.T, gb, X[:, :ng].T)
    np.add.at(P.T, wb, X[:, ng:ng + nw].T)
    np.subtract.at(P.T, db, X[:, ng + nw:].T)
    return P


def _flows(case: NetworkCase, P: np.ndarray, outage: int | None) -> np.ndarray:
    """B-theta solve for each row of ``P``; the slack absorbs any imbalance."""
    if outage is not None and not case.is_connected(outage):
        raise IslandingError(f"outage of line {outage} islands the network")
    A, b = case.incidence(outage)
    Bbus = A.T @ (b[:, None] * A)
    keep = [i for i in range(len(case.buses)) if i != case.slack]
    theta = np.zeros_like(P)
    if keep:
        theta[:, keep] = np.linalg.solve(Bbus[np.ix_(keep, keep)], P[:, keep].T).T
    return (theta @ A.T) * b


def dc_power_flow(case: NetworkCase, scenario: OperatingScenario,
                  outage: int | None = None) -> np.ndarray:
    """Per-line MW flows (case line order) with ``outage`` removed.

    The outaged line carries zero flow. Raises :class:`IslandingError` if the
    outage disconnects the graph.
    """
    scenario.check(case)
    if outage is not None and outage not in case.line_index:
        raise CaseError("outage", f"unknown line id {outage}")
    return _flows(case, bus_injections(case, scenario.vector), outage)[0]


def _outage_of(h: Contingency) -> int | None:
    if h.kind == "external":
        raise ValueError(f"contingency {h.id} is external; its label must be supplied")
    return h.line if h.kind == "line_outage" else None


def _thermal_ok(case: NetworkCase, flows: np.ndarray) -> np.ndarray:
    limits = np.array([l.thermal_limit for l in case.lines])
    return np.all(np.abs(flows) <= limits + THERMAL_TOL, axis=-1)


def assess_scenario(case: NetworkCase, scenario: OperatingScenario, contingency: Contingency) -> int:
    """1 if every line stays within its thermal limit under ``contingency``, else 0.

    Islanding counts as unsafe.
    """
    try:
        flows = dc_power_flow(case, scenario, _outage_of(contingency))
    except IslandingError:
        return 0
    return int(_thermal_ok(case, flows))


@dataclass
class SecurityLabelTable:
    """Labels ``S_h^(i)`` (1 safe, 0 unsafe) for every scenario and contingency."""

    scenario_ids: list[str]
    contingency_ids: list[str]
    labels: np.ndarray  # (scenarios, contingencies) int
    sources: dict[str, str] = field(default_factory=dict)  # contingency -> computed|external

    @property
    def aggregate(self) -> np.ndarray:
        if self.labels.shape[1] == 0:
            return np.ones(len(self.scenario_ids), dtype=int)
        return np.all(self.labels == 1, axis=1).astype(int)

    def label(self, scenario_id: str, contingency_id: str) -> int:
        i = self.scenario_ids.index(scenario_id)
        return int(self.labels[i, self.contingency_ids.index(contingency_id)])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["scenario_id"] + [f"label_{h}" for h in self.contingency_ids] + ["aggregate"])
        agg = self.aggregate
        for k, sid in enumerate(self.scenario_ids):
            w.writerow([sid] + [int(v) for v in self.labels[k]] + [int(agg[k])])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, source: str = "<labels>") -> "SecurityLabelTable":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if header[0] != "scenario_id" or header[-1] != "aggregate":
            raise CaseError(f"{source}:1", "expected scenario_id, label_<h>..., aggregate")
        hs = [h[len("label_"):] for h in header[1:-1]]
        ids, rows = [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            try:
                vals = [int(v) for v in rec[1:-1]]
            except ValueError:
                raise CaseError(f"{source}:{lineno}", "labels must be 0 or 1") from None
            ids.append(rec[0])
            rows.append(vals)
        labels = np.array(rows, dtype=int).reshape(len(rows), len(hs))
        return cls(ids, hs, labels, {h: "file" for h in hs})


def label_dataset(case: NetworkCase, table: ScenarioTable,
                  contingencies: list[Contingency] | None = None) -> SecurityLabelTable:
    """Label every scenario under every contingency.

    External ``label_<h>`` columns in ``table`` override computed labels for
    ``h``; columns naming a contingency unknown to the case are passed through
    as extra external contingencies. A blank cell in an external column, or an
    ``external`` contingency without a column, is an error.
    """
    if contingencies is None:
        contingencies = list(case.contingencies)
    known = {h.id for h in contingencies}
    extra = [h for h in table.labels if h not in known]
    if extra:
        log.info("passing through external label columns for %s", extra)
    order = [h.id for h in contingencies] + extra
    kinds = {h.id: h for h in contingencies}

    missing = [f"label_{h.id}" for h in contingencies if h.kind == "external" and h.id not in table.labels]
    blank = [f"label_{h}" for h, v in table.labels.items() if np.any(v < 0)]
    if missing or blank:
        parts = []
        if missing:
            parts.append(f"missing external label columns {missing}")
        if blank:
            parts.append(f"blank cells in {blank}")
        raise CaseError("labels", "; ".join(parts))

    n = len(table)
    labels = np.zeros((n, len(order)), dtype=int)
    sources = {}
    P = bus_injections(case, table.X) if n else np.zeros((0, len(case.buses)))
    for k, hid in enumerate(order):
        if hid in table.labels:
            labels[:, k] = table.labels[hid]
            sources[hid] = "external"
            continue
        try:
            flows = _flows(case, P, _outage_of(kinds[hid]))
        except IslandingError:
            labels[:, k] = 0
        else:
            labels[:, k] = _thermal_ok(case, flows).astype(int)
        sources[hid] = "computed"
    return SecurityLabelTable(list(table.ids), order, labels, sources)
