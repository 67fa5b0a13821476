"""Network case model, DC power-transfer factors and corridor flows.

A case is a single JSON document::

    {"buses": [{"id": 1, "slack": true}, ...],
     "lines": [{"id": 1, "from": 1, "to": 2, "x": 0.1, "limit_mw": 100}, ...],
     "generators": [{"id": "G1", "bus": 1, "pmin": 0, "pmax": 200, "a": 0.01,
                     "b": 20, "c": 100, "startup": 50, "ramp_up": 100,
                     "ramp_down": 100, "min_up": 1, "min_down": 1}, ...],
     "wind": [{"id": "W1", "bus": 2, "available": [30, 40]}, ...],
     "loads": [{"id": "D1", "bus": 2, "demand": [100, 120]}, ...],
     "corridors": [{"id": "S1", "members": [{"line": 1, "dir": 1}]}, ...],
     "contingencies": [{"id": "n0", "kind": "none"},
                       {"id": "l1", "kind": "line_outage", "line": 1}, ...],
     "horizon": 2}

Line flow from ``from`` to ``to`` is positive; a corridor member's ``dir``
multiplies its line flow. The forward corridor direction is therefore the
member-oriented sum, and upper limits apply to it.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse.csgraph import connected_components
import scipy.sparse as sp


class CaseError(ValueError):
    """Raised for schema or semantic problems in a case or scenario document.

    ``path`` locates the offending element, e.g. ``corridors[0].members[1].line``.
    """

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class StructureError(ValueError):
    """The network cannot support a DC solve (singular susceptance matrix)."""


@dataclass(frozen=True)
class Bus:
    id: int
    is_slack: bool = False


@dataclass(frozen=True)
class Line:
    id: int
    from_bus: int
    to_bus: int
    reactance: float
    thermal_limit: float


@dataclass(frozen=True)
class Generator:
    id: str
    bus: int
    p_min: float
    p_max: float
    cost_a: float = 0.0
    cost_b: float = 0.0
    cost_c: float = 0.0
    startup_cost: float = 0.0
    ramp_up: float = math.inf
    ramp_down: float = math.inf
    min_up: int = 1
    min_down: int = 1

    def cost(self, p: float) -> float:
        return self.cost_a * p * p + self.cost_b * p + self.cost_c


@dataclass(frozen=True)
class WindUnit:
    id: str
    bus: int
    available: tuple[float, ...]


@dataclass(frozen=True)
class Load:
    id: str
    bus: int
    demand: tuple[float, ...]


@dataclass(frozen=True)
class Corridor:
    id: str
    members: tuple[tuple[int, int], ...]  # (line id, orientation +1/-1)


@dataclass(frozen=True)
class Contingency:
    """Anticipated contingency ``h``: ``none`` (N-0), ``line_outage`` or ``external``.

    External contingencies are never simulated; their labels must be supplied
    with the scenario data (transient or voltage studies run elsewhere).
    """

    id: str
    kind: str = "none"
    line: int | None = None
    description: str = ""


@dataclass(frozen=True)
class NetworkCase:
    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]
    generators: tuple[Generator, ...]
    wind_units: tuple[WindUnit, ...]
    loads: tuple[Load, ...]
    corridors: tuple[Corridor, ...]
    contingencies: tuple[Contingency, ...]
    horizon: int
    bus_index: dict = field(compare=False, repr=False, default_factory=dict)
    line_index: dict = field(compare=False, repr=False, default_factory=dict)

    @property
    def slack(self) -> int:
        return next(i for i, b in enumerate(self.buses) if b.is_slack)

    @property
    def n_features(self) -> int:
        return len(self.generators) + len(self.wind_units) + len(self.loads)

    def feature_names(self) -> list[str]:
        return ([f"g_{g.id}" for g in self.generators] + [f"w_{w.id}" for w in self.wind_units]
                + [f"d_{d.id}" for d in self.loads])

    def demand(self) -> np.ndarray:
        """Per-load demand profiles, shape (loads, T)."""
        return np.array([d.demand for d in self.loads], dtype=float).reshape(len(self.loads), self.horizon)

    def wind_available(self) -> np.ndarray:
        return np.array([w.available for w in self.wind_units], dtype=float).reshape(
            len(self.wind_units), self.horizon)

    def incidence(self, outage: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Branch-bus incidence (lines x buses) and branch susceptances.

        The row of an outaged line is zeroed along with its susceptance.
        """
        nl, nb = len(self.lines), len(self.buses)
        A = np.zeros((nl, nb))
        b = np.zeros(nl)
        for k, ln in enumerate(self.lines):
            if outage is not None and ln.id == outage:
                continue
            A[k, self.bus_index[ln.from_bus]] = 1.0
            A[k, self.bus_index[ln.to_bus]] = -1.0
            b[k] = 1.0 / ln.reactance
        return A, b

    def is_connected(self, outage: int | None = None) -> bool:
        nb = len(self.buses)
        rows, cols = [], []
        for ln in self.lines:
            if outage is not None and ln.id == outage:
                continue
            rows.append(self.bus_index[ln.from_bus])
            cols.append(self.bus_index[ln.to_bus])
        g = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(nb, nb))
        n, _ = connected_components(g, directed=False)
        return n == 1

    def corridor_matrix(self) -> np.ndarray:
        """Corridor x line matrix of member orientations."""
        K = np.zeros((len(self.corridors), len(self.lines)))
        for s, cor in enumerate(self.corridors):
            for line_id, sign in cor.members:
                K[s, self.line_index[line_id]] = sign
        return K

    def element_buses(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        bi = self.bus_index
        return (np.array([bi[g.bus] for g in self.generators], dtype=int),
                np.array([bi[w.bus] for w in self.wind_units], dtype=int),
                np.array([bi[d.bus] for d in self.loads], dtype=int))


# ---------------------------------------------------------------- parsing

def _req(obj, key, path, kind=None):
    if not isinstance(obj, dict):
        raise CaseError(path, "expected an object")
    if key not in obj:
        raise CaseError(f"{path}.{key}", "missing required field")
    value = obj[key]
    if kind is not None:
        _check_type(value, kind, f"{path}.{key}")
    return value


def _opt(obj, key, default, path, kind=None):
    if key not in obj or obj[key] is None:
        return default
    value = obj[key]
    if kind is not None:
        _check_type(value, kind, f"{path}.{key}")
    return value


def _check_type(value, kind, path):
    if kind == "number":
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    elif kind == "int":
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif kind == "bool":
        ok = isinstance(value, bool)
    elif kind == "list":
        ok = isinstance(value, list)
    elif kind == "id":
        ok = isinstance(value, (int, str)) and not isinstance(value, bool)
    else:
        raise AssertionError(kind)
    if not ok:
        raise CaseError(path, f"expected {kind}, got {type(value).__name__}")


def _profile(obj, key, path):
    values = _req(obj, key, path, "list")
    for t, v in enumerate(values):
        _check_type(v, "number", f"{path}.{key}[{t}]")
        if v < 0:
            raise CaseError(f"{path}.{key}[{t}]", "must be >= 0")
    return tuple(float(v) for v in values)


def case_from_dict(doc: dict) -> NetworkCase:
    """Validate a decoded case document and build a :class:`NetworkCase`."""
    if not isinstance(doc, dict):
        raise CaseError("", "case document must be a JSON object")

    buses = []
    for k, b in enumerate(_req(doc, "buses", "", "list")):
        p = f"buses[{k}]"
        buses.append(Bus(int(_req(b, "id", p, "int")), bool(_opt(b, "slack", False, p, "bool"))))
    if not buses:
        raise CaseError("buses", "at least one bus required")
    bus_index = {}
    for k, b in enumerate(buses):
        if b.id in bus_index:
            raise CaseError(f"buses[{k}].id", f"duplicate bus id {b.id}")
        bus_index[b.id] = k
    n_slack = sum(b.is_slack for b in buses)
    if n_slack != 1:
        raise CaseError("buses", f"exactly one slack bus required, found {n_slack}")

    def bus_ref(value, path):
        if value not in bus_index:
            raise CaseError(path, f"unknown bus id {value}")
        return value

    lines = []
    line_index = {}
    for k, ln in enumerate(_req(doc, "lines", "", "list")):
        p = f"lines[{k}]"
        lid = int(_req(ln, "id", p, "int"))
        fb = bus_ref(_req(ln, "from", p, "int"), f"{p}.from")
        tb = bus_ref(_req(ln, "to", p, "int"), f"{p}.to")
        x = float(_req(ln, "x", p, "number"))
        lim = float(_req(ln, "limit_mw", p, "number"))
        if fb == tb:
            raise CaseError(p, "from and to bus must differ")
        if x <= 0:
            raise CaseError(f"{p}.x", "reactance must be > 0")
        if lim <= 0:
            raise CaseError(f"{p}.limit_mw", "thermal limit must be > 0")
        if lid in line_index:
            raise CaseError(f"{p}.id", f"duplicate line id {lid}")
        line_index[lid] = k
        lines.append(Line(lid, fb, tb, x, lim))

    gens = []
    for k, g in enumerate(_opt(doc, "generators", [], "", "list")):
        p = f"generators[{k}]"
        pmin = float(_opt(g, "pmin", 0.0, p, "number"))
        pmax = float(_req(g, "pmax", p, "number"))
        if not 0 <= pmin <= pmax:
            raise CaseError(p, f"need 0 <= pmin <= pmax, got pmin={pmin}, pmax={pmax}")
        gen = Generator(
            id=str(_req(g, "id", p, "id")),
            bus=bus_ref(_req(g, "bus", p, "int"), f"{p}.bus"),
            p_min=pmin, p_max=pmax,
            cost_a=float(_opt(g, "a", 0.0, p, "number")),
            cost_b=float(_opt(g, "b", 0.0, p, "number")),
            cost_c=float(_opt(g, "c", 0.0, p, "number")),
            startup_cost=float(_opt(g, "startup", 0.0, p, "number")),
            ramp_up=float(_opt(g, "ramp_up", math.inf, p, "number")),
            ramp_down=float(_opt(g, "ramp_down", math.inf, p, "number")),
            min_up=int(_opt(g, "min_up", 1, p, "int")),
            min_down=int(_opt(g, "min_down", 1, p, "int")),
        )
        for name in ("cost_a", "cost_b", "cost_c", "startup_cost"):
            if getattr(gen, name) < 0:
                raise CaseError(p, f"{name} must be >= 0")
        if gen.ramp_up <= 0 or gen.ramp_down <= 0:
            raise CaseError(p, "ramp limits must be > 0")
        if gen.min_up < 1 or gen.min_down < 1:
            raise CaseError(p, "min_up and min_down must be >= 1")
        gens.append(gen)

    winds = []
    for k, w in enumerate(_opt(doc, "wind", [], "", "list")):
        p = f"wind[{k}]"
        winds.append(WindUnit(str(_req(w, "id", p, "id")), bus_ref(_req(w, "bus", p, "int"), f"{p}.bus"),
                              _profile(w, "available", p)))
    loads = []
    for k, d in enumerate(_opt(doc, "loads", [], "", "list")):
        p = f"loads[{k}]"
        loads.append(Load(str(_req(d, "id", p, "id")), bus_ref(_req(d, "bus", p, "int"), f"{p}.bus"),
                          _profile(d, "demand", p)))
    for group, items in (("generators", gens), ("wind", winds), ("loads", loads)):
        seen = set()
        for k, it in enumerate(items):
            if it.id in seen:
                raise CaseError(f"{group}[{k}].id", f"duplicate id {it.id}")
            seen.add(it.id)

    lengths = {len(x.available) for x in winds} | {len(x.demand) for x in loads}
    horizon = _opt(doc, "horizon", None, "", "int")
    if horizon is None:
        if len(lengths) > 1:
            raise CaseError("horizon", f"profiles have differing lengths {sorted(lengths)}")
        horizon = lengths.pop() if lengths else 1
    if horizon < 1:
        raise CaseError("horizon", "must be >= 1")
    for group, items, attr in (("wind", winds, "available"), ("loads", loads, "demand")):
        for k, it in enumerate(items):
            if len(getattr(it, attr)) != horizon:
                raise CaseError(f"{group}[{k}].{attr}",
                                f"profile length {len(getattr(it, attr))} != horizon {horizon}")

    corridors = []
    seen = set()
    for k, c in enumerate(_opt(doc, "corridors", [], "", "list")):
        p = f"corridors[{k}]"
        cid = str(_req(c, "id", p, "id"))
        if cid in seen:
            raise CaseError(f"{p}.id", f"duplicate corridor id {cid}")
        seen.add(cid)
        members = []
        used = set()
        raw = _req(c, "members", p, "list")
        if not raw:
            raise CaseError(f"{p}.members", "corridor needs at least one member line")
        for m, mem in enumerate(raw):
            mp = f"{p}.members[{m}]"
            lid = _req(mem, "line", mp, "int")
            if lid not in line_index:
                raise CaseError(f"{mp}.line", f"corridor {cid} references unknown line id {lid}")
            if lid in used:
                raise CaseError(f"{mp}.line", f"line {lid} appears twice in corridor {cid}")
            used.add(lid)
            sign = _opt(mem, "dir", 1, mp, "int")
            if sign not in (1, -1):
                raise CaseError(f"{mp}.dir", "orientation must be +1 or -1")
            members.append((lid, sign))
        corridors.append(Corridor(cid, tuple(members)))

    case = NetworkCase(tuple(buses), tuple(lines), tuple(gens), tuple(winds), tuple(loads),
                       tuple(corridors), (), int(horizon), bus_index, line_index)
    if not case.is_connected():
        raise CaseError("lines", "network graph is not connected")

    contingencies = []
    seen = set()
    for k, h in enumerate(_opt(doc, "contingencies", [], "", "list")):
        p = f"contingencies[{k}]"
        hid = str(_req(h, "id", p, "id"))
        if hid in seen:
            raise CaseError(f"{p}.id", f"duplicate contingency id {hid}")
        seen.add(hid)
        kind = _opt(h, "kind", "none", p)
        if kind not in ("none", "line_outage", "external"):
            raise CaseError(f"{p}.kind", f"unknown contingency kind {kind!r}")
        line = None
        if kind == "line_outage":
            line = _req(h, "line", p, "int")
            if line not in line_index:
                raise CaseError(f"{p}.line", f"unknown line id {line}")
            if not case.is_connected(outage=line):
                raise CaseError(f"{p}.line", f"outage of line {line} islands the network")
        contingencies.append(Contingency(hid, kind, line, str(_opt(h, "description", "", p))))

    return NetworkCase(case.buses, case.lines, case.generators, case.wind_units, case.loads,
                       case.corridors, tuple(contingencies), case.horizon, bus_index, line_index)


def parse_case(text: str) -> NetworkCase:
    """Parse a JSON case document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CaseError(f"line {exc.lineno}", f"invalid JSON: {exc.msg}") from exc
    return case_from_dict(doc)


def load_case(path) -> NetworkCase:
    return parse_case(Path(path).read_text())


def case_to_dict(case: NetworkCase) -> dict:
    def num(v):
        return None if math.isinf(v) else v

    return {
        "buses": [{"id": b.id, "slack": b.is_slack} for b in case.buses],
        "lines": [{"id": l.id, "from": l.from_bus, "to": l.to_bus, "x": l.reactance,
                   "limit_mw": l.thermal_limit} for l in case.lines],
        "generators": [{"id": g.id, "bus": g.bus, "pmin": g.p_min, "pmax": g.p_max, "a": g.cost_a,
                        "b": g.cost_b, "c": g.cost_c, "startup": g.startup_cost,
                        "ramp_up": num(g.ramp_up), "ramp_down": num(g.ramp_down),
                        "min_up": g.min_up, "min_down": g.min_down} for g in case.generators],
        "wind": [{"id": w.id, "bus": w.bus, "available": list(w.available)} for w in case.wind_units],
        "loads": [{"id": d.id, "bus": d.bus, "demand": list(d.demand)} for d in case.loads],
        "corridors": [{"id": c.id, "members": [{"line": l, "dir": s} for l, s in c.members]}
                      for c in case.corridors],
        "contingencies": [{k: v for k, v in (("id", h.id), ("kind", h.kind), ("line", h.line),
                                                 ("description", h.description)) if v not in (None, "")}
                          for h in case.contingencies],
        "horizon": case.horizon,
    }


# ---------------------------------------------------------------- PTDF

@dataclass(frozen=True)
class PTDFMatrix:
    """Bus-level transfer factors (lines x buses) and their element-level views.

    ``bus[l, b]`` is the MW flow on line ``l`` per MW injected at bus ``b`` and
    withdrawn at the slack. Element factors are columns of ``bus`` picked by the
    element's bus.
    """

    bus: np.ndarray
    gen: np.ndarray
    wind: np.ndarray
    load: np.ndarray
    line_ids: tuple[int, ...]

    def entries(self, case: NetworkCase) -> dict[tuple[str, int], float]:
        out = {}
        for group, mat, items in (("g", self.gen, case.generators), ("w", self.wind, case.wind_units),
                                  ("d", self.load, case.loads)):
            for e, item in enumerate(items):
                for l, lid in enumerate(self.line_ids):
                    out[(f"{group}_{item.id}", lid)] = float(mat[l, e])
        return out


def bus_ptdf(case: NetworkCase, outage: int | None = None) -> np.ndarray:
    A, b = case.incidence(outage)
    slack = case.slack
    Bf = b[:, None] * A
    Bbus = A.T @ Bf
    keep = [i for i in range(len(case.buses)) if i != slack]
    H = np.zeros((len(case.lines), len(case.buses)))
    if keep:
        Bred = Bbus[np.ix_(keep, keep)]
        try:
            # Solve rather than invert; Bred is symmetric positive definite when connected.
            X = np.linalg.solve(Bred, np.eye(len(keep)))
        except np.linalg.LinAlgError as exc:
            raise StructureError("singular susceptance matrix (disconnected network)") from exc
        if not np.all(np.isfinite(X)):
            raise StructureError("singular susceptance matrix (disconnected network)")
        H[:, keep] = Bf[:, keep] @ X
    return H


def compute_ptdf(case: NetworkCase) -> PTDFMatrix:
    if not case.is_connected():
        raise StructureError("network is disconnected; PTDF undefined")
    H = bus_ptdf(case)
    if np.max(np.abs(H), initial=0.0) > 1 + 1e-9:
        raise StructureError("transfer factor magnitude exceeds 1; check line data")
    gb, wb, db = case.element_buses()
    return PTDFMatrix(H, H[:, gb], H[:, wb], H[:, db], tuple(l.id for l in case.lines))


# ---------------------------------------------------------------- scenarios

@dataclass(frozen=True)
class OperatingScenario:
    """One operating mode ``[P_g, P_w, P_d]``; a generator at 0 MW is off."""

    id: str
    p_g: np.ndarray
    p_w: np.ndarray
    p_d: np.ndarray

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.p_g, self.p_w, self.p_d])

    def check(self, case: NetworkCase) -> None:
        dims = (len(case.generators), len(case.wind_units), len(case.loads))
        got = (len(self.p_g), len(self.p_w), len(self.p_d))
        if dims != got:
            raise CaseError(f"scenario {self.id}", f"dimension mismatch: expected {dims}, got {got}")
        if np.any(self.vector < 0):
            raise CaseError(f"scenario {self.id}", "negative MW entry")


def scenario_from_vector(case: NetworkCase, sid, vec) -> OperatingScenario:
    vec = np.asarray(vec, dtype=float)
    ng, nw = len(case.generators), len(case.wind_units)
    sc = OperatingScenario(str(sid), vec[:ng], vec[ng:ng + nw], vec[ng + nw:])
    sc.check(case)
    return sc


def corridor_sensitivity(case: NetworkCase, ptdf: PTDFMatrix) -> np.ndarray:
    """Corridor x feature matrix mapping a scenario vector to corridor flows.

    Loads enter with a negative sign (withdrawals).
    """
    K = case.corridor_matrix()
    return np.hstack([K @ ptdf.gen, K @ ptdf.wind, -(K @ ptdf.load)])


def corridor_flow(scenario: OperatingScenario, ptdf: PTDFMatrix, case: NetworkCase) -> np.ndarray:
    """Signed corridor flows (MW) of one scenario."""
    scenario.check(case)
    line = ptdf.gen @ scenario.p_g + ptdf.wind @ scenario.p_w - ptdf.load @ scenario.p_d
    return case.corridor_matrix() @ line


def corridor_flows(X: np.ndarray, ptdf: PTDFMatrix, case: NetworkCase) -> np.ndarray:
    """Batch version: rows of ``X`` are scenario vectors; returns (n, corridors)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != case.n_features:
        raise CaseError("scenarios", f"expected {case.n_features} columns, got {X.shape[1]}")
    return X @ corridor_sensitivity(case, ptdf).T


# ---------------------------------------------------------------- scenario CSV

@dataclass
class ScenarioTable:
    """Scenario dataset as read from CSV: ids, a feature matrix and optional labels."""

    ids: list[str]
    X: np.ndarray
    labels: dict[str, np.ndarray] = field(default_factory=dict)

    def __len__(self):
        return len(self.ids)

    def scenario(self, case: NetworkCase, k: int) -> OperatingScenario:
        return scenario_from_vector(case, self.ids[k], self.X[k])

    def scenarios(self, case: NetworkCase) -> list[OperatingScenario]:
        return [self.scenario(case, k) for k in range(len(self.ids))]


def fmt_mw(v: float) -> str:
    """Stable text form for MW values in CSV output."""
    v = float(v)
    if v == 0:
        return "0"
    return format(round(v, 6), ".6f").rstrip("0").rstrip(".")


def read_scenarios(text: str, case: NetworkCase, source: str = "<scenarios>") -> ScenarioTable:
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise CaseError(f"{source}:1", "empty scenario file") from None
    if not header or header[0] != "scenario_id":
        raise CaseError(f"{source}:1", "first column must be scenario_id")
    names = case.feature_names()
    col = {h: k for k, h in enumerate(header)}
    if len(col) != len(header):
        raise CaseError(f"{source}:1", "duplicate column names")
    missing = [n for n in names if n not in col]
    if missing:
        raise CaseError(f"{source}:1", f"missing columns {missing}")
    label_cols = [h for h in header if h.startswith("label_")]
    unknown = [h for h in header[1:] if h not in names and h not in label_cols]
    if unknown:
        raise CaseError(f"{source}:1", f"unrecognized columns {unknown}")
    idx = [col[n] for n in names]
    ids, rows = [], []
    raw_labels = {h[len("label_"):]: [] for h in label_cols}
    for lineno, rec in enumerate(reader, start=2):
        if not rec or all(not c.strip() for c in rec):
            continue
        if len(rec) != len(header):
            raise CaseError(f"{source}:{lineno}", f"expected {len(header)} fields, got {len(rec)}")
        try:
            vals = [float(rec[k]) for k in idx]
        except ValueError as exc:
            raise CaseError(f"{source}:{lineno}", f"non-numeric MW value ({exc})") from None
        if any(v < 0 or not math.isfinite(v) for v in vals):
            raise CaseError(f"{source}:{lineno}", "MW values must be finite and >= 0")
        ids.append(rec[0].strip())
        rows.append(vals)
        for h in label_cols:
            cell = rec[col[h]].strip()
            if cell not in ("", "0", "1"):
                raise CaseError(f"{source}:{lineno}", f"{h} must be 0 or 1, got {cell!r}")
            raw_labels[h[len("label_"):]].append(-1 if cell == "" else int(cell))
    if len(set(ids)) != len(ids):
        raise CaseError(source, "duplicate scenario_id values")
    X = np.array(rows, dtype=float).reshape(len(rows), len(names))
    labels = {k: np.array(v, dtype=int) for k, v in raw_labels.items()}
    return ScenarioTable(ids, X, labels)


def load_scenarios(path, case: NetworkCase) -> ScenarioTable:
    return read_scenarios(Path(path).read_text(), case, source=str(path))


def write_scenarios(table: ScenarioTable, case: NetworkCase) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    label_names = list(table.labels)
    w.writerow(["scenario_id"] + case.feature_names() + [f"label_{h}" for h in label_names])
    for k, sid in enumerate(table.ids):
        labs = []
        for h in label_names:
            v = int(table.labels[h][k])
            labs.append("" if v < 0 else str(v))
        w.writerow([sid] + [fmt_mw(v) for v in table.X[k]] + labs)
    return buf.getvalue()
