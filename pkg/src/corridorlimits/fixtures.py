"""Built-in cases and the seeded synthetic two-corridor scenario generator.

``two_corridor_case`` is a 6-bus system with a receiving area (buses 1, 2)
fed by two exporting areas: A (buses 3, 4) through corridor ``A`` and B
(buses 5, 6) through corridor ``B``. A weak tie 4-6 couples the areas, so
corridor ``A``'s safe export depends on what ``B`` is doing.

``synthetic_scenarios`` draws load-scaled operating points for that case:
one system-wide load factor per scenario, independent wind draws per area,
random thermal commitment and output in the exporting areas, with the
receiving-area unit balancing.
"""

from __future__ import annotations

import numpy as np

from .clustering import RNG_STREAM as STREAM_CLUSTERING  # noqa: F401
from .netcase import NetworkCase, ScenarioTable, case_from_dict

# named sub-streams derived from the global seed
STREAM_SCENARIOS = 1
STREAM_RANDOM_CASE = 3


def substream(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(stream)])


def three_bus_case(horizon: int = 1) -> NetworkCase:
    """Triangle of equal reactances; bus 1 is the slack."""
    T = horizon
    return case_from_dict({
        "buses": [{"id": 1, "slack": True}, {"id": 2}, {"id": 3}],
        "lines": [{"id": 1, "from": 1, "to": 2, "x": 0.1, "limit_mw": 100},
                  {"id": 2, "from": 2, "to": 3, "x": 0.1, "limit_mw": 100},
                  {"id": 3, "from": 1, "to": 3, "x": 0.1, "limit_mw": 100}],
        "generators": [{"id": "G1", "bus": 1, "pmin": 0, "pmax": 300, "a": 0.01, "b": 20, "c": 50},
                       {"id": "G2", "bus": 2, "pmin": 0, "pmax": 150, "a": 0.02, "b": 15, "c": 30}],
        "wind": [{"id": "W3", "bus": 3, "available": [40.0] * T}],
        "loads": [{"id": "D2", "bus": 2, "demand": [60.0] * T},
                  {"id": "D3", "bus": 3, "demand": [90.0] * T}],
        "corridors": [{"id": "S1", "members": [{"line": 1, "dir": 1}, {"line": 3, "dir": 1}]}],
        "contingencies": [{"id": "n0", "kind": "none"},
                          {"id": "l1", "kind": "line_outage", "line": 1}],
        "horizon": T,
    })


SIX_BUS_DEMAND = {"D1": [110.0, 130.0, 150.0, 140.0], "D2": [300.0, 350.0, 410.0, 390.0],
                  "D4": [20.0, 25.0, 30.0, 28.0], "D6": [20.0, 25.0, 30.0, 28.0]}
SIX_BUS_WIND = {"W4": [190.0, 170.0, 150.0, 200.0], "W6": [160.0, 200.0, 170.0, 130.0]}


def two_corridor_doc(horizon: int = 4) -> dict:
    """Case document of the 6-bus two-corridor system (profiles cycle past 4 periods)."""
    def prof(vals):
        return [vals[t % len(vals)] for t in range(horizon)]

    return {
        "buses": [{"id": 1, "slack": True}] + [{"id": b} for b in range(2, 7)],
        "lines": [
            {"id": 1, "from": 1, "to": 2, "x": 0.05, "limit_mw": 500},
            {"id": 2, "from": 3, "to": 1, "x": 0.20, "limit_mw": 160},
            {"id": 3, "from": 4, "to": 2, "x": 0.20, "limit_mw": 160},
            {"id": 4, "from": 3, "to": 4, "x": 0.10, "limit_mw": 250},
            {"id": 5, "from": 5, "to": 2, "x": 0.20, "limit_mw": 160},
            {"id": 6, "from": 6, "to": 1, "x": 0.20, "limit_mw": 160},
            {"id": 7, "from": 5, "to": 6, "x": 0.10, "limit_mw": 250},
            {"id": 8, "from": 4, "to": 6, "x": 0.30, "limit_mw": 90},
        ],
        "generators": [
            {"id": "G1", "bus": 1, "pmin": 50, "pmax": 600, "a": 0.004, "b": 48, "c": 400,
             "startup": 800, "ramp_up": 300, "ramp_down": 300, "min_up": 2, "min_down": 2},
            {"id": "G3", "bus": 3, "pmin": 40, "pmax": 250, "a": 0.006, "b": 18, "c": 150,
             "startup": 300, "ramp_up": 150, "ramp_down": 150, "min_up": 2, "min_down": 1},
            {"id": "G5", "bus": 5, "pmin": 40, "pmax": 250, "a": 0.008, "b": 21, "c": 150,
             "startup": 300, "ramp_up": 150, "ramp_down": 150, "min_up": 1, "min_down": 1},
        ],
        "wind": [{"id": w, "bus": int(w[1:]), "available": prof(v)} for w, v in SIX_BUS_WIND.items()],
        "loads": [{"id": d, "bus": int(d[1:]), "demand": prof(v)} for d, v in SIX_BUS_DEMAND.items()],
        "corridors": [
            {"id": "A", "members": [{"line": 2, "dir": 1}, {"line": 3, "dir": 1}]},
            {"id": "B", "members": [{"line": 5, "dir": 1}, {"line": 6, "dir": 1}]},
        ],
        "contingencies": [
            {"id": "n0", "kind": "none"},
            {"id": "l2", "kind": "line_outage", "line": 2},
            {"id": "l5", "kind": "line_outage", "line": 5},
            {"id": "l8", "kind": "line_outage", "line": 8},
        ],
        "horizon": horizon,
    }


def two_corridor_case(horizon: int = 4) -> NetworkCase:
    return case_from_dict(two_corridor_doc(horizon))


def synthetic_scenarios(case: NetworkCase, n: int = 2000, seed: int = 0,
                        load_range=(0.6, 1.25)) -> ScenarioTable:
    """Load-scaled operating points for ``case``.

    Base loads are the first-period demands. Each scenario scales them by one
    factor drawn from ``load_range`` with 3 % per-load noise. Wind draws are
    uniform on ``[0, max available]``. Every generator except the slack-bus
    unit is on with probability 0.9 at a uniform output in ``[p_min, p_max]``;
    the slack-bus unit balances, and if it would drop below its minimum the
    wind and then the other units are backed down.
    """
    rng = substream(seed, STREAM_SCENARIOS)
    gens = case.generators
    slack_bus = case.buses[case.slack].id
    bal = next((i for i, g in enumerate(gens) if g.bus == slack_bus), 0)
    others = [i for i in range(len(gens)) if i != bal]
    base = case.demand()[:, 0] if case.loads else np.zeros(0)
    wmax = case.wind_available().max(axis=1) if case.wind_units else np.zeros(0)
    gb = gens[bal]
    X = np.empty((n, case.n_features))
    for k in range(n):
        alpha = rng.uniform(*load_range)
        d = np.maximum(base * alpha * (1.0 + 0.03 * rng.standard_normal(len(base))), 0.0)
        w = wmax * rng.random(len(wmax))
        p = np.zeros(len(gens))
        for i in others:
            if rng.random() < 0.9:
                p[i] = rng.uniform(gens[i].p_min, gens[i].p_max)
        need = d.sum() - w.sum() - p.sum()
        if need < gb.p_min:
            excess = gb.p_min - need
            cut = min(excess, w.sum())
            if cut > 0:
                w *= 1.0 - cut / w.sum()
            excess -= cut
            for i in others:
                if excess <= 0:
                    break
                room = p[i] - gens[i].p_min if p[i] > 0 else 0.0
                step = min(room, excess)
                p[i] -= step
                excess -= step
            need = d.sum() - w.sum() - p.sum()
        elif need > gb.p_max:
            short = need - gb.p_max
            for i in others:
                if short > 0:
                    new = min(gens[i].p_max, max(gens[i].p_min, p[i] + short))
                    short -= new - p[i]
                    p[i] = new
            need = d.sum() - w.sum() - p.sum()
        p[bal] = max(need, 0.0)
        X[k] = np.concatenate([p, w, d])
    X = np.round(X, 6)
    # rounding may leave a few microwatts of imbalance; park it on the balancing unit
    ng = len(gens)
    nw = len(case.wind_units)
    X[:, bal] = np.round(X[:, bal] + X[:, ng + nw:].sum(axis=1) - X[:, :ng + nw].sum(axis=1), 6)
    X[:, bal] = np.maximum(X[:, bal], 0.0)
    ids = [f"s{k:05d}" for k in range(n)]
    return ScenarioTable(ids, X, {})


# ---------------------------------------------------------------- IEEE 39-bus

_CASE39_LINES = [
    (1, 2, 0.0411, 600), (1, 39, 0.0250, 1000), (2, 3, 0.0151, 500), (2, 25, 0.0086, 500),
    (2, 30, 0.0181, 900), (3, 4, 0.0213, 500), (3, 18, 0.0133, 500), (4, 5, 0.0128, 600),
    (4, 14, 0.0129, 500), (5, 6, 0.0026, 1200), (5, 8, 0.0112, 900), (6, 7, 0.0092, 900),
    (6, 11, 0.0082, 480), (6, 31, 0.0250, 1800), (7, 8, 0.0046, 900), (8, 9, 0.0363, 900),
    (9, 39, 0.0250, 900), (10, 11, 0.0043, 600), (10, 13, 0.0043, 600), (10, 32, 0.0200, 900),
    (12, 11, 0.0435, 500), (12, 13, 0.0435, 500), (13, 14, 0.0101, 600), (14, 15, 0.0217, 600),
    (15, 16, 0.0094, 600), (16, 17, 0.0089, 600), (16, 19, 0.0195, 600), (16, 21, 0.0135, 600),
    (16, 24, 0.0059, 600), (17, 18, 0.0082, 600), (17, 27, 0.0173, 600), (19, 20, 0.0138, 900),
    (19, 33, 0.0142, 900), (20, 34, 0.0180, 900), (21, 22, 0.0140, 900), (22, 23, 0.0096, 600),
    (22, 35, 0.0143, 900), (23, 24, 0.0350, 600), (23, 36, 0.0272, 900), (25, 26, 0.0323, 600),
    (25, 37, 0.0232, 900), (26, 27, 0.0147, 600), (26, 28, 0.0474, 600), (26, 29, 0.0625, 600),
    (28, 29, 0.0151, 600), (29, 38, 0.0156, 1200),
]
_CASE39_GENS = {30: 1040, 31: 646, 32: 725, 33: 652, 34: 508, 35: 687, 36: 580, 37: 564, 38: 865, 39: 1100}
_CASE39_LOADS = {3: 322.0, 4: 500.0, 7: 233.8, 8: 522.0, 12: 7.5, 15: 320.0, 16: 329.0, 18: 158.0,
                 20: 628.0, 21: 274.0, 23: 247.5, 24: 308.6, 25: 224.0, 26: 139.0, 27: 281.0,
                 28: 206.0, 29: 283.5, 31: 9.2, 39: 1104.0}


def ieee39_doc(horizon: int = 24) -> dict:
    """39-bus New England system with wind at buses 17 and 21.

    Network data follow the standard case; costs, ramps and the daily load
    and wind shapes are illustrative.
    """
    shape = [0.72, 0.68, 0.66, 0.65, 0.67, 0.72, 0.80, 0.88, 0.94, 0.97, 0.99, 1.00,
             0.98, 0.97, 0.96, 0.96, 0.98, 1.00, 0.99, 0.96, 0.92, 0.86, 0.80, 0.75]
    wind = [0.80, 0.85, 0.88, 0.90, 0.86, 0.78, 0.66, 0.55, 0.48, 0.42, 0.38, 0.35,
            0.36, 0.40, 0.45, 0.50, 0.55, 0.60, 0.66, 0.72, 0.76, 0.80, 0.82, 0.84]
    prof = lambda s, base: [round(base * s[t % 24], 3) for t in range(horizon)]  # noqa: E731
    gens = []
    for k, (bus, pmax) in enumerate(sorted(_CASE39_GENS.items())):
        gens.append({"id": f"G{bus}", "bus": bus, "pmin": round(0.3 * pmax, 1), "pmax": pmax,
                     "a": round(0.002 + 0.0004 * k, 4), "b": 12 + 2.5 * k, "c": 200 + 20 * k,
                     "startup": 2000 + 150 * k, "ramp_up": round(0.4 * pmax, 1),
                     "ramp_down": round(0.4 * pmax, 1), "min_up": 3, "min_down": 2})
    line_id = {(f, t): i + 1 for i, (f, t, _, _) in enumerate(_CASE39_LINES)}
    return {
        "buses": [{"id": b, "slack": b == 31} for b in range(1, 40)],
        "lines": [{"id": i + 1, "from": f, "to": t, "x": x, "limit_mw": lim}
                  for i, (f, t, x, lim) in enumerate(_CASE39_LINES)],
        "generators": gens,
        "wind": [{"id": "W17", "bus": 17, "available": prof(wind, 400.0)},
                 {"id": "W21", "bus": 21, "available": prof(wind[::-1], 350.0)}],
        "loads": [{"id": f"D{b}", "bus": b, "demand": prof(shape, v)} for b, v in sorted(_CASE39_LOADS.items())],
        "corridors": [
            {"id": "S1", "members": [{"line": line_id[(16, 17)], "dir": -1},
                                     {"line": line_id[(15, 16)], "dir": -1}]},
            {"id": "S2", "members": [{"line": line_id[(16, 19)], "dir": -1},
                                     {"line": line_id[(16, 24)], "dir": -1}]},
        ],
        "contingencies": [{"id": "n0", "kind": "none"}] + [
            {"id": f"l{line_id[e]}", "kind": "line_outage", "line": line_id[e]}
            for e in ((16, 17), (15, 16), (16, 24))],
        "horizon": horizon,
    }


def ieee39_case(horizon: int = 24) -> NetworkCase:
    return case_from_dict(ieee39_doc(horizon))


# ---------------------------------------------------------------- random instances

def random_case(rng: np.random.Generator, n_bus: int = 6, extra_lines: int = 3, horizon: int = 1) -> NetworkCase:
    """Connected random network: a spanning tree plus ``extra_lines`` chords."""
    lines, seen = [], set()
    for b in range(2, n_bus + 1):
        a = int(rng.integers(1, b))
        lines.append((a, b))
        seen.add((a, b))
    tries = 0
    while len(lines) < n_bus - 1 + extra_lines and tries < 100:
        tries += 1
        a, b = sorted(rng.choice(np.arange(1, n_bus + 1), 2, replace=False).tolist())
        if (a, b) not in seen:
            seen.add((a, b))
            lines.append((a, b))
    gb = rng.choice(np.arange(1, n_bus + 1), 2, replace=False)
    return case_from_dict({
        "buses": [{"id": b, "slack": b == 1} for b in range(1, n_bus + 1)],
        "lines": [{"id": i + 1, "from": int(a), "to": int(b), "x": float(rng.uniform(0.05, 0.5)),
                   "limit_mw": 100.0} for i, (a, b) in enumerate(lines)],
        "generators": [{"id": f"G{i}", "bus": int(b), "pmax": 200.0, "b": 10.0 + 5 * i}
                       for i, b in enumerate(gb)],
        "wind": [{"id": "W1", "bus": int(rng.integers(1, n_bus + 1)), "available": [50.0] * horizon}],
        "loads": [{"id": f"D{b}", "bus": b, "demand": [float(rng.uniform(10, 60))] * horizon}
                  for b in range(2, n_bus + 1)],
        "corridors": [{"id": "S1", "members": [{"line": 1, "dir": 1}]}],
        "horizon": horizon,
    })
