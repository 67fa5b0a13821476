"""Unit commitment with corridor transfer limits.

The model minimizes piecewise-linearized quadratic fuel cost, no-load and
startup cost, plus a linear penalty on curtailed wind, subject to

* power balance per period,
* ``p_min * u <= p <= p_max * u``,
* ramp limits, with startup and shutdown ramps equal to ``p_min``,
* minimum up and down times (interval form),
* spinning reserve ``sum(p_max * u - p) >= reserve_fraction * demand``,
* corridor flows written through transfer factors, and
* whichever corridor limits the chosen regime adds.

The initial commitment is left free: period 0 carries no startup, ramp or
minimum-time coupling to the past.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .netcase import NetworkCase, case_to_dict, compute_ptdf, corridor_sensitivity
from .rulegen import SENTINEL, LimitRuleSet
from .solver import LinearProgram, LinExpr, quicksum, solve_mip

REGIMES = ("none", "conservative", "independent", "coupled")


class ModelError(ValueError):
    """Inconsistent model inputs (exit code 2 territory)."""


class UCInfeasible(RuntimeError):
    def __init__(self, message: str, hint: str = ""):
        super().__init__(f"{message}{': ' + hint if hint else ''}")
        self.hint = hint


class SolverLimit(RuntimeError):
    pass


@dataclass(frozen=True)
class UCConfig:
    curtailment_price: float = 200.0
    reserve_fraction: float = 0.0
    cost_linearization_segments: int = 4
    big_m: float | None = None
    limit_regime: str = "none"
    backend: str = "highs"
    mip_gap: float = 1e-9
    time_limit: float | None = None

    def __post_init__(self):
        if self.curtailment_price < 0 or self.reserve_fraction < 0:
            raise ModelError("curtailment_price and reserve_fraction must be >= 0")
        if self.cost_linearization_segments < 1:
            raise ModelError("cost_linearization_segments must be >= 1")
        if self.limit_regime not in REGIMES:
            raise ModelError(f"limit_regime must be one of {REGIMES}")

    def replace(self, **kw) -> "UCConfig":
        d = asdict(self)
        d.update(kw)
        return UCConfig(**d)


def case_hash(case: NetworkCase) -> str:
    return hashlib.sha256(json.dumps(case_to_dict(case), sort_keys=True).encode()).hexdigest()[:16]


def default_big_m(case: NetworkCase) -> float:
    total = sum(g.p_max for g in case.generators) + float(case.wind_available().max(axis=1).sum()
                                                          if case.wind_units else 0.0)
    return 2.0 * total + 1.0


@dataclass
class UCModel:
    case: NetworkCase
    config: UCConfig
    lp: LinearProgram
    p: list  # [g][t] Var
    u: list
    v: list  # startup indicators, [g][t] (None at t = 0)
    pw: list  # [w][t]
    flow: list  # [s][t]
    demand: np.ndarray  # (loads, T)
    available: np.ndarray  # (wind, T)
    sensitivity: np.ndarray  # (corridors, features)
    flow_lo: np.ndarray  # (corridors, T) interval bounds on attainable flow
    flow_hi: np.ndarray
    big_m: float
    static_limits: tuple[np.ndarray, np.ndarray] | None = None
    extras: dict = field(default_factory=dict)

    @property
    def T(self) -> int:
        return self.case.horizon

    def feature_exprs(self, t: int) -> list[LinExpr]:
        """Operating-mode vector of period ``t`` as expressions ``[P_g, P_w, P_d]``."""
        return ([LinExpr.of(self.p[g][t]) for g in range(len(self.p))]
                + [LinExpr.of(self.pw[w][t]) for w in range(len(self.pw))]
                + [LinExpr.of(float(d)) for d in self.demand[:, t]])

    def feature_bounds(self, t: int) -> tuple[np.ndarray, np.ndarray]:
        gens = self.case.generators
        lo = np.concatenate([np.zeros(len(gens)), np.zeros(len(self.pw)), self.demand[:, t]])
        hi = np.concatenate([[g.p_max for g in gens], self.available[:, t], self.demand[:, t]])
        return lo, hi


def _interval(coef: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> tuple[float, float]:
    return (float(np.sum(np.minimum(coef * lo, coef * hi))),
            float(np.sum(np.maximum(coef * lo, coef * hi))))


def build_uc(case: NetworkCase, config: UCConfig, rules: LimitRuleSet | None = None,
             conservative_limits=None) -> UCModel:
    """Assemble the UC program; regime-specific limits are added per ``config``.

    ``conservative_limits`` is ``(upper, lower)`` per corridor and is applied
    for the conservative regime. The independent and coupled regimes only check
    that ``rules`` is present; the switching module adds their constraints.
    """
    regime = config.limit_regime
    if regime == "conservative" and conservative_limits is None:
        raise ModelError("conservative regime needs corridor bounds")
    if regime in ("independent", "coupled") and rules is None:
        raise ModelError(f"{regime} regime needs a limit rule set")
    if rules is not None and list(rules.corridor_ids) != [c.id for c in case.corridors]:
        raise ModelError("rule set corridors do not match the case")

    T = case.horizon
    demand = case.demand()
    avail = case.wind_available()
    total_demand = demand.sum(axis=0) if len(case.loads) else np.zeros(T)
    capacity = sum(g.p_max for g in case.generators) + (avail.sum(axis=0) if len(case.wind_units) else 0.0)
    short = np.flatnonzero(capacity < total_demand - 1e-9)
    if short.size:
        raise UCInfeasible("infeasible by construction",
                           f"capacity below demand in periods {short.tolist()}")
    big_m = config.big_m if config.big_m is not None else default_big_m(case)
    needed = sum(g.p_max for g in case.generators) + float(avail.max(axis=1).sum() if len(case.wind_units) else 0)
    if big_m <= needed:
        raise ModelError(f"big_m {big_m} must exceed total capacity {needed}")

    lp = LinearProgram("uc")
    G, W = len(case.generators), len(case.wind_units)
    p, u, v, pw = [], [], [], []
    obj = LinExpr()
    nseg = config.cost_linearization_segments
    for gi, g in enumerate(case.generators):
        pg, ug, vg = [], [], []
        for t in range(T):
            pgt = lp.add_var(f"p({g.id},{t})", 0.0, g.p_max)
            ugt = lp.add_var(f"u({g.id},{t})", binary=True)
            pg.append(pgt)
            ug.append(ugt)
            lp.add_constraint(pgt - g.p_min * ugt, ">=", 0.0, f"pmin({g.id},{t})")
            lp.add_constraint(pgt - g.p_max * ugt, "<=", 0.0, f"pmax({g.id},{t})")
            span = g.p_max - g.p_min
            cost = g.cost(g.p_min) * ugt
            if span > 0:
                width = span / nseg
                segs = []
                for s in range(nseg):
                    x0 = g.p_min + s * width
                    slope = (g.cost(x0 + width) - g.cost(x0)) / width
                    d = lp.add_var(f"seg({g.id},{t},{s})", 0.0, width)
                    segs.append(d)
                    cost = cost + slope * d
                lp.add_constraint(pgt - g.p_min * ugt - quicksum(segs), "==", 0.0, f"pwl({g.id},{t})")
            else:
                lp.add_constraint(pgt - g.p_min * ugt, "==", 0.0, f"pwl({g.id},{t})")
            obj += cost
            if t == 0:
                vg.append(None)
                continue
            vgt = lp.add_var(f"v({g.id},{t})", binary=True)
            wgt = lp.add_var(f"w({g.id},{t})", 0.0, 1.0)
            vg.append(vgt)
            lp.add_constraint(ugt - ug[t - 1] - vgt + wgt, "==", 0.0, f"logic({g.id},{t})")
            lp.add_constraint(vgt + wgt, "<=", 1.0, f"onoff({g.id},{t})")
            obj += g.startup_cost * vgt
            if math.isfinite(g.ramp_up):
                lp.add_constraint(pgt - pg[t - 1] - g.ramp_up * ug[t - 1] - g.p_min * vgt, "<=", 0.0,
                                  f"rampup({g.id},{t})")
            if math.isfinite(g.ramp_down):
                lp.add_constraint(pg[t - 1] - pgt - g.ramp_down * ugt - g.p_min * wgt, "<=", 0.0,
                                  f"rampdn({g.id},{t})")
        p.append(pg)
        u.append(ug)
        v.append(vg)
    # minimum up / down times need the shutdown indicators, re-fetched by name
    for g in case.generators:
        for t in range(1, T):
            if g.min_up > 1:
                window = [lp.var(f"v({g.id},{tau})") for tau in range(max(1, t - g.min_up + 1), t + 1)]
                lp.add_constraint(quicksum(window) - lp.var(f"u({g.id},{t})"), "<=", 0.0,
                                  f"minup({g.id},{t})")
            if g.min_down > 1:
                window = [lp.var(f"w({g.id},{tau})") for tau in range(max(1, t - g.min_down + 1), t + 1)]
                lp.add_constraint(quicksum(window) + lp.var(f"u({g.id},{t})"), "<=", 1.0,
                                  f"mindn({g.id},{t})")

    for wi, wu in enumerate(case.wind_units):
        row = []
        for t in range(T):
            x = lp.add_var(f"pw({wu.id},{t})", 0.0, float(avail[wi, t]))
            row.append(x)
            obj += config.curtailment_price * (float(avail[wi, t]) - x)
        pw.append(row)

    for t in range(T):
        supply = quicksum(p[g][t] for g in range(G)) + quicksum(pw[w][t] for w in range(W))
        lp.add_constraint(supply, "==", float(total_demand[t]), f"balance({t})")
        if config.reserve_fraction > 0:
            head = quicksum(case.generators[g].p_max * u[g][t] - p[g][t] for g in range(G))
            lp.add_constraint(head, ">=", config.reserve_fraction * float(total_demand[t]), f"reserve({t})")

    sens = corridor_sensitivity(case, compute_ptdf(case)) if case.corridors else np.zeros((0, case.n_features))
    flow = []
    S = len(case.corridors)
    flow_lo = np.zeros((S, T))
    flow_hi = np.zeros((S, T))
    model = UCModel(case, config, lp, p, u, v, pw, [], demand, avail, sens, flow_lo, flow_hi, big_m)
    for s, cor in enumerate(case.corridors):
        row = []
        for t in range(T):
            f = lp.add_var(f"flow({cor.id},{t})", -math.inf, math.inf)
            expr = quicksum(float(a) * x for a, x in zip(sens[s], model.feature_exprs(t)) if a != 0.0)
            lp.add_constraint(f - expr, "==", 0.0, f"flowdef({cor.id},{t})")
            lo, hi = model.feature_bounds(t)
            flow_lo[s, t], flow_hi[s, t] = _interval(sens[s], lo, hi)
            lp.set_bounds(f, flow_lo[s, t] - 1.0, flow_hi[s, t] + 1.0)
            row.append(f)
        flow.append(row)
    model.flow = flow
    lp.set_objective(obj)

    if regime == "conservative":
        apply_static_limits(model, *conservative_limits)
    return model


def apply_static_limits(model: UCModel, upper, lower) -> UCModel:
    """Add ``lower <= P_s(t) <= upper`` for every corridor and period.

    Sides at or beyond the ``1e9`` sentinel (or infinite) are omitted.
    """
    upper = np.asarray(upper, dtype=float).reshape(-1)
    lower = np.asarray(lower, dtype=float).reshape(-1)
    S = len(model.case.corridors)
    if len(upper) != S or len(lower) != S:
        raise ModelError(f"expected {S} corridor bounds")
    bad = np.flatnonzero(lower > upper)
    if bad.size:
        raise ModelError(f"lower bound exceeds upper bound for corridors {bad.tolist()}")
    for s, cor in enumerate(model.case.corridors):
        for t in range(model.T):
            if upper[s] < SENTINEL:
                model.lp.add_constraint(model.flow[s][t], "<=", float(upper[s]), f"limhi({cor.id},{t})")
            if lower[s] > -SENTINEL:
                model.lp.add_constraint(model.flow[s][t], ">=", float(lower[s]), f"limlo({cor.id},{t})")
    model.static_limits = (upper, lower)
    return model


# ---------------------------------------------------------------- solutions

@dataclass
class UCSolution:
    regime: str
    status: str
    objective: float
    p_g: np.ndarray  # (G, T)
    u_g: np.ndarray
    p_w: np.ndarray  # (W, T)
    flows: np.ndarray  # (S, T)
    demand: np.ndarray  # (D, T)
    mip_gap: float = 0.0
    active_cluster: list | None = None
    active_limits: list | None = None  # per t: {corridor: (lo, hi)}
    sigma_box: list | None = None  # per t: {"j:a|b": box index}
    case_hash: str = ""
    wall_time: float = 0.0

    def dispatch_vector(self, t: int) -> np.ndarray:
        return np.concatenate([self.p_g[:, t], self.p_w[:, t], self.demand[:, t]])

    def to_dict(self, case: NetworkCase, metrics: "DispatchMetrics | None" = None) -> dict:
        def r(x):
            return round(float(x), 6) + 0.0

        periods = []
        for t in range(self.p_g.shape[1]):
            per = {
                "t": t,
                "pg": {g.id: r(self.p_g[i, t]) for i, g in enumerate(case.generators)},
                "ug": {g.id: int(round(self.u_g[i, t])) for i, g in enumerate(case.generators)},
                "pw": {w.id: r(self.p_w[i, t]) for i, w in enumerate(case.wind_units)},
                "flows": {c.id: r(self.flows[i, t]) for i, c in enumerate(case.corridors)},
                "active_cluster": None if self.active_cluster is None else int(self.active_cluster[t]),
                "active_limits": {},
            }
            if self.active_limits is not None:
                per["active_limits"] = {c: [r(max(lo, -SENTINEL)), r(min(hi, SENTINEL))]
                                        for c, (lo, hi) in self.active_limits[t].items()}
            if self.sigma_box is not None:
                per["sigma_box"] = self.sigma_box[t]
            periods.append(per)
        metrics = metrics or compute_metrics(self, case)
        return {
            "regime": self.regime,
            "status": self.status,
            "case_hash": self.case_hash,
            "objective": r(self.objective),
            "periods": periods,
            "metrics": metrics.to_dict(),
        }


def extract_solution(model: UCModel, res) -> UCSolution:
    case = model.case
    T = model.T
    val = res.x
    pg = np.array([[val[model.p[g][t].index] for t in range(T)] for g in range(len(model.p))]).reshape(-1, T)
    ug = np.array([[val[model.u[g][t].index] for t in range(T)] for g in range(len(model.u))]).reshape(-1, T)
    pw = np.array([[val[model.pw[w][t].index] for t in range(T)] for w in range(len(model.pw))]).reshape(-1, T)
    fl = np.array([[val[model.flow[s][t].index] for t in range(T)] for s in range(len(model.flow))]).reshape(-1, T)
    return UCSolution(model.config.limit_regime, res.status, float(res.objective), pg, np.round(ug), pw, fl,
                      model.demand, float(res.mip_gap) if math.isfinite(res.mip_gap) else 0.0,
                      case_hash=case_hash(case), wall_time=res.wall_time)


def solve_model(model: UCModel):
    cfg = model.config
    res = solve_mip(model.lp, gap=cfg.mip_gap, time_limit=cfg.time_limit, backend=cfg.backend)
    if res.status == "infeasible":
        raise UCInfeasible("unit commitment infeasible")
    if res.status in ("time_limit",) and res.x is None:
        raise SolverLimit("solver limit reached without an incumbent")
    if res.x is None or res.status in ("error", "unbounded"):
        raise RuntimeError(f"solver failed with status {res.status}: {res.message}")
    return res


def solve_uc(case: NetworkCase, config: UCConfig, conservative_limits=None) -> UCSolution:
    """Build and solve the UC for the ``none`` or ``conservative`` regime."""
    if config.limit_regime not in ("none", "conservative"):
        raise ModelError("use switching.solve_switching_uc for cluster-dependent regimes")
    model = build_uc(case, config, conservative_limits=conservative_limits)
    sol = extract_solution(model, solve_model(model))
    if model.static_limits is not None:
        up, lo = model.static_limits
        sol.active_limits = [{c.id: (float(lo[s]), float(up[s])) for s, c in enumerate(case.corridors)}
                             for _ in range(case.horizon)]
    return sol


# ---------------------------------------------------------------- metrics

@dataclass
class DispatchMetrics:
    total_cost: float
    consumption_rate: float
    mean_export: dict
    curtailed_mwh: float = 0.0

    def to_dict(self) -> dict:
        return {"total_cost": round(self.total_cost, 6) + 0.0,
                "consumption_rate": round(self.consumption_rate, 9) + 0.0,
                "curtailed_mwh": round(self.curtailed_mwh, 6) + 0.0,
                "mean_export": {k: round(v, 6) + 0.0 for k, v in self.mean_export.items()}}


def compute_metrics(solution: UCSolution, case: NetworkCase) -> DispatchMetrics:
    avail = case.wind_available()
    total_avail = float(avail.sum())
    used = float(solution.p_w.sum())
    rate = 1.0 if total_avail <= 0 else min(1.0, max(0.0, used / total_avail))
    export = {c.id: float(solution.flows[s].mean()) for s, c in enumerate(case.corridors)}
    return DispatchMetrics(float(solution.objective), rate, export, max(0.0, total_avail - used))
