"""Cluster-dependent limit switching inside the unit commitment.

Each period's dispatch ``x(t) = [P_g, P_w, P_d]`` belongs to the cluster whose
raw (MW) center is nearest. Choosing that cluster is itself an optimization,
``min_pi sum_j pi_j * D_j`` with ``sum_j pi_j = 1`` and ``0 <= pi_j <= 1``.
With multipliers ``alpha`` (sum), ``gamma_j >= 0`` (``pi_j >= 0``) and
``beta_j >= 0`` (``pi_j <= 1``), stationarity is
``D_j + alpha - gamma_j + beta_j = 0`` and complementarity makes
``gamma_j * pi_j = 0``, so a cluster with ``pi_j > 0`` attains the smallest
``D``. No multiplier is kept at runtime: with ``pi`` binary the same
condition is written pairwise, for every ``j != j'``,

    D_j - D_j' <= M_jj' * (1 - pi_j).

``D_j - D_j'`` is linear in ``x`` because the quadratic terms cancel, and
``M_jj'`` is its maximum over the dispatch bounds, found by interval
arithmetic. The active cluster's limits are then switched on with the same
big-M pattern. A union of coupled boxes picks one box per period through
binaries ``sigma`` with ``sum(sigma) >= pi_j``.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .clustering import ClusterModel
from .netcase import NetworkCase
from .rulegen import LimitRuleSet
from .solver import LinExpr, quicksum, solve_mip
from .ucmodel import (ModelError, UCConfig, UCInfeasible, UCModel, UCSolution, build_uc,
                      extract_solution, solve_model)

log = logging.getLogger(__name__)

BRUTE_FORCE_GUARD = 4096


@dataclass
class MembershipEncoding:
    centers: np.ndarray  # (k, features) MW
    pi: list  # [t][j] Var
    pair_rows: int = 0
    skipped_rows: int = 0


def distance_diff(c_j: np.ndarray, c_k: np.ndarray, x) -> LinExpr | float:
    """``|x - c_j|^2 - |x - c_k|^2`` as ``-2 (c_j - c_k) . x + |c_j|^2 - |c_k|^2``."""
    coef = -2.0 * (c_j - c_k)
    const = float(c_j @ c_j - c_k @ c_k)
    if isinstance(x, np.ndarray):
        return float(coef @ x) + const
    return quicksum(float(a) * xi for a, xi in zip(coef, x) if a != 0.0) + const


def squared_distances(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d = centers - x[None, :]
    return np.einsum("kl,kl->k", d, d)


def _max_over_box(coef: np.ndarray, const: float, lo: np.ndarray, hi: np.ndarray) -> float:
    return const + float(np.sum(np.maximum(coef * lo, coef * hi)))


def encode_membership(model: UCModel, clusters: ClusterModel) -> MembershipEncoding:
    """Add ``pi_j(t)`` and the pairwise nearest-center constraints to ``model``."""
    C = clusters.raw_centers()
    if C.shape[1] != model.case.n_features:
        raise ModelError(f"cluster centers have {C.shape[1]} features, case has {model.case.n_features}")
    k = len(C)
    lp = model.lp
    enc = MembershipEncoding(C, [])
    for t in range(model.T):
        if k == 1:
            enc.pi.append([lp.add_var(f"pi(0,{t})", 1.0, 1.0)])
            continue
        pis = [lp.add_var(f"pi({j},{t})", binary=True) for j in range(k)]
        enc.pi.append(pis)
        lp.add_constraint(quicksum(pis), "==", 1.0, f"onecluster({t})")
        x = model.feature_exprs(t)
        lo, hi = model.feature_bounds(t)
        for j in range(k):
            for jj in range(k):
                if j == jj:
                    continue
                coef = -2.0 * (C[j] - C[jj])
                const = float(C[j] @ C[j] - C[jj] @ C[jj])
                M = _max_over_box(coef, const, lo, hi)
                if M <= 0:
                    enc.skipped_rows += 1  # cluster j is always at least as close as jj
                    continue
                scale = max(float(np.max(np.abs(coef))), 1e-12)
                expr = distance_diff(C[j], C[jj], x) + M * pis[j]
                lp.add_constraint(expr * (1.0 / scale), "<=", M / scale, f"member({j},{jj},{t})")
                enc.pair_rows += 1
    return enc


def _limit_rows(model: UCModel, f, t: int, s: int, hi: float, lo: float, switch, tag: str):
    """``lo <= f <= hi`` enforced only when ``switch`` (a binary or None) is 1."""
    lp = model.lp
    fmin, fmax = model.flow_lo[s, t], model.flow_hi[s, t]
    if math.isfinite(hi) and fmax > hi:
        if switch is None:
            lp.add_constraint(f, "<=", hi, f"{tag}hi")
        else:
            M = fmax - hi
            lp.add_constraint(f + M * switch, "<=", hi + M, f"{tag}hi")
    if math.isfinite(lo) and fmin < lo:
        if switch is None:
            lp.add_constraint(f, ">=", lo, f"{tag}lo")
        else:
            M = lo - fmin
            lp.add_constraint(f - M * switch, ">=", lo - M, f"{tag}lo")


def _cluster_limits(model: UCModel, rule, t: int, switch, coupled: bool, tag: str):
    """Constraints of one cluster rule for period ``t`` gated by ``switch``."""
    lp = model.lp
    paired = set()
    boxes_of = []
    if coupled:
        for n, cb in enumerate(rule.coupled):
            a, b = cb.pair.a, cb.pair.b
            paired.update((a, b))
            boxes_of.append((n, a, b, cb.boxes))
    for s in range(len(model.case.corridors)):
        if s in paired:
            continue
        _limit_rows(model, model.flow[s][t], t, s, float(rule.upper[s]), float(rule.lower[s]), switch,
                    f"lim{tag}({s},{t})")
    sigmas = {}
    for n, a, b, boxes in boxes_of:
        sig = [lp.add_var(f"sigma{tag}({n},{q},{t})", binary=True) for q in range(len(boxes))]
        sigmas[n] = sig
        gate = 1.0 if switch is None else switch
        lp.add_constraint(quicksum(sig) - gate, ">=", 0.0, f"anybox{tag}({n},{t})")
        for q, (box, sg) in enumerate(zip(boxes, sig)):
            if switch is not None:
                lp.add_constraint(sg - switch, "<=", 0.0, f"boxgate{tag}({n},{q},{t})")
            for s, blo, bhi in ((a, box.alo, box.ahi), (b, box.blo, box.bhi)):
                _limit_rows(model, model.flow[s][t], t, s, bhi, blo, sg, f"box{tag}({n},{q},{s},{t})")
    return sigmas


def encode_limit_switching(model: UCModel, rules: LimitRuleSet, enc: MembershipEncoding,
                           coupled: bool = True) -> dict:
    """Gate every cluster's limits on ``pi_j(t)``; returns the sigma handles."""
    if rules.k != len(enc.centers):
        raise ModelError(f"rule set has {rules.k} clusters, cluster model has {len(enc.centers)}")
    sigmas = {}
    for t in range(model.T):
        for j, rule in enumerate(rules.rules):
            switch = None if rules.k == 1 else enc.pi[t][j]
            sigmas[(j, t)] = _cluster_limits(model, rule, t, switch, coupled, f"[{j}]")
    return sigmas


@dataclass
class SwitchingSolution(UCSolution):
    subproblems: int = 0
    distances: list = field(default_factory=list)  # per t: D_j for every cluster


def _annotate(sol: UCSolution, rules: LimitRuleSet, clusters: list[int], C: np.ndarray,
              coupled: bool, sigma_vals=None) -> SwitchingSolution:
    out = SwitchingSolution(**{f: getattr(sol, f) for f in sol.__dataclass_fields__})
    out.active_cluster = list(clusters)
    out.active_limits = []
    out.sigma_box = [] if coupled else None
    for t, j in enumerate(clusters):
        rule = rules.rule(j)
        out.active_limits.append({cid: (float(rule.lower[s]), float(rule.upper[s]))
                                  for s, cid in enumerate(rules.corridor_ids)})
        out.distances.append(squared_distances(sol.dispatch_vector(t), C).tolist())
        if coupled:
            chosen, paired = {}, {}
            for n, cb in enumerate(rule.coupled):
                a, b = cb.pair.a, cb.pair.b
                key = f"{j}:{rules.corridor_ids[a]}|{rules.corridor_ids[b]}"
                q = None
                if sigma_vals is not None:
                    q = sigma_vals.get((j, t, n))
                if q is None:
                    q = next((i for i, bx in enumerate(cb.boxes)
                              if bx.contains(sol.flows[a, t], sol.flows[b, t])), None)
                chosen[key] = q
                if q is not None:
                    # a paired corridor answers to the chosen box, not its own interval
                    bx = cb.boxes[q]
                    for s, lo, hi in ((a, bx.alo, bx.ahi), (b, bx.blo, bx.bhi)):
                        cid = rules.corridor_ids[s]
                        prev = paired.get(cid, (-np.inf, np.inf))
                        paired[cid] = (max(prev[0], float(lo)), min(prev[1], float(hi)))
            out.active_limits[-1].update(paired)
            out.sigma_box.append(chosen)
    return out


def check_argmin(sol: SwitchingSolution, C: np.ndarray) -> None:
    """Every active cluster must be a nearest center of its period's dispatch."""
    for t, j in enumerate(sol.active_cluster):
        D = squared_distances(sol.dispatch_vector(t), C)
        tol = 1e-6 * max(1.0, float(np.max(np.abs(D))))
        if D[j] > D.min() + tol:
            raise AssertionError(f"period {t}: active cluster {j} has distance {D[j]:.9g} "
                                 f"but the nearest center is at {D.min():.9g}")


def _infeasibility_hint(case, config, rules, clusters) -> str:
    base = build_uc(case, config.replace(limit_regime="none"))
    if solve_mip(base.lp, gap=1e-4, backend=config.backend, time_limit=config.time_limit).status == "infeasible":
        return "the UC is infeasible even without corridor limits"
    loose = build_uc(case, config.replace(limit_regime="none"))
    encode_membership(loose, clusters)
    if solve_mip(loose.lp, gap=1e-4, backend=config.backend, time_limit=config.time_limit).status == "infeasible":
        return "no dispatch is consistent with the cluster membership constraints"
    return ("the cluster-dependent corridor limits are unattainable: every reachable cluster's "
            "limits cut off all dispatches that keep it nearest")


def solve_switching_uc(case: NetworkCase, config: UCConfig, rules: LimitRuleSet,
                       clusters: ClusterModel) -> SwitchingSolution:
    """Solve the UC whose corridor limits follow the dispatch's own cluster."""
    regime = config.limit_regime
    if regime not in ("independent", "coupled"):
        raise ModelError("switching needs the independent or coupled regime")
    coupled = regime == "coupled"
    model = build_uc(case, config, rules)
    enc = encode_membership(model, clusters)
    sigmas = encode_limit_switching(model, rules, enc, coupled=coupled)
    try:
        res = solve_model(model)
    except UCInfeasible:
        raise UCInfeasible("switching UC infeasible", _infeasibility_hint(case, config, rules, clusters)) from None
    sol = extract_solution(model, res)
    active = [int(np.argmax([res.x[p.index] for p in enc.pi[t]])) for t in range(model.T)]
    sigma_vals = {}
    for (j, t), per in sigmas.items():
        for n, sig in per.items():
            on = [q for q, sg in enumerate(sig) if res.x[sg.index] > 0.5]
            sigma_vals[(j, t, n)] = on[0] if on and active[t] == j else None
    out = _annotate(sol, rules, active, enc.centers, coupled, sigma_vals)
    check_argmin(out, enc.centers)
    return out


def brute_force_switching(case: NetworkCase, config: UCConfig, rules: LimitRuleSet,
                          clusters: ClusterModel, guard: int = BRUTE_FORCE_GUARD) -> SwitchingSolution:
    """Reference solve: enumerate every cluster sequence over the horizon.

    For each sequence the active cluster is imposed directly: its limits are
    hard constraints and ``D_j(t) <= D_j'(t)`` is added without big-M. The
    cheapest feasible sequence wins.
    """
    regime = config.limit_regime
    if regime not in ("independent", "coupled"):
        raise ModelError("brute force needs the independent or coupled regime")
    coupled = regime == "coupled"
    C = clusters.raw_centers()
    k, T = len(C), case.horizon
    if k ** T > guard:
        raise ValueError(f"{k}^{T} = {k ** T} cluster sequences exceed the guard of {guard}")
    best, best_seq, count = None, None, 0
    for seq in itertools.product(range(k), repeat=T):
        model = build_uc(case, config, rules)
        for t, j in enumerate(seq):
            x = model.feature_exprs(t)
            for jj in range(k):
                if jj != j:
                    model.lp.add_constraint(distance_diff(C[j], C[jj], x), "<=", 0.0, f"near({j},{jj},{t})")
            _cluster_limits(model, rules.rule(j), t, None, coupled, f"[{j}]")
        res = solve_mip(model.lp, gap=config.mip_gap, time_limit=config.time_limit, backend=config.backend)
        count += 1
        if res.status == "infeasible":
            continue
        if res.x is None or not res.ok:
            raise RuntimeError(f"sequence {seq}: solver status {res.status}")
        if best is None or res.objective < best[1].objective - 1e-9 * max(1.0, abs(res.objective)):
            best = (model, res)
            best_seq = seq
    if best is None:
        raise UCInfeasible("switching UC infeasible", "no cluster sequence admits a feasible dispatch")
    sol = extract_solution(*best)
    out = _annotate(sol, rules, list(best_seq), C, coupled)
    out.subproblems = count
    return out
