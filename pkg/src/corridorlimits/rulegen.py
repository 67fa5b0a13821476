"""Per-cluster corridor limit rules.

For every operating-mode cluster ``j`` the rule holds

* independent limits per corridor, taken from the extreme flows of the stable
  and unstable samples of that cluster, and
* for each strongly correlated corridor pair, a coupled 2-D region built by a
  breadth-first search over a grid of safe cells, united with the box of the
  independent limits.

Unbounded sides are ``inf`` in memory and ``+/-1e9`` MW in JSON.
"""

from __future__ import annotations

import json
import logging
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .clustering import ClusterModel

log = logging.getLogger(__name__)

SENTINEL = 1e9
INF = math.inf

DEFAULT_RHO_THRESHOLD = 0.6
DEFAULT_RESOLUTION = (20, 20)


class DegenerateDomainError(ValueError):
    """Unstable samples span no area, so no grid can be laid over them."""


def _enc(v: float) -> float:
    if v == INF:
        return SENTINEL
    if v == -INF:
        return -SENTINEL
    return float(v)


def _dec(v: float) -> float:
    if v >= SENTINEL:
        return INF
    if v <= -SENTINEL:
        return -INF
    return float(v)


# ---------------------------------------------------------------- correlation

def pearson_matrix(flows: np.ndarray) -> np.ndarray:
    """Pearson correlation between corridor flow columns.

    Zero-variance columns correlate 0 with everything else; the diagonal is 1.
    """
    F = np.asarray(flows, dtype=float)
    if F.ndim != 2 or F.shape[0] < 2:
        raise ValueError("need at least 2 scenarios for a correlation")
    C = F - F.mean(axis=0)
    norms = np.sqrt(np.einsum("ns,ns->s", C, C))
    scale = np.max(np.abs(F), axis=0) + 1.0
    live = norms > 1e-12 * scale * math.sqrt(F.shape[0])
    S = F.shape[1]
    rho = np.zeros((S, S))
    for a in range(S):
        for b in range(a, S):
            if a == b:
                rho[a, b] = 1.0
            elif live[a] and live[b]:
                r = float(C[:, a] @ C[:, b] / (norms[a] * norms[b]))
                rho[a, b] = rho[b, a] = min(1.0, max(-1.0, r))
    return rho


@dataclass(frozen=True)
class CorrelatedPair:
    a: int  # corridor positions in the case
    b: int
    rho: float


def screen_pairs(rho: np.ndarray, threshold: float) -> list[CorrelatedPair]:
    S = rho.shape[0]
    return [CorrelatedPair(a, b, float(rho[a, b])) for a in range(S) for b in range(a + 1, S)
            if abs(rho[a, b]) >= threshold]


# ---------------------------------------------------------------- initial limits

def _one_contingency(flow: np.ndarray, safe: np.ndarray) -> tuple[float, float]:
    stable, unstable = flow[safe], flow[~safe]
    if unstable.size == 0 or stable.size == 0:
        return INF, -INF
    mu_se, mu_is = stable.mean(), unstable.mean()
    if mu_se < mu_is:
        return min(unstable.min(), stable.max()), -INF
    if mu_se > mu_is:
        return INF, max(unstable.max(), stable.min())
    return INF, -INF


def initial_limits(flow, labels) -> tuple[float, float]:
    """Independent ``(upper, lower)`` limits of one corridor within one cluster.

    ``flow`` holds the corridor's MW flow per cluster sample; ``labels`` is
    (samples,) or (samples, contingencies) with 1 = safe. When stable samples
    sit below unstable ones on average the corridor gets an upper limit
    ``min(min unstable, max stable)``; in the opposite case a lower limit
    ``max(max unstable, min stable)``. Bounds are taken per contingency and the
    tightest one kept. A contingency with no unstable (or no stable) sample
    imposes nothing.

    If the per-contingency bounds cross, the aggregate label (safe under every
    contingency) is used instead, which cannot produce crossing bounds.
    """
    flow = np.asarray(flow, dtype=float)
    if flow.size == 0:
        raise ValueError("cluster has no samples")
    L = np.asarray(labels, dtype=int).reshape(len(flow), -1)
    upper, lower = INF, -INF
    for h in range(L.shape[1]):
        u, lo = _one_contingency(flow, L[:, h] == 1)
        upper = min(upper, u)
        lower = max(lower, lo)
    if lower > upper:
        log.info("per-contingency limits cross (%.6g > %.6g); using aggregate labels", lower, upper)
        upper, lower = _one_contingency(flow, np.all(L == 1, axis=1))
    return float(upper), float(lower)


# ---------------------------------------------------------------- grid BFS

@dataclass(frozen=True)
class Box:
    alo: float
    ahi: float
    blo: float
    bhi: float

    def contains_strictly(self, pa: float, pb: float, tol: float = 1e-9) -> bool:
        ta = tol * max(1.0, abs(pa))
        tb = tol * max(1.0, abs(pb))
        return (self.alo + ta < pa < self.ahi - ta) and (self.blo + tb < pb < self.bhi - tb)

    def contains(self, pa: float, pb: float, tol: float = 1e-6) -> bool:
        return (self.alo - tol <= pa <= self.ahi + tol) and (self.blo - tol <= pb <= self.bhi + tol)

    @property
    def empty(self) -> bool:
        return not (self.alo < self.ahi and self.blo < self.bhi)

    def to_dict(self) -> dict:
        return {"alo": _enc(self.alo), "ahi": _enc(self.ahi), "blo": _enc(self.blo), "bhi": _enc(self.bhi)}

    @classmethod
    def from_dict(cls, d) -> "Box":
        return cls(_dec(d["alo"]), _dec(d["ahi"]), _dec(d["blo"]), _dec(d["bhi"]))


def subtract_box(r: Box, cut: Box) -> list[Box]:
    """Pieces of ``r`` outside ``cut`` (interior-disjoint)."""
    if cut.ahi <= r.alo or cut.alo >= r.ahi or cut.bhi <= r.blo or cut.blo >= r.bhi:
        return [r]
    out = []
    if r.alo < cut.alo:
        out.append(Box(r.alo, cut.alo, r.blo, r.bhi))
    if cut.ahi < r.ahi:
        out.append(Box(cut.ahi, r.ahi, r.blo, r.bhi))
    alo, ahi = max(r.alo, cut.alo), min(r.ahi, cut.ahi)
    if r.blo < cut.blo:
        out.append(Box(alo, ahi, r.blo, cut.blo))
    if cut.bhi < r.bhi:
        out.append(Box(alo, ahi, cut.bhi, r.bhi))
    return [b for b in out if not b.empty]


@dataclass
class CoupledBoundary:
    pair: CorrelatedPair
    origin: tuple[float, float]
    step: tuple[float, float]
    resolution: tuple[int, int]
    safe_cells: frozenset  # (row along corridor a, col along corridor b)
    initial_box: Box
    boxes: list[Box]
    seed_cell: tuple[int, int] | None = None

    def cell_box(self, cell) -> Box:
        i, j = cell
        (oa, ob), (sa, sb) = self.origin, self.step
        return Box(oa + i * sa, oa + (i + 1) * sa, ob + j * sb, ob + (j + 1) * sb)

    def contains(self, pa: float, pb: float, tol: float = 1e-6) -> bool:
        return any(b.contains(pa, pb, tol) for b in self.boxes)

    def to_dict(self, corridor_ids) -> dict:
        return {
            "a": corridor_ids[self.pair.a], "b": corridor_ids[self.pair.b], "rho": self.pair.rho,
            "origin": list(self.origin), "step": list(self.step),
            "resolution": list(self.resolution),
            "safe_cells": sorted([list(c) for c in self.safe_cells]),
            "initial": self.initial_box.to_dict(),
            "boxes": [b.to_dict() for b in self.boxes],
        }

    @classmethod
    def from_dict(cls, d, corridor_ids) -> "CoupledBoundary":
        pair = CorrelatedPair(corridor_ids.index(d["a"]), corridor_ids.index(d["b"]), float(d["rho"]))
        init = Box.from_dict(d["initial"]) if "initial" in d else Box(-INF, INF, -INF, INF)
        return cls(pair, tuple(d["origin"]), tuple(d["step"]), tuple(d["resolution"]),
                   frozenset(tuple(c) for c in d.get("safe_cells", [])), init,
                   [Box.from_dict(b) for b in d["boxes"]])


def cell_of(p: float, origin: float, step: float, n: int) -> int | None:
    """Grid index of coordinate ``p``; the far domain edge belongs to the last cell."""
    f = (p - origin) / step
    if f < -1e-9 or f > n + 1e-9:
        return None
    return int(min(max(math.floor(f), 0), n - 1))


def merge_cells(cells, n_a: int, n_b: int) -> list[tuple[int, int, int, int]]:
    """Cover ``cells`` with rectangles ``(i0, i1, j0, j1)`` (inclusive indices).

    Consecutive safe cells along b are merged into runs within each row; runs
    with identical column ranges in adjacent rows are then stacked.
    """
    runs_by_row = {}
    for i in range(n_a):
        runs, j = [], 0
        while j < n_b:
            if (i, j) in cells:
                j0 = j
                while j + 1 < n_b and (i, j + 1) in cells:
                    j += 1
                runs.append((j0, j))
            j += 1
        runs_by_row[i] = runs
    rects = []
    open_rects: dict[tuple[int, int], int] = {}
    for i in range(n_a):
        current = set(runs_by_row[i])
        for span in list(open_rects):
            if span not in current:
                rects.append((open_rects.pop(span), i - 1) + span)
        for span in runs_by_row[i]:
            open_rects.setdefault(span, i)
    for span, i0 in open_rects.items():
        rects.append((i0, n_a - 1) + span)
    return sorted(rects)


def grid_boundary(pa, pb, safe, resolution=DEFAULT_RESOLUTION, initial_box: Box | None = None,
                  seed_point=None, domain: Box | None = None,
                  pair: CorrelatedPair | None = None) -> CoupledBoundary:
    """Coupled safe region of one corridor pair within one cluster.

    ``pa``/``pb`` are the pair's flows per sample and ``safe`` the aggregate
    label. The grid spans the bounding box of the unstable samples (or
    ``domain``), split into ``resolution`` cells per axis. A cell is SAFE when it
    holds at least one stable sample and no unstable one; empty cells are not
    safe. The search starts at the cell holding ``seed_point`` (or the nearest
    SAFE cell to it) and spreads through 4-connected SAFE cells. The region is
    the union of the reached cells with ``initial_box``.
    """
    pa = np.asarray(pa, dtype=float)
    pb = np.asarray(pb, dtype=float)
    safe = np.asarray(safe).astype(bool)
    n_a, n_b = (int(r) for r in resolution)
    if n_a < 1 or n_b < 1:
        raise ValueError("grid resolution must be >= 1 per axis")
    unstable = ~safe
    if domain is None:
        if not unstable.any():
            raise ValueError("no unstable samples: grid domain undefined")
        domain = Box(pa[unstable].min(), pa[unstable].max(), pb[unstable].min(), pb[unstable].max())
    if not (domain.ahi > domain.alo and domain.bhi > domain.blo):
        raise DegenerateDomainError("unstable samples span a zero-area domain")
    if initial_box is None:
        initial_box = Box(-INF, INF, -INF, INF)
    origin = (domain.alo, domain.blo)
    step = ((domain.ahi - domain.alo) / n_a, (domain.bhi - domain.blo) / n_b)

    has_stable = np.zeros((n_a, n_b), dtype=bool)
    has_unstable = np.zeros((n_a, n_b), dtype=bool)
    for x, y, ok in zip(pa, pb, safe):
        i = cell_of(x, origin[0], step[0], n_a)
        j = cell_of(y, origin[1], step[1], n_b)
        if i is None or j is None:
            continue
        if ok:
            has_stable[i, j] = True
        else:
            has_unstable[i, j] = True
    is_safe = has_stable & ~has_unstable

    seed = None
    if is_safe.any():
        if seed_point is None:
            fa, fb = n_a / 2.0, n_b / 2.0
            inside = None
        else:
            fa = (seed_point[0] - origin[0]) / step[0]
            fb = (seed_point[1] - origin[1]) / step[1]
            ia = cell_of(seed_point[0], origin[0], step[0], n_a)
            ib = cell_of(seed_point[1], origin[1], step[1], n_b)
            inside = (ia, ib) if ia is not None and ib is not None else None
        if inside is not None and is_safe[inside]:
            seed = inside
        else:
            if inside is not None:
                fa, fb = inside[0] + 0.5, inside[1] + 0.5
            cand = np.argwhere(is_safe)  # row-major order
            d = (cand[:, 0] + 0.5 - fa) ** 2 + (cand[:, 1] + 0.5 - fb) ** 2
            seed = tuple(int(v) for v in cand[int(np.argmin(d))])

    reached = set()
    if seed is not None:
        queue = deque([seed])
        reached.add(seed)
        while queue:
            i, j = queue.popleft()
            for ni, nj in ((i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)):
                if 0 <= ni < n_a and 0 <= nj < n_b and (ni, nj) not in reached and is_safe[ni, nj]:
                    reached.add((ni, nj))
                    queue.append((ni, nj))

    boundary = CoupledBoundary(pair or CorrelatedPair(0, 1, 0.0), origin, step, (n_a, n_b),
                               frozenset(reached), initial_box, [], seed)
    boxes = [] if initial_box.empty else [initial_box]
    for i0, i1, j0, j1 in merge_cells(reached, n_a, n_b):
        rect = Box(origin[0] + i0 * step[0], origin[0] + (i1 + 1) * step[0],
                   origin[1] + j0 * step[1], origin[1] + (j1 + 1) * step[1])
        boxes.extend(subtract_box(rect, initial_box) if not initial_box.empty else [rect])
    boundary.boxes = boxes
    return boundary


# ---------------------------------------------------------------- rule set

@dataclass
class ClusterRule:
    cluster: int
    upper: np.ndarray  # per corridor
    lower: np.ndarray
    coupled: list[CoupledBoundary] = field(default_factory=list)
    size: int = 0
    warnings: list[str] = field(default_factory=list)


@dataclass
class LimitRuleSet:
    cluster_model_hash: str
    corridor_ids: list[str]
    rho: np.ndarray
    rules: list[ClusterRule]

    @property
    def k(self) -> int:
        return len(self.rules)

    def rule(self, j: int) -> ClusterRule:
        return self.rules[j]

    def max_upper(self, corridor: int) -> float:
        """Largest finite upper limit of ``corridor`` over clusters (nan if none)."""
        vals = [r.upper[corridor] for r in self.rules if math.isfinite(r.upper[corridor])]
        return max(vals) if vals else math.nan

    def independent_only(self) -> "LimitRuleSet":
        return LimitRuleSet(self.cluster_model_hash, list(self.corridor_ids), self.rho.copy(),
                            [ClusterRule(r.cluster, r.upper.copy(), r.lower.copy(), [], r.size,
                                         list(r.warnings)) for r in self.rules])

    def to_dict(self) -> dict:
        return {
            "cluster_model_hash": self.cluster_model_hash,
            "corridors": list(self.corridor_ids),
            "rho": np.round(self.rho, 12).tolist(),
            "rules": [{
                "cluster": r.cluster,
                "size": r.size,
                "limits": [{"corridor": cid, "lo": _enc(r.lower[s]), "hi": _enc(r.upper[s])}
                           for s, cid in enumerate(self.corridor_ids)],
                "coupled": [c.to_dict(self.corridor_ids) for c in r.coupled],
            } for r in self.rules],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, doc) -> "LimitRuleSet":
        ids = list(doc.get("corridors") or [l["corridor"] for l in doc["rules"][0]["limits"]])
        rules = []
        for r in doc["rules"]:
            lim = {l["corridor"]: l for l in r["limits"]}
            rules.append(ClusterRule(
                int(r["cluster"]),
                np.array([_dec(lim[c]["hi"]) for c in ids]),
                np.array([_dec(lim[c]["lo"]) for c in ids]),
                [CoupledBoundary.from_dict(c, ids) for c in r.get("coupled", [])],
                int(r.get("size", 0))))
        rules.sort(key=lambda r: r.cluster)
        if [r.cluster for r in rules] != list(range(len(rules))):
            raise ValueError("rule set must hold exactly one rule per cluster 0..k-1")
        return cls(doc["cluster_model_hash"], ids, np.array(doc["rho"], dtype=float), rules)

    @classmethod
    def from_json(cls, text: str) -> "LimitRuleSet":
        return cls.from_dict(json.loads(text))


def _box_is_sound(box: Box, pa, pb, safe) -> bool:
    return not any(box.contains_strictly(x, y) for x, y, ok in zip(pa, pb, safe) if not ok)


def build_rule_set(model: ClusterModel, flows: np.ndarray, labels: np.ndarray,
                   corridor_ids, center_flows: np.ndarray | None = None,
                   rho_threshold: float = DEFAULT_RHO_THRESHOLD,
                   resolution=DEFAULT_RESOLUTION) -> LimitRuleSet:
    """Assemble one rule per cluster of ``model``.

    ``flows`` is (scenarios, corridors) in the model's scenario order and
    ``labels`` (scenarios, contingencies) with 1 = safe. ``center_flows``
    gives each cluster center's corridor flows, used to seed the grid search.
    Correlation is screened within each cluster.
    """
    flows = np.asarray(flows, dtype=float)
    L = np.asarray(labels, dtype=int).reshape(len(flows), -1)
    agg = np.all(L == 1, axis=1)
    S = flows.shape[1]
    if len(model.assignments) != len(flows):
        raise ValueError("flows and cluster assignments cover different scenario sets")
    rules = []
    for j in range(model.k):
        idx = model.members(j)
        rule = ClusterRule(j, np.full(S, INF), np.full(S, -INF), size=len(idx))
        if len(idx) == 0:
            msg = f"cluster {j} is empty; its corridors are left unconstrained"
            log.warning(msg)
            rule.warnings.append(msg)
            rules.append(rule)
            continue
        Fj, Lj, safe_j = flows[idx], L[idx], agg[idx]
        for s in range(S):
            rule.upper[s], rule.lower[s] = initial_limits(Fj[:, s], Lj)
        if len(idx) >= 2 and (~safe_j).any():
            for pair in screen_pairs(pearson_matrix(Fj), rho_threshold):
                a, b = pair.a, pair.b
                init = Box(rule.lower[a], rule.upper[a], rule.lower[b], rule.upper[b])
                if not _box_is_sound(init, Fj[:, a], Fj[:, b], safe_j):
                    msg = (f"cluster {j} pair ({corridor_ids[a]}, {corridor_ids[b]}): independent box "
                           "holds unstable samples and is left out of the coupled region")
                    log.warning(msg)
                    rule.warnings.append(msg)
                    init = Box(0.0, 0.0, 0.0, 0.0)
                seed = None if center_flows is None else (center_flows[j, a], center_flows[j, b])
                try:
                    cb = grid_boundary(Fj[:, a], Fj[:, b], safe_j, resolution, init, seed, pair=pair)
                except DegenerateDomainError as exc:
                    rule.warnings.append(f"cluster {j} pair ({corridor_ids[a]}, {corridor_ids[b]}): {exc}")
                    continue
                rule.coupled.append(cb)
        rules.append(rule)
    rho = pearson_matrix(flows) if len(flows) >= 2 else np.eye(S)
    return LimitRuleSet(model.hash(), list(corridor_ids), rho, rules)


def conservative_limits(flows: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Single-band limits over the whole dataset, ``(upper, lower)`` per corridor."""
    flows = np.asarray(flows, dtype=float)
    L = np.asarray(labels, dtype=int).reshape(len(flows), -1)
    up = np.empty(flows.shape[1])
    lo = np.empty(flows.shape[1])
    for s in range(flows.shape[1]):
        up[s], lo[s] = initial_limits(flows[:, s], L)
    return up, lo
