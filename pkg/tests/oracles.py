"""Reference implementations that share no code with the package."""

from __future__ import annotations

import itertools
import math
from collections import deque

import numpy as np


# ---------------------------------------------------------------- dense tableau simplex

def tableau_lp(c, A_ub, b_ub, A_eq, b_eq, ub):
    """min c.x  s.t.  A_ub x <= b_ub, A_eq x == b_eq, 0 <= x <= ub (ub finite).

    Textbook two-phase full-tableau simplex with Bland's rule. Upper bounds
    become explicit rows. Returns ``(status, x, objective)`` with status in
    {"optimal", "infeasible", "unbounded"}.
    """
    c = np.asarray(c, float)
    n = len(c)
    rows, rhs, kinds = [], [], []
    for a, b in zip(np.atleast_2d(A_ub) if len(b_ub) else [], b_ub):
        rows.append(np.asarray(a, float)); rhs.append(float(b)); kinds.append("<=")
    for j in range(n):
        e = np.zeros(n); e[j] = 1.0
        rows.append(e); rhs.append(float(ub[j])); kinds.append("<=")
    for a, b in zip(np.atleast_2d(A_eq) if len(b_eq) else [], b_eq):
        rows.append(np.asarray(a, float)); rhs.append(float(b)); kinds.append("==")
    m = len(rows)
    n_slack = sum(k == "<=" for k in kinds)
    # columns: x | slacks | artificials (one per row)
    width = n + n_slack + m
    T = np.zeros((m, width + 1))
    basis = []
    s = 0
    for i, (a, b, k) in enumerate(zip(rows, rhs, kinds)):
        T[i, :n] = a
        if k == "<=":
            T[i, n + s] = 1.0
            s += 1
        T[i, -1] = b
        if T[i, -1] < 0:
            T[i, :-1] *= -1
            T[i, -1] *= -1
        T[i, n + n_slack + i] = 1.0
        basis.append(n + n_slack + i)

    def pivot(r, q):
        T[r] /= T[r, q]
        for i in range(m):
            if i != r and T[i, q] != 0.0:
                T[i] -= T[i, q] * T[r]
        basis[r] = q

    def run(cost, allowed):
        for _ in range(5000):
            cb = cost[basis]
            reduced = cost[:width] - cb @ T[:, :width]
            q = next((j for j in range(width) if allowed[j] and j not in basis and reduced[j] < -1e-10), None)
            if q is None:
                return "optimal"
            col = T[:, q]
            ratios = [(T[i, -1] / col[i], basis[i], i) for i in range(m) if col[i] > 1e-12]
            if not ratios:
                return "unbounded"
            best = min(r[0] for r in ratios)
            r = min((r for r in ratios if r[0] <= best + 1e-12), key=lambda t: t[1])[2]
            pivot(r, q)
        raise RuntimeError("tableau oracle did not converge")

    phase1 = np.zeros(width)
    phase1[n + n_slack:] = 1.0
    run(phase1, np.ones(width, bool))
    if phase1[basis] @ T[:, -1] > 1e-7:
        return "infeasible", None, math.nan
    # drive remaining artificials out of the basis where possible
    for i in range(m):
        if basis[i] >= n + n_slack:
            q = next((j for j in range(n + n_slack) if abs(T[i, j]) > 1e-9), None)
            if q is not None:
                pivot(i, q)
    cost = np.zeros(width)
    cost[:n] = c
    allowed = np.zeros(width, bool)
    allowed[:n + n_slack] = True
    status = run(cost, allowed)
    if status != "optimal":
        return status, None, math.nan
    x = np.zeros(width)
    for i, j in enumerate(basis):
        x[j] = T[i, -1]
    return "optimal", x[:n], float(c @ x[:n])


# ---------------------------------------------------------------- enumeration MIP

def enumerate_mip(c, A_ub, b_ub, A_eq, b_eq, ub, binary):
    """Exhaustive search over the binary columns; continuous rest by the tableau."""
    c = np.asarray(c, float)
    A_ub = np.asarray(A_ub, float).reshape(-1, len(c))
    A_eq = np.asarray(A_eq, float).reshape(-1, len(c))
    bins = [j for j in range(len(c)) if binary[j]]
    cont = [j for j in range(len(c)) if not binary[j]]
    best = (math.inf, None)
    for bits in itertools.product((0.0, 1.0), repeat=len(bins)):
        xb = np.zeros(len(c))
        xb[bins] = bits
        r_ub = np.asarray(b_ub, float) - A_ub @ xb
        r_eq = np.asarray(b_eq, float) - A_eq @ xb
        if not cont:
            if np.all(r_ub >= -1e-9) and np.all(np.abs(r_eq) <= 1e-9):
                val = float(c @ xb)
                if val < best[0]:
                    best = (val, xb)
            continue
        status, xc, val = tableau_lp(c[cont], A_ub[:, cont], r_ub, A_eq[:, cont], r_eq,
                                     [ub[j] for j in cont])
        if status == "optimal":
            val += float(c[bins] @ np.asarray(bits))
            if val < best[0]:
                x = xb.copy()
                x[cont] = xc
                best = (val, x)
    if best[1] is None:
        return "infeasible", None, math.nan
    return "optimal", best[1], best[0]


# ---------------------------------------------------------------- DC power flow

def b_theta_flows(buses, lines, slack, injections, outage=None):
    """Line flows from an explicit nodal B matrix; ``lines`` = [(id, from, to, x)]."""
    idx = {b: k for k, b in enumerate(buses)}
    nb = len(buses)
    B = np.zeros((nb, nb))
    for lid, f, t, x in lines:
        if lid == outage:
            continue
        i, j = idx[f], idx[t]
        B[i, i] += 1 / x
        B[j, j] += 1 / x
        B[i, j] -= 1 / x
        B[j, i] -= 1 / x
    keep = [k for k in range(nb) if buses[k] != slack]
    theta = np.zeros(nb)
    theta[keep] = np.linalg.solve(B[np.ix_(keep, keep)], np.asarray(injections, float)[keep])
    return np.array([0.0 if lid == outage else (theta[idx[f]] - theta[idx[t]]) / x
                     for lid, f, t, x in lines])


# ---------------------------------------------------------------- flood fill

def flood_fill_oracle(pa, pb, safe, n_a, n_b, seed_point):
    """Mark every cell, then spread from the seed with an explicit queue.

    Cells span the bounding box of the unstable samples; a point on an
    interior cell edge goes to the higher cell and the far domain edge to the
    last cell.
    """
    pa, pb, safe = np.asarray(pa, float), np.asarray(pb, float), np.asarray(safe, bool)
    ua, ub_ = pa[~safe], pb[~safe]
    a0, a1, b0, b1 = ua.min(), ua.max(), ub_.min(), ub_.max()
    da, db = (a1 - a0) / n_a, (b1 - b0) / n_b
    marks = {}
    for x, y, ok in zip(pa, pb, safe):
        if not (a0 - 1e-9 * abs(da) <= x <= a1 + 1e-9 * abs(da) and b0 - 1e-9 * abs(db) <= y <= b1 + 1e-9 * abs(db)):
            continue
        i = min(max(int(math.floor((x - a0) / da)), 0), n_a - 1)
        j = min(max(int(math.floor((y - b0) / db)), 0), n_b - 1)
        st = marks.setdefault((i, j), [0, 0])
        st[0 if ok else 1] += 1
    good = {c for c, (s, u) in marks.items() if s > 0 and u == 0}
    if not good:
        return set()
    fa, fb = (seed_point[0] - a0) / da, (seed_point[1] - b0) / db
    start = None
    if -1e-9 <= fa <= n_a + 1e-9 and -1e-9 <= fb <= n_b + 1e-9:
        cell = (min(max(int(math.floor(fa)), 0), n_a - 1), min(max(int(math.floor(fb)), 0), n_b - 1))
        if cell in good:
            start = cell
        fa, fb = cell[0] + 0.5, cell[1] + 0.5
    if start is None:
        start = min(sorted(good), key=lambda c: (c[0] + 0.5 - fa) ** 2 + (c[1] + 0.5 - fb) ** 2)
    seen = {start}
    q = deque([start])
    while q:
        i, j = q.popleft()
        for nb in ((i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)):
            if nb in good and nb not in seen:
                seen.add(nb)
                q.append(nb)
    return seen
