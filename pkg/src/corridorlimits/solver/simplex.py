"""Bounded-variable primal simplex in revised form.

Each row ``lo_r <= a_r x <= hi_r`` gets a logical variable ``s_r = a_r x`` so the
working system is ``[A | -I] (x, s) = 0`` with every column carrying its own
bounds. Phase 1 adds one artificial column per row whose logical starts out of
bounds and minimizes their sum; phase 2 then prices the real objective with the
artificials pinned at zero.

Pricing is Dantzig's rule with a two-pass (Harris) ratio test. After a run of
degenerate pivots the method falls back to Bland's smallest-index rule, which
guarantees termination.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

INF = np.inf

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
REFACTOR_EVERY = 64
DEGENERATE_LIMIT = 30


@dataclass
class LPOutcome:
    status: str  # optimal | infeasible | unbounded | time_limit | error
    x: np.ndarray | None
    objective: float
    iterations: int
    message: str = ""


class _Tableau:
    def __init__(self, M, lo, hi, x, basis):
        self.M = M
        self.lo = lo
        self.hi = hi
        self.x = x
        self.basis = np.array(basis, dtype=int)
        self.is_basic = np.zeros(M.shape[1], dtype=bool)
        self.is_basic[self.basis] = True
        self.refactor()

    def refactor(self):
        B = self.M[:, self.basis]
        self.Binv = np.linalg.inv(B)
        nb = ~self.is_basic
        self.x[self.basis] = self.Binv @ (-(self.M[:, nb] @ self.x[nb]))

    def run(self, cost, eligible, max_iter, deadline):
        M, lo, hi, x = self.M, self.lo, self.hi, self.x
        bland = False
        degenerate = 0
        for it in range(max_iter):
            if it and it % REFACTOR_EVERY == 0:
                self.refactor()
            if deadline is not None and time.monotonic() > deadline:
                return "time_limit", it
            y = cost[self.basis] @ self.Binv
            d = cost - y @ M
            free_nb = eligible & ~self.is_basic
            inc = free_nb & (d < -OPT_TOL) & (x < hi - FEAS_TOL)
            dec = free_nb & (d > OPT_TOL) & (x > lo + FEAS_TOL)
            cand = inc | dec
            if not cand.any():
                return "optimal", it
            if bland:
                j = int(np.flatnonzero(cand)[0])
            else:
                score = np.where(cand, np.abs(d), -1.0)
                j = int(np.argmax(score))
            direction = 1.0 if inc[j] else -1.0

            alpha = self.Binv @ M[:, j]
            delta = direction * alpha
            xb = x[self.basis]
            lob = lo[self.basis]
            hib = hi[self.basis]
            pos = delta > PIVOT_TOL
            neg = delta < -PIVOT_TOL
            with np.errstate(divide="ignore", invalid="ignore"):
                exact = np.full(len(delta), INF)
                exact[pos] = (xb[pos] - lob[pos]) / delta[pos]
                exact[neg] = (hib[neg] - xb[neg]) / (-delta[neg])
            flip = hi[j] - lo[j]

            if bland:
                theta = exact.min() if len(exact) else INF
                if theta == INF and flip == INF:
                    return "unbounded", it
                if flip <= theta:
                    r = -1
                    theta = flip
                else:
                    ties = np.flatnonzero(exact <= theta + 1e-12)
                    r = int(ties[np.argmin(self.basis[ties])])
            else:
                with np.errstate(divide="ignore", invalid="ignore"):
                    relaxed = np.full(len(delta), INF)
                    relaxed[pos] = (xb[pos] - lob[pos] + FEAS_TOL) / delta[pos]
                    relaxed[neg] = (hib[neg] - xb[neg] + FEAS_TOL) / (-delta[neg])
                theta_max = relaxed.min() if len(relaxed) else INF
                if theta_max == INF and flip == INF:
                    return "unbounded", it
                if flip <= theta_max:
                    r = -1
                    theta = flip
                else:
                    ok = np.flatnonzero(exact <= theta_max)
                    r = int(ok[np.argmax(np.abs(delta[ok]))])
                    theta = exact[r]
            theta = max(theta, 0.0)

            if theta <= 1e-12:
                degenerate += 1
                if degenerate > DEGENERATE_LIMIT:
                    bland = True
            else:
                degenerate = 0
                bland = False

            x[self.basis] = xb - theta * delta
            if r < 0:
                x[j] = hi[j] if direction > 0 else lo[j]
                continue
            x[j] = x[j] + direction * theta
            leaving = self.basis[r]
            x[leaving] = lob[r] if delta[r] > 0 else hib[r]
            self.basis[r] = j
            self.is_basic[leaving] = False
            self.is_basic[j] = True
            piv_row = self.Binv[r] / alpha[r]
            self.Binv -= np.outer(alpha, piv_row)
            self.Binv[r] = piv_row
        return "iteration_limit", max_iter


def _no_rows(c, lo, hi):
    x = np.where(np.isfinite(lo), lo, np.where(np.isfinite(hi), hi, 0.0))
    for j, cj in enumerate(c):
        if cj < 0:
            if hi[j] == INF:
                return LPOutcome("unbounded", None, -INF, 0)
            x[j] = hi[j]
        elif cj > 0:
            if lo[j] == -INF:
                return LPOutcome("unbounded", None, -INF, 0)
            x[j] = lo[j]
    return LPOutcome("optimal", x, float(c @ x), 0)


def solve_arrays(c, A, row_lo, row_hi, lo, hi, *, time_limit=None, max_iter=None) -> LPOutcome:
    """Minimize ``c x`` subject to ``row_lo <= A x <= row_hi`` and ``lo <= x <= hi``.

    ``A`` may be dense or scipy-sparse; it is densified internally.
    """
    c = np.asarray(c, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = len(c)
    if np.any(lo > hi + FEAS_TOL):
        return LPOutcome("infeasible", None, np.nan, 0, "crossed variable bounds")
    A = A.toarray() if hasattr(A, "toarray") else np.asarray(A, dtype=float).reshape(-1, n)
    m = A.shape[0]
    if m == 0:
        return _no_rows(c, lo, hi)
    row_lo = np.asarray(row_lo, dtype=float).copy()
    row_hi = np.asarray(row_hi, dtype=float).copy()
    if np.any(row_lo > row_hi + FEAS_TOL):
        return LPOutcome("infeasible", None, np.nan, 0, "crossed row bounds")

    scale = np.abs(A).max(axis=1)
    scale[scale == 0] = 1.0
    A = A / scale[:, None]
    row_lo /= scale
    row_hi /= scale

    deadline = None if time_limit is None else time.monotonic() + time_limit
    if max_iter is None:
        max_iter = 50 * (n + m) + 1000

    x0 = np.where(np.isfinite(lo), lo, np.where(np.isfinite(hi), hi, 0.0))
    act = A @ x0
    s = act.copy()
    art_rows = []
    art_sign = []
    for r in range(m):
        if act[r] < row_lo[r] - FEAS_TOL:
            s[r] = row_lo[r]
        elif act[r] > row_hi[r] + FEAS_TOL:
            s[r] = row_hi[r]
        else:
            continue
        art_rows.append(r)
        art_sign.append(1.0 if s[r] > act[r] else -1.0)
    q = len(art_rows)

    M = np.zeros((m, n + m + q))
    M[:, :n] = A
    M[:, n:n + m] = -np.eye(m)
    for k, (r, sg) in enumerate(zip(art_rows, art_sign)):
        M[r, n + m + k] = sg
    col_lo = np.concatenate([lo, row_lo, np.zeros(q)])
    col_hi = np.concatenate([hi, row_hi, np.full(q, INF)])
    x = np.concatenate([x0, s, np.abs(s[art_rows] - act[art_rows]) if q else np.zeros(0)])

    basis = [n + r for r in range(m)]
    for k, r in enumerate(art_rows):
        basis[r] = n + m + k
    try:
        tab = _Tableau(M, col_lo, col_hi, x, basis)
    except np.linalg.LinAlgError:
        return LPOutcome("error", None, np.nan, 0, "singular starting basis")

    eligible = np.ones(n + m + q, dtype=bool)
    iterations = 0
    try:
        if q:
            cost1 = np.zeros(n + m + q)
            cost1[n + m:] = 1.0
            status, it = tab.run(cost1, eligible, max_iter, deadline)
            iterations += it
            if status != "optimal":
                return LPOutcome("time_limit" if status == "time_limit" else "error", None,
                                 np.nan, iterations, f"phase 1 ended with {status}")
            tab.refactor()
            infeas = float(tab.x[n + m:].sum())
            if infeas > 1e-7 * max(1.0, np.abs(act).max()):
                return LPOutcome("infeasible", None, np.nan, iterations)
            col_hi[n + m:] = 0.0
            tab.x[n + m:] = np.minimum(np.maximum(tab.x[n + m:], 0.0), 0.0)
            eligible[n + m:] = False

        cost2 = np.zeros(n + m + q)
        cost2[:n] = c
        status, it = tab.run(cost2, eligible, max_iter, deadline)
        iterations += it
        if status == "unbounded":
            return LPOutcome("unbounded", None, -INF, iterations)
        if status != "optimal":
            return LPOutcome("time_limit" if status == "time_limit" else "error", None,
                             np.nan, iterations, f"phase 2 ended with {status}")
        tab.refactor()
    except np.linalg.LinAlgError:
        return LPOutcome("error", None, np.nan, iterations, "singular basis")

    xs = tab.x[:n].copy()
    viol = max(
        float(np.max(np.maximum(lo - xs, 0), initial=0.0)),
        float(np.max(np.maximum(xs - hi, 0), initial=0.0)),
    )
    ax = A @ xs
    viol = max(viol,
               float(np.max(np.maximum(row_lo - ax, 0), initial=0.0)),
               float(np.max(np.maximum(ax - row_hi, 0), initial=0.0)))
    if viol > 1e-7:
        return LPOutcome("error", None, np.nan, iterations,
                         f"final point violates constraints by {viol:.3g}")
    xs = np.clip(xs, lo, hi)
    return LPOutcome("optimal", xs, float(c @ xs), iterations)
