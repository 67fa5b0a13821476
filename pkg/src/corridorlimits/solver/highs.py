"""Backend that hands the program to HiGHS through ``scipy.optimize.milp``."""

from __future__ import annotations

import time

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from .model import LinearProgram, SolveResult

_STATUS = {0: "optimal", 1: "time_limit", 2: "infeasible", 3: "unbounded", 4: "error"}


def solve_highs(lp: LinearProgram, *, integral: bool = True, gap: float = 1e-6,
                time_limit: float | None = None) -> SolveResult:
    c, A, row_lo, row_hi, lo, hi, is_bin = lp.arrays()
    integrality = is_bin.astype(int) if integral else np.zeros(lp.num_vars, dtype=int)
    constraints = [LinearConstraint(A, row_lo, row_hi)] if lp.num_rows else []
    options = {"disp": False, "presolve": True, "mip_rel_gap": gap}
    if time_limit is not None:
        options["time_limit"] = float(time_limit)
    start = time.monotonic()
    res = milp(c, integrality=integrality, bounds=Bounds(lo, hi), constraints=constraints,
               options=options)
    wall = time.monotonic() - start
    status = _STATUS.get(res.status, "error")
    const = lp.objective.const
    if res.x is None:
        if status == "optimal":
            status = "error"
        return SolveResult(status, wall_time=wall, message=str(res.message))
    x = np.asarray(res.x, dtype=float)
    if integral and is_bin.any():
        x[is_bin] = np.round(x[is_bin])
    bound = getattr(res, "mip_dual_bound", None)
    bound = float(bound) + const if bound is not None and np.isfinite(bound) else float(res.fun) + const
    mip_gap = getattr(res, "mip_gap", None)
    return SolveResult(status, objective=float(c @ x) + const, x=x,
                       mip_gap=float(mip_gap) if mip_gap is not None else 0.0,
                       best_bound=bound, wall_time=wall,
                       nodes=int(getattr(res, "mip_node_count", 0) or 0),
                       message=str(res.message))

