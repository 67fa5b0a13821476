"""LP/MIP solving contract with a built-in simplex + branch-and-bound backend.

``backend="builtin"`` runs the reference implementation in this package;
``backend="highs"`` hands the same program to HiGHS via scipy. Both return a
:class:`SolveResult` and are held to the same post-solve checks.
"""

from __future__ import annotations

import time

import numpy as np

from .bnb import branch_and_bound
from .highs import solve_highs
from .lpformat import read_lp, write_lp
from .model import INF, LinearProgram, LinExpr, SolveResult, Var, quicksum
from .simplex import solve_arrays

__all__ = [
    "INF", "LinExpr", "LinearProgram", "SolveResult", "Var", "quicksum",
    "solve_lp", "solve_mip", "write_lp", "read_lp", "BACKENDS",
]

BACKENDS = ("builtin", "highs")

FEASIBILITY_CHECK = 1e-6


def solve_lp(lp: LinearProgram, backend: str = "builtin",
             time_limit: float | None = None) -> SolveResult:
    """Solve the continuous relaxation of ``lp`` (binaries relaxed to [0, 1])."""
    if backend == "highs":
        return _checked(lp, solve_highs(lp, integral=False, time_limit=time_limit), integral=False)
    if backend != "builtin":
        raise ValueError(f"unknown backend {backend!r}")
    start = time.monotonic()
    c, A, row_lo, row_hi, lo, hi, _ = lp.arrays()
    out = solve_arrays(c, A, row_lo, row_hi, lo, hi, time_limit=time_limit)
    res = SolveResult(out.status, iterations=out.iterations, message=out.message,
                      wall_time=time.monotonic() - start, mip_gap=0.0)
    if out.x is not None:
        res.x = out.x
        res.objective = out.objective + lp.objective.const
        res.best_bound = res.objective
    return _checked(lp, res, integral=False)


def solve_mip(lp: LinearProgram, gap: float = 1e-6, time_limit: float | None = None,
              backend: str = "builtin", node_limit: int | None = None) -> SolveResult:
    """Solve ``lp`` with binaries enforced, to relative optimality ``gap``."""
    if backend == "highs":
        res = solve_highs(lp, integral=True, gap=gap, time_limit=time_limit)
    elif backend == "builtin":
        res = branch_and_bound(lp, gap=gap, time_limit=time_limit, node_limit=node_limit)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return _checked(lp, res, integral=True)


def _checked(lp: LinearProgram, res: SolveResult, integral: bool) -> SolveResult:
    if res.x is None:
        return res
    x = np.asarray(res.x, dtype=float)
    lo = np.array(lp.lo)
    hi = np.array(lp.hi)
    x = np.where((x < lo) & (x > lo - 1e-7), lo, x)
    x = np.where((x > hi) & (x < hi + 1e-7), hi, x)
    if integral:
        b = np.array(lp.binary, dtype=bool)
        if b.any():
            if np.max(np.abs(x[b] - np.round(x[b]))) > FEASIBILITY_CHECK:
                res.status = "error"
                res.message = "binary values not integral"
            x[b] = np.round(x[b])
    res.x = x
    viol = lp.max_violation(x)
    if viol > FEASIBILITY_CHECK * max(1.0, float(np.max(np.abs(x), initial=0.0))) and res.status in ("optimal", "gap_limit"):
        res.status = "error"
        res.message = f"reported solution violates constraints by {viol:.3g}"
    return res
