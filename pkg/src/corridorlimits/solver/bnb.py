"""Best-bound branch and bound over the simplex LP relaxation."""

from __future__ import annotations

import heapq
import logging
import math
import time

import numpy as np

from .model import LinearProgram, SolveResult
from .simplex import solve_arrays

log = logging.getLogger(__name__)

INT_TOL = 1e-6


def _gap(incumbent: float, bound: float) -> float:
    if not math.isfinite(incumbent):
        return math.inf
    if not math.isfinite(bound):
        return math.inf
    return max(0.0, incumbent - bound) / max(abs(incumbent), 1e-10)


def branch_and_bound(lp: LinearProgram, gap: float = 1e-6, time_limit: float | None = None,
                     node_limit: int | None = None) -> SolveResult:
    """Solve ``lp`` to relative ``gap`` by best-bound branch and bound.

    Branching picks the most fractional binary (lowest index on ties). Children
    are solved when created so that the heap is ordered by their own LP bound;
    equal bounds pop in creation order. Each processed node appends a line
    ``node, incumbent, bound, gap`` to the returned log.
    """
    start = time.monotonic()
    deadline = None if time_limit is None else start + time_limit
    c, A, row_lo, row_hi, lo0, hi0, is_bin = lp.arrays()
    A = A.toarray()
    const = lp.objective.const
    bin_idx = np.flatnonzero(is_bin)
    lines: list[str] = []

    def remaining():
        return None if deadline is None else max(0.0, deadline - time.monotonic())

    def relax(lo, hi):
        return solve_arrays(c, A, row_lo, row_hi, lo, hi, time_limit=remaining())

    root = relax(lo0, hi0)
    if root.status in ("infeasible", "unbounded", "error"):
        return SolveResult(root.status, wall_time=time.monotonic() - start,
                           iterations=root.iterations, message=root.message)
    if root.status == "time_limit":
        return SolveResult("time_limit", wall_time=time.monotonic() - start)

    incumbent = math.inf
    best_x = None
    node_count = 0
    branched = 0
    iterations = root.iterations
    counter = 0
    heap = [(root.objective, counter, lo0, hi0, root.x)]
    status = None
    dropped = False

    def try_incumbent(x, lo, hi):
        nonlocal incumbent, best_x, iterations
        xr = x.copy()
        xr[bin_idx] = np.round(xr[bin_idx])
        if lp.max_violation(xr) > 1e-6:
            # polish: re-solve the continuous part with binaries pinned
            flo, fhi = lo.copy(), hi.copy()
            flo[bin_idx] = xr[bin_idx]
            fhi[bin_idx] = xr[bin_idx]
            out = relax(flo, fhi)
            iterations += out.iterations
            if out.status != "optimal":
                return
            xr = out.x
            xr[bin_idx] = np.round(xr[bin_idx])
        value = float(c @ xr)
        if value < incumbent:
            incumbent = value
            best_x = xr

    while heap:
        bound = heap[0][0]
        cur_gap = _gap(incumbent, bound)
        if cur_gap <= gap:
            status = "optimal" if cur_gap == 0.0 else "gap_limit"
            break
        if deadline is not None and time.monotonic() > deadline:
            status = "time_limit"
            break
        if node_limit is not None and node_count >= node_limit:
            status = "time_limit"
            break
        bound, _, lo, hi, x = heapq.heappop(heap)
        if bound >= incumbent - gap * max(abs(incumbent), 1e-10) and math.isfinite(incumbent):
            continue
        node_count += 1
        xb = x[bin_idx]
        frac = np.abs(xb - np.round(xb))
        if frac.size == 0 or frac.max() <= INT_TOL:
            try_incumbent(x, lo, hi)
        else:
            j = int(bin_idx[int(np.argmax(frac))])
            branched += 1
            for value in (0.0, 1.0):
                clo, chi = lo.copy(), hi.copy()
                clo[j] = chi[j] = value
                out = relax(clo, chi)
                iterations += out.iterations
                if out.status == "optimal" and out.objective < incumbent:
                    counter += 1
                    heapq.heappush(heap, (max(out.objective, bound), counter, clo, chi, out.x))
                elif out.status in ("error", "time_limit"):
                    dropped = True
                    log.warning("node LP ended with %s; subtree dropped", out.status)
        top = heap[0][0] if heap else incumbent
        lines.append(f"{node_count}, {incumbent:.10g}, {min(top, incumbent):.10g}, "
                     f"{_gap(incumbent, min(top, incumbent)):.3g}")

    if status is None:
        if dropped:
            status = "error"
        else:
            status = "optimal" if best_x is not None else "infeasible"
    best_bound = min(heap[0][0], incumbent) if heap else incumbent
    if best_x is None:
        return SolveResult(status, best_bound=best_bound + const if math.isfinite(best_bound) else best_bound,
                           wall_time=time.monotonic() - start, nodes=branched,
                           iterations=iterations, log=lines)
    assert best_bound <= incumbent + 1e-9 * max(1.0, abs(incumbent)), "bound sandwich violated"
    return SolveResult(status, objective=incumbent + const, x=best_x,
                       mip_gap=_gap(incumbent, best_bound), best_bound=best_bound + const,
                       wall_time=time.monotonic() - start, nodes=branched,
                       iterations=iterations, log=lines)
