"""Best-bound branch and bound over the native simplex."""
from __future__ import annotations

import heapq
import math
from dataclasses import replace

import numpy as np

from .lp import solve_lp
from .problems import LinearProgram, SolveOutcome, Status

INT_TOL = 1e-6


def solve_milp(lp: LinearProgram, integer_vars, *, method: str = "bnb", node_limit: int = 1_000_000,
               rel_gap: float = 0.0, time_limit: float | None = None) -> SolveOutcome:
    """Minimise ``lp`` with ``integer_vars`` restricted to integers.

    Branching picks the most fractional variable (lowest index on ties);
    open nodes are explored best bound first (creation order on ties). On
    hitting ``node_limit`` the incumbent is returned with status
    iteration-limit and the remaining relative gap.
    """
    ints = sorted(int(j) for j in integer_vars)
    if method == "highs":
        from .highs import solve_milp_highs
        return solve_milp_highs(lp, ints, rel_gap=max(rel_gap, 1e-9), time_limit=time_limit)
    if method != "bnb":
        raise ValueError(f"unknown MILP method {method!r}")
    for j in ints:
        if not (np.isfinite(lp.lower[j]) and np.isfinite(lp.upper[j])):
            raise ValueError(f"integer variable {j} must be bounded")

    root = solve_lp(lp)
    if not ints or root.status is not Status.OPTIMAL:
        if root.status is Status.OPTIMAL:
            root.bound = root.objective
        return root

    best: SolveOutcome | None = None
    best_obj = math.inf
    counter = 0
    heap = [(root.objective, counter, lp.lower.copy(), lp.upper.copy(), root)]
    nodes = 1
    iv = np.array(ints)
    pivots = root.iterations

    def prune_level():
        if best_obj == math.inf:
            return math.inf
        return best_obj - max(1e-9, rel_gap) * max(1.0, abs(best_obj))

    while heap:
        bound, _, lo, up, out = heapq.heappop(heap)
        if bound >= prune_level():
            continue
        vals = out.x[iv]
        frac = np.abs(vals - np.round(vals))
        if frac.max() <= INT_TOL:
            x = out.x.copy()
            x[iv] = np.round(vals)
            obj = float(lp.c @ x)
            if obj < best_obj:
                best_obj = obj
                best = replace(out, x=x, objective=obj)
            continue
        if nodes >= node_limit:
            heapq.heappush(heap, (bound, counter, lo, up, out))
            break
        k = int(np.argmax(frac))  # first index among ties
        j = int(iv[k])
        v = out.x[j]
        for side in (0, 1):
            lo2, up2 = lo.copy(), up.copy()
            if side == 0:
                up2[j] = math.floor(v)
            else:
                lo2[j] = math.ceil(v)
            if lo2[j] > up2[j]:
                continue
            child = solve_lp(replace(lp, lower=lo2, upper=up2))
            nodes += 1
            pivots += child.iterations
            if child.status is Status.OPTIMAL and child.objective < prune_level():
                counter += 1
                heapq.heappush(heap, (child.objective, counter, lo2, up2, child))
            elif child.status is Status.ITERATION_LIMIT:
                raise RuntimeError("LP relaxation hit the pivot limit inside branch and bound")

    open_bound = min((h[0] for h in heap), default=math.inf)
    if best is None:
        if heap:
            return SolveOutcome(Status.ITERATION_LIMIT, nodes=nodes, bound=open_bound, iterations=pivots)
        return SolveOutcome(Status.INFEASIBLE, nodes=nodes, iterations=pivots)
    lower = min(open_bound, best_obj)
    gap = (best_obj - lower) / max(1.0, abs(best_obj))
    status = Status.OPTIMAL if not heap or gap <= max(rel_gap, 1e-9) else Status.ITERATION_LIMIT
    best.status = status
    best.nodes = nodes
    best.bound = lower if heap else best_obj
    best.gap = max(gap, 0.0) if heap else 0.0
    best.iterations = pivots
    return best
