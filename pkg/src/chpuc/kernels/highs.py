"""Optional HiGHS backend (through scipy) behind the same kernel contracts."""
from __future__ import annotations

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

from .problems import EQ, GE, LE, LinearProgram, SolveOutcome, Status


def _split(lp: LinearProgram):
    le = [i for i, s in enumerate(lp.senses) if s == LE]
    ge = [i for i, s in enumerate(lp.senses) if s == GE]
    eq = [i for i, s in enumerate(lp.senses) if s == EQ]
    A_ub = np.vstack([lp.A[le], -lp.A[ge]]) if le or ge else None
    b_ub = np.concatenate([lp.b[le], -lp.b[ge]]) if le or ge else None
    A_eq = lp.A[eq] if eq else None
    b_eq = lp.b[eq] if eq else None
    return le, ge, eq, A_ub, b_ub, A_eq, b_eq


def solve_lp_highs(lp: LinearProgram) -> SolveOutcome:
    le, ge, eq, A_ub, b_ub, A_eq, b_eq = _split(lp)
    bounds = list(zip(np.where(np.isfinite(lp.lower), lp.lower, None),
                      np.where(np.isfinite(lp.upper), lp.upper, None)))
    res = linprog(lp.c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status == 2:
        return SolveOutcome(Status.INFEASIBLE, message=res.message)
    if res.status == 3:
        return SolveOutcome(Status.UNBOUNDED, message=res.message)
    if res.status == 1:
        return SolveOutcome(Status.ITERATION_LIMIT, message=res.message)
    if res.status != 0:
        return SolveOutcome(Status.INFEASIBLE, message=res.message)
    duals = np.zeros(lp.m)
    if le or ge:
        mu = res.ineqlin.marginals
        duals[le] = mu[:len(le)]
        duals[ge] = -mu[len(le):]
    if eq:
        duals[eq] = res.eqlin.marginals
    return SolveOutcome(Status.OPTIMAL, x=res.x, objective=float(res.fun), duals=duals,
                        lower_duals=np.asarray(res.lower.marginals, dtype=float),
                        upper_duals=-np.asarray(res.upper.marginals, dtype=float),
                        iterations=int(res.nit))


def solve_milp_highs(lp: LinearProgram, integer_vars, *, rel_gap: float = 1e-9,
                     time_limit: float | None = None) -> SolveOutcome:
    integrality = np.zeros(lp.n)
    integrality[list(integer_vars)] = 1
    lb = np.where(np.array(lp.senses) == LE, -np.inf, lp.b)
    ub = np.where(np.array(lp.senses) == GE, np.inf, lp.b)
    cons = [LinearConstraint(lp.A, lb, ub)] if lp.m else []
    opts = {"mip_rel_gap": rel_gap, "disp": False}
    if time_limit is not None:
        opts["time_limit"] = time_limit
    res = milp(lp.c, integrality=integrality, bounds=Bounds(lp.lower, lp.upper),
               constraints=cons, options=opts)
    if res.status == 2:
        return SolveOutcome(Status.INFEASIBLE, message=res.message)
    if res.status == 3:
        return SolveOutcome(Status.UNBOUNDED, message=res.message)
    if res.x is None:
        return SolveOutcome(Status.ITERATION_LIMIT, message=res.message)
    status = Status.OPTIMAL if res.status == 0 else Status.ITERATION_LIMIT
    x = np.asarray(res.x, dtype=float)
    iv = list(integer_vars)
    x[iv] = np.round(x[iv])
    bound = float(getattr(res, "mip_dual_bound", res.fun))
    gap = float(getattr(res, "mip_gap", 0.0) or 0.0)
    return SolveOutcome(status, x=x, objective=float(lp.c @ x), bound=bound, gap=gap,
                        nodes=int(getattr(res, "mip_node_count", 0) or 0), message=res.message)
