"""Dense two-phase primal simplex with dual recovery.

Variable bounds are folded into the standard form (shifts, reflections,
free-variable splits and explicit upper-bound rows). Dantzig pricing with
lowest-index tie-breaking; after ``bland_after`` pivots the entering rule
switches to Bland's rule, which cannot cycle.
"""
from __future__ import annotations

import numpy as np

from .problems import EQ, GE, LE, LinearProgram, SolveOutcome, Status

PIVOT_TOL = 1e-9
COST_TOL = 1e-9


class _Standard:
    """min c's  s.t.  M s (senses) r,  s >= 0, with the back-mapping to x."""

    def __init__(self, lp: LinearProgram):
        n = lp.n
        cols = []  # (original var, sign, kind)
        offset = np.zeros(n)
        ub_rows = []  # (std col, width, original var)
        for j in range(n):
            lo, up = lp.lower[j], lp.upper[j]
            if np.isfinite(lo):
                offset[j] = lo
                cols.append((j, 1.0, "lower"))
                if np.isfinite(up):
                    ub_rows.append((len(cols) - 1, up - lo, j))
            elif np.isfinite(up):
                offset[j] = up
                cols.append((j, -1.0, "upper"))
            else:
                cols.append((j, 1.0, "free"))
                cols.append((j, -1.0, "free"))
        nc = len(cols)
        T = np.zeros((n, nc))
        for k, (j, sgn, _) in enumerate(cols):
            T[j, k] = sgn
        self.cols = cols
        self.T = T
        self.offset = offset
        self.c = T.T @ lp.c
        self.const = float(lp.c @ offset)

        A = lp.A @ T
        rhs = lp.b - lp.A @ offset
        senses = list(lp.senses)
        origin = [("row", i) for i in range(lp.m)]
        if ub_rows:
            B = np.zeros((len(ub_rows), nc))
            for r, (k, width, _) in enumerate(ub_rows):
                B[r, k] = 1.0
            A = np.vstack([A, B])
            rhs = np.concatenate([rhs, [w for _, w, _ in ub_rows]])
            senses += [LE] * len(ub_rows)
            origin += [("ub", j) for _, _, j in ub_rows]
        self.ub_rows = ub_rows

        keep, scale, flip = [], [], []
        self.infeasible = False
        for i in range(A.shape[0]):
            s = np.abs(A[i]).max() if nc else 0.0
            if s == 0.0:
                tol = 1e-9 * max(1.0, abs(rhs[i]))
                ok = {LE: rhs[i] >= -tol, GE: rhs[i] <= tol, EQ: abs(rhs[i]) <= tol}[senses[i]]
                if not ok:
                    self.infeasible = True
                continue
            keep.append(i)
            scale.append(s)
            flip.append(-1.0 if rhs[i] < 0 else 1.0)
        keep = np.array(keep, dtype=int)
        scale = np.array(scale)
        flip = np.array(flip)
        self.M = (A[keep] / scale[:, None]) * flip[:, None] if keep.size else np.zeros((0, nc))
        self.r = (rhs[keep] / scale) * flip if keep.size else np.zeros(0)
        sn = []
        for idx, i in enumerate(keep):
            s = senses[i]
            if flip[idx] < 0 and s != EQ:
                s = GE if s == LE else LE
            sn.append(s)
        self.senses = sn
        self.keep = keep
        self.scale = scale
        self.flip = flip
        self.origin = [origin[i] for i in keep]
        self.n_rows_total = A.shape[0]


def solve_lp(lp: LinearProgram, *, method: str = "simplex", max_pivots: int = 100_000,
             bland_after: int = 10_000) -> SolveOutcome:
    """Solve a linear program; ``method`` is ``"simplex"`` (native) or ``"highs"``."""
    if method == "highs":
        from .highs import solve_lp_highs
        return solve_lp_highs(lp)
    if method != "simplex":
        raise ValueError(f"unknown LP method {method!r}")
    return _simplex(lp, max_pivots=max_pivots, bland_after=bland_after)


def _choose_entering(obj, allowed, bland):
    cand = np.flatnonzero((obj[:-1] < -COST_TOL) & allowed)
    if cand.size == 0:
        return -1
    if bland:
        return int(cand[0])
    return int(cand[np.argmin(obj[cand])])


def _choose_leaving(tab, basis, k):
    col = tab[:, k]
    rows = np.flatnonzero(col > PIVOT_TOL)
    if rows.size == 0:
        return -1
    ratios = tab[rows, -1] / col[rows]
    best = ratios.min()
    ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
    return int(ties[np.argmin(basis[ties])])


def _pivot(tab, obj, basis, r, k):
    tab[r] /= tab[r, k]
    col = tab[:, k].copy()
    col[r] = 0.0
    nz = np.flatnonzero(col)
    if nz.size:
        tab[nz] -= col[nz, None] * tab[r]
    obj -= obj[k] * tab[r]
    basis[r] = k


def _iterate(tab, obj, basis, allowed, state, max_pivots, bland_after):
    while True:
        if state["pivots"] >= max_pivots:
            return Status.ITERATION_LIMIT
        k = _choose_entering(obj, allowed, state["pivots"] >= bland_after)
        if k < 0:
            return Status.OPTIMAL
        r = _choose_leaving(tab, basis, k)
        if r < 0:
            state["ray_col"] = k
            return Status.UNBOUNDED
        _pivot(tab, obj, basis, r, k)
        state["pivots"] += 1


def _simplex(lp: LinearProgram, max_pivots: int, bland_after: int) -> SolveOutcome:
    std = _Standard(lp)
    if std.infeasible:
        return SolveOutcome(Status.INFEASIBLE, message="empty row with violated rhs")
    M, rhs, senses = std.M, std.r, std.senses
    m, ns = M.shape
    n_slack = sum(1 for s in senses if s != EQ)
    n_art = sum(1 for s in senses if s != LE)
    N = ns + n_slack + n_art
    tab = np.zeros((m, N + 1))
    tab[:, :ns] = M
    tab[:, -1] = rhs
    basis = np.zeros(m, dtype=int)
    si, ai = ns, ns + n_slack
    for i, s in enumerate(senses):
        if s == LE:
            tab[i, si] = 1.0
            basis[i] = si
            si += 1
        elif s == GE:
            tab[i, si] = -1.0
            si += 1
            tab[i, ai] = 1.0
            basis[i] = ai
            ai += 1
        else:
            tab[i, ai] = 1.0
            basis[i] = ai
            ai += 1
    is_art = np.zeros(N, dtype=bool)
    is_art[ns + n_slack:] = True
    state = {"pivots": 0}

    if n_art:
        cost1 = np.zeros(N + 1)
        cost1[:N][is_art] = 1.0
        obj = cost1.copy()
        for i in range(m):
            obj -= cost1[basis[i]] * tab[i]
        st = _iterate(tab, obj, basis, np.ones(N, dtype=bool), state, max_pivots, bland_after)
        if st is Status.ITERATION_LIMIT:
            return SolveOutcome(st, iterations=state["pivots"])
        infeas = -obj[-1]
        if infeas > 1e-9 * max(1.0, np.abs(rhs).max(initial=0.0)):
            return SolveOutcome(Status.INFEASIBLE, iterations=state["pivots"],
                                message=f"phase one residual {infeas:.3e}")
        # drive remaining artificials out of the basis
        drop = []
        for i in range(m):
            if is_art[basis[i]]:
                cand = np.flatnonzero((np.abs(tab[i, :N]) > PIVOT_TOL) & ~is_art)
                if cand.size:
                    _pivot(tab, obj, basis, i, int(cand[0]))
                else:
                    drop.append(i)
        if drop:
            keep_rows = np.setdiff1d(np.arange(m), drop)
            tab = tab[keep_rows]
            basis = basis[keep_rows]
        else:
            keep_rows = np.arange(m)
    else:
        keep_rows = np.arange(m)

    # artificial columns play no further part
    N = ns + n_slack
    tab = np.column_stack([tab[:, :N], tab[:, -1]])
    cost2 = np.zeros(N + 1)
    cost2[:ns] = std.c
    obj = cost2.copy()
    for i in range(tab.shape[0]):
        obj -= cost2[basis[i]] * tab[i]
    allowed = np.ones(N, dtype=bool)
    st = _iterate(tab, obj, basis, allowed, state, max_pivots, bland_after)
    if st is Status.ITERATION_LIMIT:
        return SolveOutcome(st, iterations=state["pivots"])
    if st is Status.UNBOUNDED:
        k = state["ray_col"]
        d = np.zeros(N)
        d[k] = 1.0
        for i, bi in enumerate(basis):
            d[bi] = -tab[i, k]
        ray = std.T @ d[:ns]
        return SolveOutcome(Status.UNBOUNDED, iterations=state["pivots"], ray=ray)

    # recompute basic values and duals from the original (scaled) data
    full = np.zeros((m, N))
    full[:, :ns] = M
    si = ns
    for i, s in enumerate(senses):
        if s == LE:
            full[i, si] = 1.0
            si += 1
        elif s == GE:
            full[i, si] = -1.0
            si += 1
    Mk = full[keep_rows][:, :ns + n_slack]
    rk = rhs[keep_rows]
    Bm = Mk[:, basis]
    cB = np.concatenate([std.c, np.zeros(n_slack)])[basis]
    try:
        xB = np.linalg.solve(Bm, rk)
        yk = np.linalg.solve(Bm.T, cB)
    except np.linalg.LinAlgError:
        xB = tab[:, -1].copy()
        yk = np.linalg.lstsq(Bm.T, cB, rcond=None)[0]
    s_all = np.zeros(ns + n_slack)
    s_all[basis] = xB
    s_all = np.maximum(s_all, 0.0)
    y_std = np.zeros(m)
    y_std[keep_rows] = yk

    x = std.offset + std.T @ s_all[:ns]
    duals = np.zeros(lp.m)
    upper_duals = np.zeros(lp.n)
    lower_duals = np.zeros(lp.n)
    for i, (kind, idx) in enumerate(std.origin):
        y_orig = y_std[i] * std.flip[i] / std.scale[i]
        if kind == "row":
            duals[idx] = y_orig
        else:
            upper_duals[idx] = -y_orig
    red = std.c - M.T @ y_std
    for k, (j, sgn, kind) in enumerate(std.cols):
        if kind == "lower":
            lower_duals[j] = red[k]
        elif kind == "upper":
            upper_duals[j] = red[k]
    return SolveOutcome(Status.OPTIMAL, x=x, objective=float(lp.c @ x), duals=duals,
                        lower_duals=lower_duals, upper_duals=upper_duals,
                        iterations=state["pivots"])
