"""Per-hour inner decomposition: heat master (LP) and power/PEV sub-problem (QP).

For a fixed hour the complicating vector is the heat dispatch H. The sub-
problem prices power dispatch for given (H, X, N) and its cuts are written in
the joint (H, X, N) space, so they stay valid when the outer loop moves X and
N and can be pooled across outer iterations.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..kernels import LinearProgram, QuadraticProgram, Status, solve_lp, solve_qp
from ..kernels.problems import EQ, GE, LE
from ..model import DemandProfile, PowerSystem, UnitKind
from ..pev import per_vehicle_power
from .cuts import FEASIBILITY, H_SPACE, NORMAL, X_SPACE, BendersCut, CutPool, build_strong_cut

INF = np.inf
PERSPECTIVE_EPS = 1e-9
NATIVE_LP_ROWS = 60


class HourModel:
    """Static index layout and constraint templates shared by all hours."""

    def __init__(self, system: PowerSystem, demand: DemandProfile, perspective: bool = True,
                 lp_backend: str = "auto"):
        self.system, self.demand = system, demand
        self.perspective = perspective
        self.lp_backend = lp_backend
        units = system.units
        self.N, self.T, self.M = len(units), demand.horizon, len(system.lots)
        self.pu = system.power_units
        self.chp = system.indices(UnitKind.CHP)
        self.hu = system.heat_units
        self.thermal = system.indices(UnitKind.THERMAL)
        self.ppev = np.array([per_vehicle_power(l) for l in system.lots])
        self.gc = np.array([1.0 if l.grid_charging else 0.0 for l in system.lots])
        self.pi = np.array([l.pi for l in system.lots])
        self.heat_lo = np.array([units[i].heat_bounds[0] for i in self.hu])
        self.heat_hi = np.array([units[i].heat_bounds[1] for i in self.hu])
        self.fixed_cost = np.array([u.a for u in units])
        self._build_sub()

    def lp_method(self, lp: LinearProgram) -> str:
        """Native simplex for small heat masters; HiGHS once the cut pool makes the tableau large."""
        if self.lp_backend == "auto":
            return "highs" if lp.m > NATIVE_LP_ROWS else "simplex"
        return self.lp_backend

    # z-vectors: H-space z = [H, X, ND, NC]; X-space = [X, ND, NC]
    @property
    def nz_h(self) -> int:
        return len(self.hu) + self.N + 2 * self.M

    @property
    def nz_x(self) -> int:
        return self.N + 2 * self.M

    def _build_sub(self):
        sysm, units = self.system, self.system.units
        nP, nR, nH, N, M = len(self.pu), len(self.chp), len(self.hu), self.N, self.M
        oP, oR, oH, oX = 0, nP, nP + nR, nP + nR + nH
        oD, oC = oX + N, oX + N + M
        n = oC + M
        self.sub_off = dict(P=oP, R=oR, H=oH, X=oX, D=oD, C=oC, n=n)
        rows, senses, kinds = [], [], []

        def row():
            r = np.zeros(n)
            rows.append(r)
            return r

        # fixings H, X, ND, NC (in z order)
        for k in range(nH):
            row()[oH + k] = 1.0
            senses.append(EQ); kinds.append("fix")
        for i in range(N):
            row()[oX + i] = 1.0
            senses.append(EQ); kinds.append("fix")
        for j in range(M):
            row()[oD + j] = 1.0
            senses.append(EQ); kinds.append("fix")
        for j in range(M):
            row()[oC + j] = 1.0
            senses.append(EQ); kinds.append("fix")
        self.n_fix = len(rows)
        pidx = {i: k for k, i in enumerate(self.pu)}
        hidx = {i: k for k, i in enumerate(self.hu)}
        for i in self.thermal:
            u = units[i]
            r = row(); r[oP + pidx[i]] = 1.0; r[oX + i] = -u.p_max
            senses.append(LE); kinds.append("unit")
            r = row(); r[oP + pidx[i]] = -1.0; r[oX + i] = u.p_min
            senses.append(LE); kinds.append("unit")
        for kr, i in enumerate(self.chp):
            u = units[i]
            for col in (oP + pidx[i], oR + kr):
                for a, b, g in u.halfspaces:
                    r = row(); r[col] = a; r[oH + hidx[i]] = b; r[oX + i] = -g
                    senses.append(LE); kinds.append("unit")
        r = row()
        r[[oP + k for k in range(nP)]] = 1.0
        r[oD:oD + M] = self.ppev
        r[oC:oC + M] = -self.ppev * self.gc
        senses.append(EQ); kinds.append("balance")
        self.row_balance = len(rows) - 1
        r = row()
        for i in self.thermal:
            r[oX + i] = units[i].p_max
        r[oR:oR + nR] = 1.0
        r[oD:oD + M] = self.ppev
        r[oC:oC + M] = -self.ppev * self.gc
        senses.append(GE); kinds.append("reserve")
        self.row_reserve = len(rows) - 1
        self.sub_A = np.array(rows).reshape(len(rows), n)
        self.sub_senses = senses
        self.sub_kinds = kinds

        Q = np.zeros((n, n))
        c = np.zeros(n)
        for i in self.pu:
            u, k = units[i], oP + pidx[i]
            Q[k, k] = 2.0 * u.c
            c[k] = u.b
        for i in self.hu:
            u, k = units[i], oH + hidx[i]
            Q[k, k] = 2.0 * u.e
            c[k] = u.d
            if u.kind is UnitKind.CHP:
                kp = oP + pidx[i]
                Q[k, kp] = Q[kp, k] = u.f
        c[oD:oD + M] = self.pi * self.ppev
        self.sub_Q, self.sub_c = Q, c
        owner = np.full(n, -1)
        owner[oP:oP + nP] = self.pu
        owner[oH:oH + nH] = self.hu
        self.var_unit = owner
        lo = np.full(n, -INF)
        lo[:oX - nH] = 0.0          # P and R nonnegative
        self.sub_lower, self.sub_upper = lo, np.full(n, INF)

    def sub_rhs(self, t: int, z: np.ndarray) -> np.ndarray:
        b = np.zeros(len(self.sub_senses))
        b[:self.n_fix] = z
        b[self.row_balance] = self.demand.pd[t]
        b[self.row_reserve] = self.demand.pd[t] + self.demand.rd[t]
        return b

    def z_h(self, h, x, n) -> np.ndarray:
        return np.concatenate([np.asarray(h, float), np.asarray(x, float), np.asarray(n, float)])


@dataclass
class SubResult:
    status: Status
    cost: float = float("nan")
    p: Optional[np.ndarray] = None      # power for model.pu
    r: Optional[np.ndarray] = None      # reserve capability for model.chp
    lam_h: Optional[np.ndarray] = None
    lam_x: Optional[np.ndarray] = None
    lam_n: Optional[np.ndarray] = None
    cut: Optional[BendersCut] = None    # normal or feasibility cut in H-space


def _split_duals(model: HourModel, g):
    nH = len(model.hu)
    return g[:nH], g[nH:nH + model.N], g[nH + model.N:]


def solve_inner_sub(model: HourModel, t: int, x_t, h_t, n_t, iteration: int = 0) -> SubResult:
    """Hour-t power/PEV dispatch for fixed commitment x_t, heat h_t and fleet counts n_t.

    ``n_t`` is [n_dsch per lot, n_ch per lot]. Returns the optimal variable
    cost with the fixing duals, or, when infeasible, a unit-norm
    feasibility cut from the elastic phase-one LP.
    """
    z = model.z_h(h_t, x_t, n_t)
    Q, on = model.sub_Q, None
    if model.perspective:
        # quadratic fuel terms q(P, H) / x: equal at integer x, tighter in between
        on = np.asarray(x_t, float) > PERSPECTIVE_EPS
        xs = np.where(on, x_t, 1.0)
        own = model.var_unit
        scale = np.where(own >= 0, 1.0 / xs[np.maximum(own, 0)], 1.0)
        Q = model.sub_Q * scale[:, None]
    qp = QuadraticProgram(c=model.sub_c, A=model.sub_A, senses=model.sub_senses, b=model.sub_rhs(t, z),
                          lower=model.sub_lower, upper=model.sub_upper, Q=Q)
    out = solve_qp(qp)
    off = model.sub_off
    if out.status is Status.OPTIMAL:
        g = out.duals[:model.n_fix].copy()
        if on is not None:
            v = out.x
            own = model.var_unit
            quad = np.zeros(model.N)
            np.add.at(quad, own[own >= 0], (0.5 * v * (Q @ v))[own >= 0])
            # d/dx of q/x at fixed (P, H) is -q/x^2 = -(q/x)/x
            g[len(model.hu):len(model.hu) + model.N] -= np.where(on, quad / xs, 0.0)
        lh, lx, ln = _split_duals(model, g)
        cut = BendersCut(H_SPACE, t, out.objective, g, z, NORMAL, iteration)
        return SubResult(Status.OPTIMAL, out.objective, out.x[off["P"]:off["R"]].copy(),
                         out.x[off["R"]:off["H"]].copy(), lh, lx, ln, cut)
    if out.status is not Status.INFEASIBLE:
        raise RuntimeError(f"inner sub-problem returned {out.status.value} at hour {t + 1}")
    w, g = _elastic(model.sub_A, model.sub_senses, qp.b, model.sub_lower, model.sub_upper, model.n_fix)
    cut = _feasibility_cut(H_SPACE, t, w, g, z, iteration)
    return SubResult(Status.INFEASIBLE, cut=cut)


def _elastic(A, senses, b, lower, upper, n_fix):
    """min total violation of rows n_fix.. with rows ..n_fix kept hard; returns (w, fixing duals)."""
    m, n = A.shape
    cols = []
    for i in range(n_fix, m):
        if senses[i] in (EQ, GE):
            cols.append((i, 1.0))
        if senses[i] in (EQ, LE):
            cols.append((i, -1.0))
    S = np.zeros((m, len(cols)))
    for k, (i, sgn) in enumerate(cols):
        S[i, k] = sgn
    lp = LinearProgram(c=np.concatenate([np.zeros(n), np.ones(len(cols))]), A=np.hstack([A, S]),
                       senses=senses, b=b, lower=np.concatenate([lower, np.zeros(len(cols))]),
                       upper=np.concatenate([upper, np.full(len(cols), INF)]))
    out = solve_lp(lp)
    if out.status is not Status.OPTIMAL:
        raise RuntimeError(f"elastic phase-one LP returned {out.status.value}")
    return out.objective, out.duals[:n_fix]


def _feasibility_cut(space, t, w, g, z, iteration):
    scale = max(float(np.linalg.norm(g)), abs(w), 1e-12)
    return BendersCut(space, t, w / scale, g / scale, z, FEASIBILITY, iteration)


@dataclass
class InnerMasterResult:
    status: Status
    objective: float = float("nan")
    h: Optional[np.ndarray] = None
    lam_x: Optional[np.ndarray] = None
    lam_n: Optional[np.ndarray] = None
    infeasibility: float = 0.0
    cut: Optional[BendersCut] = None     # X-space feasibility cut when infeasible


def _inner_master_lp(model: HourModel, t: int, x_t, n_t, pool: Optional[CutPool]):
    nH, N, M = len(model.hu), model.N, model.M
    n = 1 + nH + N + 2 * M
    oH, oX, oN = 1, 1 + nH, 1 + nH + N
    rows, senses, b = [], [], []
    for i, v in enumerate(np.concatenate([x_t, n_t])):
        r = np.zeros(n); r[oX + i] = 1.0
        rows.append(r); senses.append(EQ); b.append(float(v))
    n_fix = len(rows)
    r = np.zeros(n); r[oH:oH + nH] = 1.0
    rows.append(r); senses.append(EQ); b.append(float(model.demand.hd[t]))
    for k, i in enumerate(model.hu):
        r = np.zeros(n); r[oH + k] = 1.0; r[oX + i] = -model.heat_hi[k]
        rows.append(r); senses.append(LE); b.append(0.0)
        if model.heat_lo[k] > 0:
            r = np.zeros(n); r[oH + k] = -1.0; r[oX + i] = model.heat_lo[k]
            rows.append(r); senses.append(LE); b.append(0.0)
    n_hard = len(rows)
    opt_rows = []
    if pool is not None:
        for cut in pool:
            r = np.zeros(n)
            if cut.kind == FEASIBILITY:
                r[1:] = cut.gradient
                rows.append(r); senses.append(LE); b.append(-cut.intercept)
            else:
                r[0] = 1.0
                r[1:] = -cut.gradient
                opt_rows.append((r, cut.intercept))
    feas_end = len(rows)
    for r, ic in opt_rows:
        rows.append(r); senses.append(GE); b.append(ic)
    lower = np.full(n, -INF)
    lower[0] = 0.0          # recourse costs are nonnegative
    lower[oH:oH + nH] = 0.0
    c = np.zeros(n); c[0] = 1.0
    lp = LinearProgram(c=c, A=np.array(rows).reshape(len(rows), n), senses=senses, b=np.array(b),
                       lower=lower, upper=np.full(n, INF))
    return lp, n_fix, n_hard, feas_end


def solve_inner_master(model: HourModel, t: int, x_t, n_t, pool: Optional[CutPool] = None,
                       iteration: int = 0) -> InnerMasterResult:
    """min mu over heat dispatch subject to heat balance, heat limits and the pooled cuts."""
    x_t = np.asarray(x_t, float)
    n_t = np.asarray(n_t, float)
    lp, n_fix, n_hard, feas_end = _inner_master_lp(model, t, x_t, n_t, pool)
    out = solve_lp(lp, method=model.lp_method(lp))
    nH = len(model.hu)
    if out.status is Status.OPTIMAL:
        g = out.duals[:n_fix]
        return InnerMasterResult(Status.OPTIMAL, out.objective, out.x[1:1 + nH].copy(),
                                 g[:model.N].copy(), g[model.N:].copy())
    if out.status is not Status.INFEASIBLE:
        raise RuntimeError(f"inner master returned {out.status.value} at hour {t + 1}")
    # optimality rows never bind feasibility (mu is free above); drop them and mu
    keep = list(range(feas_end))
    A = lp.A[keep][:, 1:]
    w, g = _elastic(A, [lp.senses[i] for i in keep], lp.b[keep], lp.lower[1:], lp.upper[1:], n_fix)
    z = np.concatenate([x_t, n_t])
    return InnerMasterResult(Status.INFEASIBLE, infeasibility=w,
                             cut=_feasibility_cut(X_SPACE, t, w, g, z, iteration))


@dataclass
class InnerResult:
    status: Status
    recourse: float = float("inf")      # best sub-problem cost found (upper bound)
    master_value: float = float("nan")  # final inner master value (lower bound)
    h: Optional[np.ndarray] = None
    p: Optional[np.ndarray] = None
    cut: Optional[BendersCut] = None    # X-space cut for the outer master
    iterations: int = 0
    converged: bool = False


def inner_benders(model: HourModel, t: int, x_t, n_t, pool: CutPool, *, max_inner: int = 100,
                  tol: float = 1e-9, outer_iteration: int = 0) -> InnerResult:
    """Inner decomposition loop for one hour at fixed (x_t, n_t)."""
    x_t = np.asarray(x_t, float)
    n_t = np.asarray(n_t, float)
    ub, best = INF, None
    mm = None
    converged = False
    v = 0
    for v in range(1, max_inner + 1):
        tag = outer_iteration * (max_inner + 1) + v
        mm = solve_inner_master(model, t, x_t, n_t, pool, iteration=outer_iteration)
        if mm.status is Status.INFEASIBLE:
            return InnerResult(Status.INFEASIBLE, cut=mm.cut, iterations=v)
        if ub < INF and ub - mm.objective <= tol * max(1.0, abs(ub)):
            converged = True
            break
        sub = solve_inner_sub(model, t, x_t, mm.h, n_t, iteration=tag)
        if sub.status is Status.OPTIMAL:
            pool.add(sub.cut)
            if sub.cost < ub:
                ub, best = sub.cost, (mm.h.copy(), sub.p)
            if ub - mm.objective <= tol * max(1.0, abs(ub)):
                converged = True
                break
        else:
            pool.add(sub.cut)
            try:
                pool.add(build_strong_cut(pool.optimality, sub.cut.point, exclude_iteration=tag))
            except ValueError:
                pass
    z = np.concatenate([x_t, n_t])
    cut = BendersCut(X_SPACE, t, mm.objective, np.concatenate([mm.lam_x, mm.lam_n]), z, NORMAL,
                     outer_iteration)
    if best is None:
        return InnerResult(Status.ITERATION_LIMIT, master_value=mm.objective, cut=cut, iterations=v)
    return InnerResult(Status.OPTIMAL, ub, mm.objective, best[0], best[1], cut, v, converged)


def dispatch_hour(model: HourModel, t: int, x_t, n_t):
    """Joint heat/power dispatch of one hour with commitment and fleet counts fixed.

    Returns (status, p over model.pu, h over model.hu, variable cost).
    """
    nH = len(model.hu)
    off = model.sub_off
    A = model.sub_A[nH:]
    senses = list(model.sub_senses[nH:])
    b = model.sub_rhs(t, model.z_h(np.zeros(nH), x_t, n_t))[nH:]
    extra, eb, es = [], [], []
    r = np.zeros(off["n"]); r[off["H"]:off["H"] + nH] = 1.0
    extra.append(r); eb.append(float(model.demand.hd[t])); es.append(EQ)
    for k, i in enumerate(model.hu):
        r = np.zeros(off["n"]); r[off["H"] + k] = 1.0; r[off["X"] + i] = -model.heat_hi[k]
        extra.append(r); eb.append(0.0); es.append(LE)
        if model.heat_lo[k] > 0:
            r = np.zeros(off["n"]); r[off["H"] + k] = -1.0; r[off["X"] + i] = model.heat_lo[k]
            extra.append(r); eb.append(0.0); es.append(LE)
    lower = model.sub_lower.copy()
    lower[off["H"]:off["H"] + nH] = 0.0
    qp = QuadraticProgram(c=model.sub_c, A=np.vstack([A, np.array(extra)]), senses=senses + es,
                          b=np.concatenate([b, eb]), lower=lower, upper=model.sub_upper, Q=model.sub_Q)
    out = solve_qp(qp)
    if out.status is not Status.OPTIMAL:
        return out.status, None, None, float("inf")
    return (Status.OPTIMAL, out.x[off["P"]:off["R"]].copy(), out.x[off["H"]:off["H"] + nH].copy(),
            out.objective)
