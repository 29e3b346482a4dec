"""Outer decomposition: commitment master (MILP) and the orchestrating loop."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..costs import total_cost
from ..geometry import contains, heat_range
from ..kernels import LinearProgram, Status, solve_lp, solve_milp
from ..kernels.problems import EQ, GE, LE
from ..model import DemandProfile, PowerSystem, ScheduleSolution, UnitKind
from ..pev import per_vehicle_power
from .cuts import FEASIBILITY, NORMAL, X_SPACE, BendersCut, ConvergenceTrace, CutPool, TraceRecord
from .inner import HourModel, dispatch_hour, inner_benders


CUT_COEF_FLOOR = 1e-10
TANGENTS = 8            # tangent planes per unit for the relaxed dispatch in the master
FEAS_CUT_SLACK = 0.0


class ModelInfeasibleError(RuntimeError):
    pass


@dataclass
class BendersOptions:
    tol: float = 1e-4
    max_outer: int = 200
    max_inner: int = 100
    inner_tol: float = 1e-9
    master_backend: str = "auto"       # "native", "highs" or "auto"
    master_gap: Optional[float] = None  # relative MILP gap; adaptive down to tol / 4 when unset
    master_time_limit: Optional[float] = None
    master_dispatch: Optional[bool] = None  # relaxed hourly dispatch in the master; None = with HiGHS only
    relaxed_iterations: int = 60       # warm-up iterations on the continuous master
    relaxed_tol: float = 1e-6
    perspective: bool = True           # perspective form of the quadratic fuel terms in the sub-problem
    inner_lp_backend: str = "auto"     # heat-master LPs: "simplex", "highs" or "auto" (by size)
    verbose: bool = False


@dataclass
class MasterResult:
    x: np.ndarray            # N x T
    n_dsch: np.ndarray       # M x T
    n_ch: np.ndarray
    gamma: np.ndarray        # T
    lower_bound: float
    objective: float
    fixed_cost: float        # a.x + startup + shutdown at the returned x


class _MasterLayout:
    def __init__(self, system: PowerSystem, demand: DemandProfile, dispatch: bool = False):
        self.N, self.T, self.M = system.n_units, demand.horizon, len(system.lots)
        N, T, M = self.N, self.T, self.M
        self.ox, self.osu, self.osd = 0, N * T, 2 * N * T
        self.og = 3 * N * T
        self.od = self.og + T
        self.oc = self.od + M * T
        self.n = self.oc + M * T
        if dispatch:
            # relaxed per-unit dispatch: power, reserve capability, heat and a fuel epigraph
            self.op = self.n
            self.orr = self.op + N * T
            self.oh = self.orr + N * T
            self.ophi = self.oh + N * T
            self.n = self.ophi + N * T

    def p(self, i, t):
        return self.op + i * self.T + t

    def r(self, i, t):
        return self.orr + i * self.T + t

    def h(self, i, t):
        return self.oh + i * self.T + t

    def phi(self, i, t):
        return self.ophi + i * self.T + t

    def x(self, i, t):
        return self.ox + i * self.T + t

    def su(self, i, t):
        return self.osu + i * self.T + t

    def sd(self, i, t):
        return self.osd + i * self.T + t

    def g(self, t):
        return self.og + t

    def nd(self, j, t):
        return self.od + j * self.T + t

    def nc(self, j, t):
        return self.oc + j * self.T + t

    def z_cols(self, t):
        """Columns of the hour-t X-space vector [X, ND, NC]."""
        return ([self.x(i, t) for i in range(self.N)] + [self.nd(j, t) for j in range(self.M)]
                + [self.nc(j, t) for j in range(self.M)])


def commitment_rows(system: PowerSystem, T: int, lay: _MasterLayout, lower: np.ndarray, upper: np.ndarray):
    """Start-up/shut-down logic and min up/down in turn-on/turn-off form.

    ``su``/``sd`` columns carry the transition indicators v, w in [0, 1]:
    x_t - x_{t-1} = v_t - w_t, sum of v over the last T_up hours <= x_t and
    sum of w over the last T_down hours <= 1 - x_t. Hours forced by the
    initial state are fixed in the bounds.
    """
    rows = []
    for i, u in enumerate(system.units):
        if u.initially_on:
            forced, val = max(0, u.t_up_min - u.initial_status), 1.0
        else:
            forced, val = max(0, u.t_down_min + u.initial_status), 0.0
        for t in range(min(forced, T)):
            lower[lay.x(i, t)] = upper[lay.x(i, t)] = val
        x0 = 1.0 if u.initially_on else 0.0
        for t in range(T):
            upper[lay.su(i, t)] = upper[lay.sd(i, t)] = 1.0
            r = {lay.x(i, t): 1.0, lay.su(i, t): -1.0, lay.sd(i, t): 1.0}
            if t == 0:
                rows.append((r, EQ, x0))
            else:
                r[lay.x(i, t - 1)] = -1.0
                rows.append((r, EQ, 0.0))
            r = {lay.su(i, tau): 1.0 for tau in range(max(0, t - u.t_up_min + 1), t + 1)}
            r[lay.x(i, t)] = -1.0
            rows.append((r, LE, 0.0))
            r = {lay.sd(i, tau): 1.0 for tau in range(max(0, t - u.t_down_min + 1), t + 1)}
            r[lay.x(i, t)] = 1.0
            rows.append((r, LE, 1.0))
    return rows


def _tangent_points(u) -> list[tuple[float, float]]:
    """(p, h) points where the fuel cost is linearised; a linear cost needs one."""
    if u.kind is UnitKind.CHP:
        verts = list(u.hull.vertices)
        (p0, p1), (h0, h1) = u.hull.p_range, heat_range(u.hull)
        grid = [(p, h) for p in np.linspace(p0, p1, 5) for h in np.linspace(h0, h1, 5)
                if contains(u.hull, p, h)]
        return verts + [g for g in grid if g not in verts]
    if u.kind is UnitKind.THERMAL:
        lo, hi = u.power_bounds
        curv = u.c
        pts = [(p, 0.0) for p in np.linspace(lo, hi, TANGENTS)]
    else:
        lo, hi = u.heat_bounds
        curv = u.e
        pts = [(0.0, h) for h in np.linspace(lo, hi, TANGENTS)]
    return pts if curv > 0 else pts[:1]


def _fuel_is_convex(u) -> bool:
    return u.kind is not UnitKind.CHP or 4.0 * u.c * u.e >= u.f * u.f


def dispatch_relaxation_rows(system: PowerSystem, demand: DemandProfile, lay: _MasterLayout,
                             lower: np.ndarray, upper: np.ndarray, extra: Optional[dict] = None) -> list:
    """Linear relaxation of every hour's dispatch written on the commitment.

    Unit limits are scaled by x, the quadratic fuel terms are bounded below
    by tangent planes in perspective form, and the hour's recourse variable
    must cover the sum of the fuel epigraphs plus the V2G cost. Any point
    of the true recourse satisfies these rows, so the master stays a
    relaxation and its bound stays valid.
    """
    units, N, T, M = system.units, lay.N, lay.T, lay.M
    ppev = [per_vehicle_power(l) for l in system.lots]
    gc = [1.0 if l.grid_charging else 0.0 for l in system.lots]
    extra = extra or {}
    rows = []
    for i, u in enumerate(units):
        for t in range(T):
            if u.makes_power:
                upper[lay.p(i, t)] = np.inf
            if u.kind is UnitKind.CHP:
                upper[lay.r(i, t)] = np.inf
            if u.makes_heat:
                upper[lay.h(i, t)] = np.inf
            upper[lay.phi(i, t)] = np.inf
    for i, u in enumerate(units):
        pts = _tangent_points(u)
        for t in range(T):
            x, p, h = lay.x(i, t), lay.p(i, t), lay.h(i, t)
            if u.kind is UnitKind.THERMAL:
                rows.append(({p: 1.0, x: -u.p_max}, LE, 0.0))
                rows.append(({p: -1.0, x: u.p_min}, LE, 0.0))
            if u.kind is UnitKind.CHP:
                for a, b, g in u.halfspaces:
                    rows.append(({p: a, h: b, x: -g}, LE, 0.0))
                    rows.append(({lay.r(i, t): a, h: b, x: -g}, LE, 0.0))
            if u.makes_heat:
                lo, hi = u.heat_bounds
                rows.append(({h: 1.0, x: -hi}, LE, 0.0))
                rows.append(({h: -1.0, x: lo}, LE, 0.0))
            if not _fuel_is_convex(u):
                continue
            for p0, h0 in pts + extra.get((i, t), []):
                gp = u.b + 2.0 * u.c * p0 + u.f * h0
                gh = u.d + 2.0 * u.e * h0 + u.f * p0
                r = {lay.phi(i, t): 1.0, x: u.c * p0 * p0 + u.e * h0 * h0 + u.f * p0 * h0}
                if u.makes_power:
                    r[p] = -gp
                if u.makes_heat:
                    r[h] = -gh
                rows.append((r, GE, 0.0))
    for t in range(T):
        bal = {lay.p(i, t): 1.0 for i, u in enumerate(units) if u.makes_power}
        res = {}
        for i, u in enumerate(units):
            if u.kind is UnitKind.THERMAL:
                res[lay.x(i, t)] = u.p_max
            elif u.kind is UnitKind.CHP:
                res[lay.r(i, t)] = 1.0
        for j in range(M):
            for d in (bal, res):
                d[lay.nd(j, t)] = ppev[j]
                if gc[j]:
                    d[lay.nc(j, t)] = -ppev[j]
        rows.append((bal, EQ, demand.pd[t]))
        rows.append((res, GE, demand.pd[t] + demand.rd[t]))
        rows.append(({lay.h(i, t): 1.0 for i, u in enumerate(units) if u.makes_heat}, EQ, demand.hd[t]))
        epi = {lay.g(t): 1.0}
        for i, u in enumerate(units):
            if _fuel_is_convex(u):
                epi[lay.phi(i, t)] = -1.0
        for j, lot in enumerate(system.lots):
            epi[lay.nd(j, t)] = -lot.pi * ppev[j]
        rows.append((epi, GE, 0.0))
    return rows


def build_outer_master(system: PowerSystem, demand: DemandProfile, cuts: dict[int, CutPool],
                       dispatch: bool = False, tangents: Optional[dict] = None):
    """Master MILP; returns (lp, integer columns, layout).

    With ``dispatch`` the relaxed hourly dispatch is carried in the master
    next to the cuts, which tightens the bound the branch and bound works with.
    ``tangents`` maps (unit, hour) to extra (p, h) linearisation points.
    """
    lay = _MasterLayout(system, demand, dispatch)
    N, T, M = lay.N, lay.T, lay.M
    units = system.units
    c = np.zeros(lay.n)
    lower = np.zeros(lay.n)
    upper = np.full(lay.n, np.inf)
    upper[3 * N * T + T + 2 * M * T:] = 0.0     # dispatch columns are opened below when used
    for i, u in enumerate(units):
        for t in range(T):
            c[lay.x(i, t)] = u.a
            c[lay.su(i, t)] = u.startup_cost
            c[lay.sd(i, t)] = u.shutdown_cost
            upper[lay.x(i, t)] = 1.0
    c[lay.og:lay.og + T] = 1.0
    for j, lot in enumerate(system.lots):
        lo, hi = lot.bounds(T)
        clo, chi = lot.bounds(T, charging=True)
        for t in range(T):
            lower[lay.nd(j, t)], upper[lay.nd(j, t)] = lo[t], hi[t]
            lower[lay.nc(j, t)], upper[lay.nc(j, t)] = clo[t], chi[t]

    rows = commitment_rows(system, T, lay, lower, upper)
    if dispatch:
        rows += dispatch_relaxation_rows(system, demand, lay, lower, upper, tangents)

    ppev = [per_vehicle_power(l) for l in system.lots]
    gc = [1.0 if l.grid_charging else 0.0 for l in system.lots]
    for t in range(T):
        res, gen_lo, heat_hi, heat_lo = {}, {}, {}, {}
        for i, u in enumerate(units):
            if u.kind is UnitKind.THERMAL:
                res[lay.x(i, t)] = u.p_max
                gen_lo[lay.x(i, t)] = u.p_min
            elif u.kind is UnitKind.CHP:
                res[lay.x(i, t)] = u.hull.p_range[1]
                gen_lo[lay.x(i, t)] = u.hull.p_range[0]
            if u.makes_heat:
                lo, hi = u.heat_bounds
                heat_hi[lay.x(i, t)] = hi
                heat_lo[lay.x(i, t)] = lo
        for j in range(M):
            for d in (res, gen_lo):
                d[lay.nd(j, t)] = ppev[j]
                if gc[j]:
                    d[lay.nc(j, t)] = -ppev[j]
        rows.append((res, GE, demand.pd[t] + demand.rd[t]))
        rows.append((gen_lo, LE, demand.pd[t]))
        rows.append((heat_hi, GE, demand.hd[t]))
        rows.append((heat_lo, LE, demand.hd[t]))
    for j, lot in enumerate(system.lots):
        rows.append(({lay.nd(j, t): 1.0 for t in range(T)}, EQ, float(lot.fleet_size)))
        if lot.grid_charging:
            rows.append(({lay.nc(j, t): 1.0 for t in range(T)}, EQ, float(lot.fleet_size)))

    for t in range(T):
        cols = lay.z_cols(t)
        for cut in cuts.get(t, ()):
            # round-off sized coefficients only hurt the MILP's numerics
            grad = np.where(np.abs(cut.gradient) > CUT_COEF_FLOOR * max(1.0, np.abs(cut.gradient).max()),
                            cut.gradient, 0.0)
            if cut.kind == FEASIBILITY:
                r = {k: g for k, g in zip(cols, grad) if g != 0.0}
                rows.append((r, LE, -cut.intercept + FEAS_CUT_SLACK * max(1.0, abs(cut.intercept))))
            else:
                r = {lay.g(t): 1.0}
                for k, g in zip(cols, grad):
                    if g != 0.0:
                        r[k] = -g
                rows.append((r, GE, cut.intercept))

    A = np.zeros((len(rows), lay.n))
    senses, b = [], np.zeros(len(rows))
    for k, (r, s, rhs) in enumerate(rows):
        for col, v in r.items():
            A[k, col] += v
        senses.append(s)
        b[k] = rhs
    ints = [lay.x(i, t) for i in range(N) for t in range(T)]
    lp = LinearProgram(c=c, A=A, senses=senses, b=b, lower=lower, upper=upper)
    return lp, ints, lay


def fixed_costs(system: PowerSystem, x: np.ndarray) -> float:
    total = 0.0
    for i, u in enumerate(system.units):
        prev = 1 if u.initially_on else 0
        for t in range(x.shape[1]):
            xt = int(x[i, t])
            total += u.a * xt + u.startup_cost * max(0, xt - prev) + u.shutdown_cost * max(0, prev - xt)
            prev = xt
    return total


NATIVE_MASTER_BINARIES = 64


def _auto_backend(system: PowerSystem, demand: DemandProfile) -> str:
    return "native" if system.n_units * demand.horizon <= NATIVE_MASTER_BINARIES else "highs"


def solve_outer_master(system: PowerSystem, demand: DemandProfile, cuts: Optional[dict[int, CutPool]] = None,
                       *, backend: str = "auto", rel_gap: float = 1e-9, time_limit: Optional[float] = None,
                       relax: bool = False, dispatch: bool = False,
                       tangents: Optional[dict] = None) -> MasterResult:
    """Commitment master: fixed and transition costs plus one recourse epigraph per hour.

    With ``relax`` the commitment is continuous in [0, 1]; the optimum is
    still a valid lower bound on the integer problem.
    """
    cuts = cuts or {}
    lp, ints, lay = build_outer_master(system, demand, cuts, dispatch=dispatch, tangents=tangents)
    if backend == "auto":
        backend = _auto_backend(system, demand)
    if relax:
        out = solve_lp(lp, method="simplex" if backend == "native" else "highs")
        out.bound = out.objective
    else:
        out = solve_milp(lp, ints, method="bnb" if backend == "native" else "highs",
                         rel_gap=rel_gap, time_limit=time_limit)
    if out.status is Status.INFEASIBLE:
        raise ModelInfeasibleError("commitment master is infeasible: demand cannot be met")
    if out.x is None:
        raise RuntimeError(f"commitment master returned {out.status.value}")
    N, T, M = lay.N, lay.T, lay.M
    xr = out.x[:N * T].reshape(N, T)
    x = np.clip(xr, 0.0, 1.0) if relax else np.round(xr).astype(int)
    nd = out.x[lay.od:lay.od + M * T].reshape(M, T).copy()
    nc = out.x[lay.oc:lay.oc + M * T].reshape(M, T).copy()
    for arr, kind in ((nd, False), (nc, True)):
        for j, lot in enumerate(system.lots):
            lo, hi = lot.bounds(T, charging=kind)
            arr[j] = np.clip(arr[j], lo, hi)
    lb = out.bound if np.isfinite(out.bound) else out.objective
    gamma = out.x[lay.og:lay.og + T].copy()
    if relax:
        fixed = float(out.objective - gamma.sum())
    else:
        fixed = fixed_costs(system, x)
    return MasterResult(x=x, n_dsch=nd, n_ch=nc, gamma=gamma,
                        lower_bound=float(min(lb, out.objective)), objective=out.objective,
                        fixed_cost=fixed)


def build_outer_cut(inner_results) -> list[BendersCut]:
    """One X-space cut per hour from the converged inner loops (feasibility cuts for infeasible hours)."""
    return [r.cut for r in inner_results]


def round_fleet(counts: np.ndarray, lo: np.ndarray, hi: np.ndarray, total: Optional[float]) -> np.ndarray:
    """Largest-remainder rounding keeping integer bounds and, when given, the integer total."""
    counts = np.clip(np.asarray(counts, float), lo, hi)
    base = np.floor(counts + 1e-9)
    base = np.clip(base, np.ceil(lo - 1e-9), np.floor(hi + 1e-9))
    if total is None:
        return np.round(counts)
    short = int(round(total - base.sum()))
    frac = counts - base
    order = sorted(range(counts.size), key=lambda t: (-frac[t], t))
    for t in order:
        if short <= 0:
            break
        if base[t] + 1 <= hi[t] + 1e-9:
            base[t] += 1
            short -= 1
    for t in sorted(range(counts.size), key=lambda t: (frac[t], t)):
        if short >= 0:
            break
        if base[t] - 1 >= lo[t] - 1e-9:
            base[t] -= 1
            short += 1
    return base


def solve_chpuc_pev(system: PowerSystem, demand: Optional[DemandProfile] = None,
                    options: Optional[BendersOptions] = None):
    """Double decomposition for the CHP unit commitment with PEV lots.

    Returns (ScheduleSolution, ConvergenceTrace). ``trace.converged`` is
    false when the iteration cap stopped the loop; the best incumbent is
    returned either way.
    """
    opts = options or BendersOptions()
    demand = demand if demand is not None else system.demand
    if demand is None:
        raise ValueError("no demand profile given")
    model = HourModel(system, demand, perspective=opts.perspective,
                      lp_backend=opts.inner_lp_backend)
    T, N, M = demand.horizon, system.n_units, len(system.lots)
    gap_rel = opts.master_gap if opts.master_gap is not None else opts.tol / 4.0
    backend = opts.master_backend if opts.master_backend != "auto" else _auto_backend(system, demand)
    # the extra rows pay off in HiGHS's branch and bound; the dense native kernel is faster without them
    dispatch = opts.master_dispatch if opts.master_dispatch is not None else backend == "highs"
    outer_pools = {t: CutPool() for t in range(T)}
    inner_pools = {t: CutPool() for t in range(T)}
    tangents: dict = {}
    trace = ConvergenceTrace()
    trace.anchors = []
    lb, ub = -np.inf, np.inf
    incumbent = None
    t0 = time.perf_counter()
    relaxed = opts.relaxed_iterations > 0
    gap, tight = np.inf, False
    for k in range(1, opts.max_outer + 1):
        # loose master solves while the outer gap is wide; the dual bound keeps LB valid
        rel = gap_rel if (opts.master_gap is not None or tight) else max(gap_rel, min(1e-2, 0.25 * gap))
        ms = solve_outer_master(system, demand, outer_pools, backend=backend,
                                rel_gap=rel, time_limit=opts.master_time_limit, relax=relaxed,
                                dispatch=dispatch, tangents=tangents)
        lb = max(lb, ms.lower_bound)
        rf_total, feasible, inner_counts = 0.0, True, []
        added = 0
        for t in range(T):
            n_t = np.concatenate([ms.n_dsch[:, t], ms.n_ch[:, t]])
            res = inner_benders(model, t, ms.x[:, t], n_t, inner_pools[t], max_inner=opts.max_inner,
                                tol=opts.inner_tol, outer_iteration=k)
            inner_counts.append(res.iterations)
            if res.status is Status.OPTIMAL:
                rf_total += res.recourse
                trace.anchors.append((t, res.cut.constant, res.recourse))
                if dispatch:
                    _collect_tangents(model, t, ms.x[:, t], res, tangents)
            else:
                feasible = False
            if res.cut is not None:
                added += outer_pools[t].add(res.cut)
        if relaxed:
            # warm-up: bound the continuous master only; no incumbent yet
            lp_ub = ms.fixed_cost + rf_total if feasible else np.inf
            lp_gap = (lp_ub - ms.lower_bound) / max(1.0, abs(lp_ub))
            trace.append(TraceRecord(k, lb, ub, np.inf, inner_counts, time.perf_counter() - t0))
            if opts.verbose:
                print(f"relaxed {k:3d}  LB {lb:.4f}  UB_lp {lp_ub:.4f}  gap {lp_gap:.2e}"
                      f"  inner {sum(inner_counts)}  t {time.perf_counter() - t0:.1f}s", flush=True)
            if lp_gap <= opts.relaxed_tol or added == 0 or k >= opts.relaxed_iterations:
                relaxed = False
            continue
        if feasible:
            cand = ms.fixed_cost + rf_total
            if cand < ub:
                ub = cand
                incumbent = (ms.x.copy(), ms.n_dsch.copy(), ms.n_ch.copy())
        gap = (ub - lb) / max(1.0, abs(ub)) if np.isfinite(ub) else np.inf
        trace.append(TraceRecord(k, lb, ub, gap, inner_counts, time.perf_counter() - t0))
        if opts.verbose:
            print(f"outer {k:3d}  LB {lb:.4f}  UB {ub:.4f}  gap {gap:.2e}  inner {sum(inner_counts)}"
                  f"  t {time.perf_counter() - t0:.1f}s", flush=True)
        if gap <= opts.tol:
            trace.converged = True
            break
        if added == 0 and feasible:
            # the master reproduced a point whose cuts are already present
            if rel <= gap_rel:
                break
            tight = True
    if incumbent is None:
        raise ModelInfeasibleError("no feasible commitment found within the iteration cap")
    sol = _finalize(system, demand, model, *incumbent)
    return sol, trace


def _collect_tangents(model: HourModel, t: int, x_t, res, tangents: dict, tol: float = 1e-3):
    """Record each committed unit's operating point (per unit of commitment) for the master."""
    pk = {i: k for k, i in enumerate(model.pu)}
    hk = {i: k for k, i in enumerate(model.hu)}
    for i in range(model.N):
        xi = float(x_t[i])
        if xi <= 1e-6:
            continue
        p0 = float(res.p[pk[i]]) / xi if i in pk else 0.0
        h0 = float(res.h[hk[i]]) / xi if i in hk else 0.0
        pts = tangents.setdefault((i, t), [])
        if all(abs(p0 - a) > tol or abs(h0 - b) > tol for a, b in pts):
            pts.append((p0, h0))


def _finalize(system, demand, model, x, n_dsch, n_ch) -> ScheduleSolution:
    T, N = demand.horizon, system.n_units
    nd = np.zeros_like(n_dsch)
    nc = np.zeros_like(n_ch)
    for j, lot in enumerate(system.lots):
        lo, hi = lot.bounds(T)
        nd[j] = round_fleet(n_dsch[j], lo, hi, lot.fleet_size)
        if lot.grid_charging:
            clo, chi = lot.bounds(T, charging=True)
            nc[j] = round_fleet(n_ch[j], clo, chi, lot.fleet_size)
    p = np.zeros((N, T))
    h = np.zeros((N, T))
    for t in range(T):
        st, pt, ht, _ = dispatch_hour(model, t, x[:, t], np.concatenate([nd[:, t], nc[:, t]]))
        if st is not Status.OPTIMAL:
            raise ModelInfeasibleError(f"hour {t + 1} has no dispatch after rounding fleet counts")
        p[model.pu, t] = pt
        h[model.hu, t] = ht
    p = np.where(x > 0, np.maximum(p, 0.0), 0.0)
    h = np.where(x > 0, np.maximum(h, 0.0), 0.0)
    sol = ScheduleSolution(x=x, p=p, h=h, n_dsch=nd, n_ch=nc)
    total_cost(system, sol)
    return sol
