"""Brute-force reference solvers for toy instances.

Nothing here calls the decomposition or the QP/LP kernels: commitments are
enumerated, heat is searched on a grid (with a ternary refinement when one
heat dimension is free), power is dispatched by equal-marginal-cost
bisection and the fleet budget is spread over hours by a min-plus dynamic
program over integer vehicle counts.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import ForPolygon, heat_range, max_power_at_heat, power_interval_at_heat
from .model import DemandProfile, GeneratingUnit, ParkingLot, PowerSystem, ScheduleSolution, UnitKind
from .pev import per_vehicle_power

MAX_BINARIES = 16
MAX_FLEET = 20
INF = np.inf


class InstanceTooLargeError(ValueError):
    pass


def runs_ok(unit: GeneratingUnit, pattern) -> bool:
    """Independent min up/down check on one unit's 0/1 sequence."""
    state = 1 if unit.initial_status > 0 else 0
    length = abs(unit.initial_status)
    for v in pattern:
        if v == state:
            length += 1
            continue
        need = unit.t_up_min if state == 1 else unit.t_down_min
        if length < need:
            return False
        state, length = v, 1
    return True


def _power_limits(u: GeneratingUnit, h: np.ndarray):
    """Vectorised P interval of a power unit at heat h (thermal: constant)."""
    if u.kind is UnitKind.THERMAL:
        return np.full(h.shape, float(u.p_min)), np.full(h.shape, float(u.p_max))
    lo = np.full(h.shape, np.nan)
    hi = np.full(h.shape, np.nan)
    flat_h = h.ravel()
    cache = {}
    lo_f, hi_f = lo.ravel(), hi.ravel()
    for k, hv in enumerate(flat_h):
        key = float(hv)
        if key not in cache:
            iv = power_interval_at_heat(u.hull, key)
            cache[key] = (iv[0][0], iv[-1][1]) if iv else (np.nan, np.nan)
        lo_f[k], hi_f[k] = cache[key]
    return lo, hi


def _dispatch_power(b, c, lo, hi, demand):
    """Equal-marginal-cost dispatch; arrays (units, points). Returns P (inf-free) and feasibility mask."""
    feas = (lo.sum(0) <= demand + 1e-9) & (hi.sum(0) >= demand - 1e-9) & np.all(np.isfinite(lo), 0)
    lo = np.where(np.isfinite(lo), lo, 0.0)
    hi = np.where(np.isfinite(hi), hi, 0.0)
    lam_lo = (b + 2 * c * lo).min(0) - 1.0
    lam_hi = (b + 2 * c * hi).max(0) + 1.0
    for _ in range(100):
        lam = 0.5 * (lam_lo + lam_hi)
        p = np.clip((lam - b) / (2 * c), lo, hi)
        over = p.sum(0) > demand
        lam_hi = np.where(over, lam, lam_hi)
        lam_lo = np.where(over, lam_lo, lam)
    p = np.clip((0.5 * (lam_lo + lam_hi) - b) / (2 * c), lo, hi)
    # absorb the bisection residual on units with room
    resid = demand - p.sum(0)
    for i in range(p.shape[0]):
        room = np.where(resid > 0, hi[i] - p[i], p[i] - lo[i])
        step = np.sign(resid) * np.minimum(np.abs(resid), room)
        p[i] += step
        resid = resid - step
    return p, feas


@dataclass
class HourInputs:
    pd: float
    hd: float
    rd: float
    net_pev: float = 0.0      # MW injected by lots (discharge minus charge)


def _ed_many(system: PowerSystem, on: np.ndarray, inp: HourInputs, hgrid: np.ndarray, net=None):
    """Cost of hour dispatch per row of hgrid (points, on heat units); ``net`` overrides the lot injection per row."""
    units = system.units
    ph = [i for i in system.power_units if on[i]]
    hh = [i for i in system.heat_units if on[i]]
    npts = hgrid.shape[0]
    net = np.full(npts, inp.net_pev) if net is None else np.asarray(net, float)
    H = {i: hgrid[:, k] for k, i in enumerate(hh)}
    cost = np.zeros(npts)
    feas = np.ones(npts, dtype=bool)
    for i in hh:
        u = units[i]
        cost += u.d * H[i] + u.e * H[i] ** 2
    demand = inp.pd - net
    reserve = net.copy()
    if ph:
        b = np.zeros((len(ph), npts))
        c = np.zeros((len(ph), npts))
        lo = np.zeros((len(ph), npts))
        hi = np.zeros((len(ph), npts))
        for k, i in enumerate(ph):
            u = units[i]
            hv = H.get(i, np.zeros(npts))
            b[k] = u.b + u.f * hv
            c[k] = max(u.c, 1e-12)
            lo[k], hi[k] = _power_limits(u, hv)
            if u.kind is UnitKind.CHP:
                fin = np.isfinite(hi[k])
                reserve += np.where(fin, hi[k], 0.0)
                feas &= fin
            else:
                reserve += u.p_max
        p, ok = _dispatch_power(b, c, lo, hi, demand)
        feas &= ok
        for k, i in enumerate(ph):
            u = units[i]
            hv = H.get(i, np.zeros(npts))
            cost += u.b * p[k] + u.c * p[k] ** 2 + u.f * p[k] * hv
    else:
        p = np.zeros((0, npts))
        feas &= np.abs(demand) <= 1e-9
    feas &= reserve >= inp.pd + inp.rd - 1e-9
    return np.where(feas, cost, INF), p


def _heat_candidates(system: PowerSystem, on, hd: float, step: float):
    """Grid of heat vectors over the on heat units; the last one closes the balance."""
    hh = [i for i in system.heat_units if on[i]]
    if not hh:
        return hh, (np.zeros((1, 0)) if abs(hd) <= 1e-9 else np.zeros((0, 0)))
    units = system.units
    bounds = [units[i].heat_bounds for i in hh]
    axes = []
    for lo, hi in bounds[:-1]:
        n = int(np.floor((hi - lo) / step + 1e-9))
        ax = lo + step * np.arange(n + 1)
        if hi - ax[-1] > 1e-9:
            ax = np.append(ax, hi)
        axes.append(ax)
    if axes:
        mesh = np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, len(axes))
    else:
        mesh = np.zeros((1, 0))
    last = hd - mesh.sum(1)
    lo, hi = bounds[-1]
    keep = (last >= lo - 1e-9) & (last <= hi + 1e-9)
    grid = np.column_stack([mesh[keep], np.clip(last[keep], lo, hi)])
    return hh, grid


def hour_costs(system: PowerSystem, on, inp: HourInputs, nets, step: float = 0.5, refine: bool = True):
    """Best hour cost for each lot injection in ``nets``; returns (costs, heat vectors)."""
    nets = np.asarray(nets, float)
    hh, grid = _heat_candidates(system, on, inp.hd, step)
    if grid.shape[0] == 0:
        return np.full(nets.size, INF), np.zeros((nets.size, len(hh)))
    G, K = grid.shape[0], nets.size
    cost, _ = _ed_many(system, on, inp, np.tile(grid, (K, 1)), np.repeat(nets, G))
    cost = cost.reshape(K, G)
    k = np.argmin(cost, axis=1)
    best = cost[np.arange(K), k]
    hbest = grid[k].copy()
    if refine and len(hh) == 2:
        hbest, best = _refine(system, on, inp, hh, grid[:, 0], nets, best, hbest, step)
    return best, hbest


def hour_cost(system: PowerSystem, on, inp: HourInputs, step: float = 0.5, refine: bool = True):
    """Best (cost, p over on power units, h over on heat units) for one hour and commitment."""
    best, hbest = hour_costs(system, on, inp, [inp.net_pev], step, refine)
    if not np.isfinite(best[0]):
        return INF, None, None
    c2, p2 = _ed_many(system, on, inp, hbest[:1])
    ph = [i for i in system.power_units if on[i]]
    hh = [i for i in system.heat_units if on[i]]
    return float(c2[0]), dict(zip(ph, p2[:, 0])), dict(zip(hh, hbest[0]))


def _refine(system, on, inp, hh, axis, nets, best, hbest, step):
    """Ternary search of the convex one-dimensional heat cost around each best grid point."""
    units = system.units
    lo0, hi0 = units[hh[0]].heat_bounds
    lo1, hi1 = units[hh[1]].heat_bounds
    dom_lo = max(lo0, inp.hd - hi1)
    dom_hi = min(hi0, inp.hd - lo1)
    ok = np.isfinite(best)
    if not ok.any():
        return hbest, best
    nets_k = nets[ok]
    centre = hbest[ok, 0]

    def f(v):
        v = np.clip(v, dom_lo, dom_hi)
        return _ed_many(system, on, inp, np.column_stack([v, inp.hd - v]), nets_k)[0]

    a = np.maximum(dom_lo, centre - step)
    b = np.minimum(dom_hi, centre + step)
    # shrink each bracket edge onto the feasible part by bisection
    for side in (0, 1):
        edge = (a if side == 0 else b).copy()
        inner = centre.copy()
        bad = ~np.isfinite(f(edge))
        for _ in range(60):
            if not bad.any():
                break
            mid = 0.5 * (edge + inner)
            fin = np.isfinite(f(mid))
            inner = np.where(bad & fin, mid, inner)
            edge = np.where(bad & ~fin, mid, edge)
        res = np.where(bad, inner, edge)
        if side == 0:
            a = res
        else:
            b = res
    for _ in range(120):
        m1, m2 = a + (b - a) / 3, b - (b - a) / 3
        left = f(m1) <= f(m2)
        b = np.where(left, m2, b)
        a = np.where(left, a, m1)
        if np.max(b - a) < 1e-10:
            break
    v = 0.5 * (a + b)
    val = f(v)
    take = val < best[ok]
    best = best.copy()
    hbest = hbest.copy()
    idx = np.flatnonzero(ok)[take]
    best[idx] = val[take]
    hbest[idx] = np.column_stack([v[take], inp.hd - v[take]])
    return hbest, best


def grid_ed(system: PowerSystem, on, inp: HourInputs, step: float = 0.5):
    """Exhaustive (H, P) mesh search for one hour; the last power unit closes the balance.

    Returns (cost, p dict, h dict); cost is inf when no mesh point is feasible.
    """
    units = system.units
    ph = [i for i in system.power_units if on[i]]
    hh, hgrid = _heat_candidates(system, on, inp.hd, step)
    demand = inp.pd - inp.net_pev
    if not ph and not hh:
        return (0.0, {}, {}) if abs(demand) <= 1e-9 and abs(inp.hd) <= 1e-9 and inp.pd + inp.rd <= inp.net_pev + 1e-9 \
            else (INF, None, None)
    best = (INF, None, None)
    for hv in hgrid:
        H = dict(zip(hh, hv))
        lims, heat_cost, reserve = [], 0.0, inp.net_pev
        ok = True
        for i in hh:
            heat_cost += units[i].d * H[i] + units[i].e * H[i] ** 2
        for i in ph:
            u = units[i]
            if u.kind is UnitKind.CHP:
                iv = power_interval_at_heat(u.hull, H[i])
                if not iv:
                    ok = False
                    break
                lims.append((iv[0][0], iv[-1][1]))
                reserve += max_power_at_heat(u.hull, H[i])
            else:
                lims.append((u.p_min, u.p_max))
                reserve += u.p_max
        if not ok or reserve < inp.pd + inp.rd - 1e-9:
            continue
        if not ph:
            if abs(demand) <= 1e-9 and heat_cost < best[0]:
                best = (heat_cost, {}, H)
            continue
        axes = []
        for lo, hi in lims[:-1]:
            n = int(np.floor((hi - lo) / step + 1e-9))
            ax = lo + step * np.arange(n + 1)
            if hi - ax[-1] > 1e-9:
                ax = np.append(ax, hi)
            axes.append(ax)
        mesh = np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, len(axes)) if axes \
            else np.zeros((1, 0))
        last = demand - mesh.sum(1)
        lo, hi = lims[-1]
        keep = (last >= lo - 1e-9) & (last <= hi + 1e-9)
        if not keep.any():
            continue
        P = np.column_stack([mesh[keep], np.clip(last[keep], lo, hi)])
        cost = np.full(P.shape[0], heat_cost)
        for k, i in enumerate(ph):
            u = units[i]
            cost += u.b * P[:, k] + u.c * P[:, k] ** 2 + u.f * P[:, k] * H.get(i, 0.0)
        j = int(np.argmin(cost))
        if cost[j] < best[0]:
            best = (float(cost[j]), dict(zip(ph, P[j])), H)
    return best


@dataclass
class OracleResult:
    solution: Optional[ScheduleSolution]
    cost: float
    commitments_checked: int


def brute_force_uc(system: PowerSystem, demand: Optional[DemandProfile] = None, heat_step: float = 0.5,
                   refine: bool = True) -> OracleResult:
    """Global optimum of a toy instance by exhaustive enumeration.

    Lots are taken as configured (bounds, grid charging); at most one lot.
    """
    demand = demand if demand is not None else system.demand
    N, T = system.n_units, demand.horizon
    if N * T > MAX_BINARIES:
        raise InstanceTooLargeError(f"{N * T} commitment binaries exceed {MAX_BINARIES}")
    if len(system.lots) > 1:
        raise InstanceTooLargeError("the oracle handles at most one parking lot")
    lot = system.lots[0] if system.lots else None
    F = lot.fleet_size if lot else 0
    if F > MAX_FLEET:
        raise InstanceTooLargeError(f"fleet of {F} exceeds {MAX_FLEET}")
    ppev = per_vehicle_power(lot) if lot else 0.0
    gc = bool(lot and lot.grid_charging)
    if lot:
        dlo, dhi = (np.round(v).astype(int) for v in lot.bounds(T))
        clo, chi = (np.round(v).astype(int) for v in lot.bounds(T, charging=True))
    else:
        dlo = dhi = clo = chi = np.zeros(T, dtype=int)
    nets = range(-F, F + 1)

    # per-unit admissible sequences
    seqs = []
    for u in system.units:
        ok = [s for s in itertools.product((0, 1), repeat=T) if runs_ok(u, s)]
        seqs.append(ok)

    # ED tables: hour -> pattern -> net -> cost
    patterns = sorted({tuple(col) for combo in itertools.product(*seqs) for col in zip(*combo)})
    table = {}
    for t in range(T):
        for pat in patterns:
            inp = HourInputs(demand.pd[t], demand.hd[t], demand.rd[t])
            row, _ = hour_costs(system, np.array(pat), inp, ppev * np.array(nets, float), heat_step, refine)
            if not gc:
                row[:F] = INF
            table[t, pat] = row

    best_cost, best_combo, checked = INF, None, 0
    for combo in itertools.product(*seqs):
        checked += 1
        x = np.array(combo)
        fixed = _fixed_cost(system, x)
        if fixed >= best_cost:
            continue
        val, _ = _fleet_dp(table, x, T, F, ppev, lot.pi if lot else 0.0, gc, dlo, dhi, clo, chi)
        if fixed + val < best_cost:
            best_cost, best_combo = fixed + val, x
    if best_combo is None:
        return OracleResult(None, INF, checked)

    x = best_combo
    _, (nd, nc) = _fleet_dp(table, x, T, F, ppev, lot.pi if lot else 0.0, gc, dlo, dhi, clo, chi)
    p, h = np.zeros((N, T)), np.zeros((N, T))
    for t in range(T):
        inp = HourInputs(demand.pd[t], demand.hd[t], demand.rd[t], ppev * (nd[t] - nc[t]))
        _, pd_, hd_ = hour_cost(system, x[:, t], inp, heat_step, refine)
        for i, v in pd_.items():
            p[i, t] = v
        for i, v in hd_.items():
            h[i, t] = v
    M = len(system.lots)
    nd = np.array(nd, float).reshape(1, T)[:M]
    nc = np.array(nc, float).reshape(1, T)[:M]
    sol = ScheduleSolution(x=x, p=p, h=h, n_dsch=nd, n_ch=nc)
    return OracleResult(sol, float(best_cost), checked)


def _fixed_cost(system, x):
    total = 0.0
    for i, u in enumerate(system.units):
        prev = 1 if u.initial_status > 0 else 0
        for v in x[i]:
            total += u.a * v
            if v and not prev:
                total += u.startup_cost
            if prev and not v:
                total += u.shutdown_cost
            prev = v
    return total


def _fleet_dp(table, x, T, F, ppev, pi, gc, dlo, dhi, clo, chi):
    """Min-plus DP over cumulative (discharged, charged) counts; returns (value, (nd, nc) per hour)."""
    shape = (F + 1, F + 1)
    V = np.full(shape, INF)
    V[0, 0] = 0.0
    choice = []
    for t in range(T):
        row = table[t, tuple(x[:, t])]
        W = np.full(shape, INF)
        arg = np.zeros(shape + (2,), dtype=int)
        for d in range(dlo[t], dhi[t] + 1):
            for c in (range(clo[t], chi[t] + 1) if gc else (0,)):
                step = row[d - c + F] + pi * ppev * d
                if not np.isfinite(step):
                    continue
                cand = np.full(shape, INF)
                cand[d:, c:] = V[:F + 1 - d, :F + 1 - c] + step
                better = cand < W
                W = np.where(better, cand, W)
                arg[better] = (d, c)
        V = W
        choice.append(arg)
    end = (F, F if gc else 0)
    val = V[end]
    if not np.isfinite(val):
        return INF, (None, None)
    nd, nc = [0] * T, [0] * T
    a, b = end
    for t in range(T - 1, -1, -1):
        d, c = choice[t][a, b]
        nd[t], nc[t] = int(d), int(c)
        a, b = a - d, b - c
    return float(val), (nd, nc)


# ---------------------------------------------------------------- toy corpus

def make_tiny_instance(seed: int) -> PowerSystem:
    """Random 2-3 unit, 2-4 hour system with one small lot and a demand profile.

    Heat comes from one CHP unit (convex region) and, in three-unit
    instances, a boiler; power from a thermal unit and the CHP unit.
    """
    rng = np.random.default_rng(seed)
    T = int(rng.integers(2, 5))
    n_units = int(rng.integers(2, 4)) if T <= 4 else 2
    if n_units * T > 12:
        T = 12 // n_units
    units = []
    pmin, pmax = float(rng.integers(10, 30)), float(rng.integers(80, 150))
    up, down = int(rng.integers(1, 3)), int(rng.integers(1, 3))
    init = int(rng.choice([-1, 1])) * int(rng.integers(max(up, down), 4))
    units.append(GeneratingUnit(
        id="G1", kind=UnitKind.THERMAL, a=float(rng.uniform(50, 200)), b=float(rng.uniform(15, 25)),
        c=float(rng.uniform(0.005, 0.04)), p_min=pmin, p_max=pmax, t_up_min=up, t_down_min=down,
        startup_cost=float(rng.uniform(0, 300)), shutdown_cost=float(rng.uniform(0, 50)), initial_status=init))
    s = float(rng.uniform(0.8, 1.2))
    verts = [(20 * s, 0.0), (90 * s, 0.0), (75 * s, 60 * s), (15 * s, 40 * s)]
    cc, ee = float(rng.uniform(0.01, 0.05)), float(rng.uniform(0.01, 0.05))
    ff = float(rng.uniform(0.0, 1.8 * np.sqrt(cc * ee)))
    units.append(GeneratingUnit(
        id="C1", kind=UnitKind.CHP, a=float(rng.uniform(100, 250)), b=float(rng.uniform(12, 22)), c=cc,
        d=float(rng.uniform(1, 4)), e=ee, f=ff, for_polygon=ForPolygon.from_points(verts),
        t_up_min=1, t_down_min=1, startup_cost=float(rng.uniform(0, 200)), initial_status=int(rng.choice([-2, 2]))))
    heat_cap = 40 * s
    if n_units == 3:
        units.append(GeneratingUnit(
            id="B1", kind=UnitKind.HEAT_ONLY, d=float(rng.uniform(3, 6)), e=float(rng.uniform(0.02, 0.06)),
            h_min=0.0, h_max=float(rng.integers(30, 60)), initial_status=1))
        heat_cap += units[-1].h_max
    fleet = int(rng.integers(4, 13))
    grid = bool(rng.integers(0, 2))
    cap = float(max(int(np.ceil(fleet / T)) + int(rng.integers(0, 3)), 1))
    lot = ParkingLot(id="L1", fleet_size=fleet, pv=float(rng.uniform(500, 1500)), delta=0.5, eta=0.9,
                     pi=float(rng.uniform(0, 8)), n_dsch_min=np.zeros(T), n_dsch_max=np.full(T, min(cap, fleet)),
                     n_ch_min=np.zeros(T) if grid else None, n_ch_max=np.full(T, min(cap, fleet)) if grid else None,
                     grid_charging=grid)
    base = float(rng.uniform(60, 0.8 * (pmax + 80 * s)))
    pd = np.round(base * (1 + 0.25 * np.sin(np.arange(T) + rng.uniform(0, 6))), 1)
    hd = np.round(rng.uniform(0.3, 0.8, T) * heat_cap, 1)
    demand = DemandProfile(pd=pd, hd=hd, rd=np.round(0.1 * pd))
    return PowerSystem(units=units, lots=[lot], demand=demand)


def tiny_corpus(count: int = 20, start: int = 0) -> list[tuple[int, PowerSystem]]:
    """First ``count`` seeds from ``start`` whose instance admits a feasible schedule."""
    out, seed = [], start
    while len(out) < count:
        sysm = make_tiny_instance(seed)
        if brute_force_uc(sysm).solution is not None:
            out.append((seed, sysm))
        seed += 1
    return out
