"""Check a candidate schedule against the full CHPUC-PEV constraint set."""
from __future__ import annotations

import numpy as np

from .geometry import contains, max_power_at_heat
from .model import (DemandProfile, GeneratingUnit, PowerSystem, ScheduleSolution, Tolerances,
                    UnitKind, Violation, ViolationReport, SOLVER_TOLERANCES)
from .pev import check_fleet_constraints, per_vehicle_power


def min_up_down_violations(unit: GeneratingUnit, x_row) -> list[Violation]:
    """Runs of ON/OFF hours shorter than the minimum up/down time.

    The run in progress at t=0 is seeded from ``initial_status``; runs cut
    off by the end of the horizon are not penalised.
    """
    out = []
    prev = 1 if unit.initially_on else 0
    run = abs(unit.initial_status)
    for t, xt in enumerate(int(v) for v in x_row):
        if xt == prev:
            run += 1
            continue
        if prev == 1 and run < unit.t_up_min:
            out.append(Violation("min-up", t + 1, unit.id, float(unit.t_up_min - run)))
        elif prev == 0 and run < unit.t_down_min:
            out.append(Violation("min-down", t + 1, unit.id, float(unit.t_down_min - run)))
        prev, run = xt, 1
    return out


def net_pev_power(system: PowerSystem, n_dsch: np.ndarray, n_ch: np.ndarray) -> np.ndarray:
    """Per-hour fleet injection (discharge minus grid charging) in MW."""
    T = n_dsch.shape[1] if n_dsch.ndim == 2 else 0
    out = np.zeros(T)
    for j, lot in enumerate(system.lots):
        ppev = per_vehicle_power(lot)
        out += ppev * n_dsch[j]
        if lot.grid_charging:
            out -= ppev * n_ch[j]
    return out


def committed_capacity(system: PowerSystem, solution: ScheduleSolution, t: int) -> float:
    """Maximum power of synchronised units; CHP units at their dispatched heat."""
    cap = 0.0
    for i, u in enumerate(system.units):
        if not solution.x[i, t] or not u.makes_power:
            continue
        if u.kind is UnitKind.CHP:
            try:
                cap += max_power_at_heat(u.hull, solution.h[i, t])
            except ValueError:
                pass
        else:
            cap += u.p_max
    return cap


def validate_schedule(system: PowerSystem, demand: DemandProfile, solution: ScheduleSolution,
                      tol: Tolerances = SOLVER_TOLERANCES) -> ViolationReport:
    N, T = solution.x.shape
    if N != system.n_units or T != demand.horizon or solution.n_dsch.shape[0] != len(system.lots):
        raise ValueError("solution dimensions do not match system/demand")
    rep = ViolationReport()
    x, p, h = solution.x, solution.p, solution.h
    pev = net_pev_power(system, solution.n_dsch, solution.n_ch)

    for t in range(T):
        gen = sum(p[i, t] for i in range(N) if x[i, t] and system.units[i].makes_power)
        r = gen + pev[t] - demand.pd[t]
        if abs(r) > tol.balance:
            rep.add(Violation("power-balance", t + 1, "system", abs(r)))
        heat = sum(h[i, t] for i in range(N) if x[i, t] and system.units[i].makes_heat)
        r = heat - demand.hd[t]
        if abs(r) > tol.heat:
            rep.add(Violation("heat-balance", t + 1, "system", abs(r)))
        short = demand.pd[t] + demand.rd[t] - committed_capacity(system, solution, t) - pev[t]
        if short > tol.reserve:
            rep.add(Violation("reserve", t + 1, "system", short))

    for i, u in enumerate(system.units):
        for t in range(T):
            pt, ht = p[i, t], h[i, t]
            if not x[i, t]:
                if abs(pt) > tol.bounds:
                    rep.add(Violation("p-limit", t + 1, u.id, abs(pt)))
                if abs(ht) > tol.heat:
                    rep.add(Violation("h-limit", t + 1, u.id, abs(ht)))
                continue
            if u.kind is UnitKind.THERMAL:
                if pt < u.p_min - tol.bounds:
                    rep.add(Violation("p-limit", t + 1, u.id, u.p_min - pt))
                elif pt > u.p_max + tol.bounds:
                    rep.add(Violation("p-limit", t + 1, u.id, pt - u.p_max))
                if abs(ht) > tol.heat:
                    rep.add(Violation("h-limit", t + 1, u.id, abs(ht)))
            elif u.kind is UnitKind.HEAT_ONLY:
                if ht < u.h_min - tol.heat:
                    rep.add(Violation("h-limit", t + 1, u.id, u.h_min - ht))
                elif ht > u.h_max + tol.heat:
                    rep.add(Violation("h-limit", t + 1, u.id, ht - u.h_max))
                if abs(pt) > tol.bounds:
                    rep.add(Violation("p-limit", t + 1, u.id, abs(pt)))
            else:
                if u.h_min is not None and ht < u.h_min - tol.heat:
                    rep.add(Violation("h-limit", t + 1, u.id, u.h_min - ht))
                if u.h_max is not None and ht > u.h_max + tol.heat:
                    rep.add(Violation("h-limit", t + 1, u.id, ht - u.h_max))
                if not contains(u.hull, pt, ht, tol.geometric):
                    rep.add(Violation("for-membership", t + 1, u.id, _outside_distance(u, pt, ht)))
                elif not u.hull_is_polygon and not contains(u.for_polygon, pt, ht, tol.geometric):
                    rep.add(Violation("for-membership", t + 1, u.id,
                                      _outside_distance(u, pt, ht, hull=False), severity="warning"))
        rep.extend(min_up_down_violations(u, x[i]))

    rep.extend(check_fleet_constraints(system.lots, solution.n_dsch, solution.n_ch, tol))
    return rep


def _outside_distance(u: GeneratingUnit, p: float, h: float, hull: bool = True) -> float:
    from .geometry import boundary_distance
    return boundary_distance(u.hull if hull else u.for_polygon, p, h)
