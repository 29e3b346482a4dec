"""Fuel, transition and total operating cost."""
from __future__ import annotations

import numpy as np

from .geometry import GEOM_TOL, contains
from .model import (GeneratingUnit, InfeasiblePointError, KindMismatchError, PowerSystem,
                    ScheduleSolution, UnitKind)
from .pev import per_vehicle_power


def fuel_cost_thermal(unit: GeneratingUnit, p: float) -> float:
    if unit.kind is not UnitKind.THERMAL:
        raise KindMismatchError(f"unit {unit.id} is {unit.kind.value}, not thermal")
    return unit.a + unit.b * p + unit.c * p * p


def fuel_cost_chp(unit: GeneratingUnit, p: float, h: float, tol: float = GEOM_TOL) -> float:
    """Joint heat-power fuel cost; (0, 0) is allowed and prices the no-load term."""
    if unit.kind is not UnitKind.CHP:
        raise KindMismatchError(f"unit {unit.id} is {unit.kind.value}, not chp")
    if not (p == 0 and h == 0) and not contains(unit.hull, p, h, tol):
        raise InfeasiblePointError(f"({p}, {h}) lies outside the FOR of unit {unit.id}")
    return unit.a + unit.b * p + unit.c * p * p + unit.d * h + unit.e * h * h + unit.f * p * h


def fuel_cost_heat_only(unit: GeneratingUnit, h: float) -> float:
    if unit.kind is not UnitKind.HEAT_ONLY:
        raise KindMismatchError(f"unit {unit.id} is {unit.kind.value}, not heat-only")
    return unit.a + unit.d * h + unit.e * h * h


def fuel_cost(unit: GeneratingUnit, p: float, h: float) -> float:
    if unit.kind is UnitKind.THERMAL:
        return fuel_cost_thermal(unit, p)
    if unit.kind is UnitKind.CHP:
        return fuel_cost_chp(unit, p, h)
    return fuel_cost_heat_only(unit, h)


def transition_costs(unit: GeneratingUnit, x_prev: int, x_curr: int) -> tuple[float, float]:
    su = unit.startup_cost * x_curr * (x_curr - x_prev)
    sd = unit.shutdown_cost * x_prev * (x_prev - x_curr)
    return float(su), float(sd)


def total_cost(system: PowerSystem, solution: ScheduleSolution, fill: bool = True) -> tuple[float, np.ndarray]:
    """Total and per-hour operating cost of a schedule.

    Sums fuel cost of committed units, startup/shutdown costs and the V2G
    discharge cost. With ``fill`` the solution's cost fields are updated.
    """
    N, T = solution.x.shape
    if N != system.n_units or solution.n_dsch.shape[0] != len(system.lots):
        raise ValueError("solution dimensions do not match the system")
    hourly = np.zeros(T)
    for i, u in enumerate(system.units):
        prev = 1 if u.initially_on else 0
        for t in range(T):
            xt = int(solution.x[i, t])
            if xt:
                hourly[t] += fuel_cost(u, solution.p[i, t], solution.h[i, t])
            su, sd = transition_costs(u, prev, xt)
            hourly[t] += su + sd
            prev = xt
    for j, lot in enumerate(system.lots):
        hourly += solution.n_dsch[j] * per_vehicle_power(lot) * lot.pi
    total = float(hourly.sum())
    if fill:
        solution.hourly_cost = hourly
        solution.total_cost = total
    return total, hourly
