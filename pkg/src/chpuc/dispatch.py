"""Dispatch tables in the hourly report layout, and demand reconstruction from them.

Column schema (one row per hour, header required)::

    hour, P_<unit>... , H_<unit>... , [N_dsch, Pv2g, [N_ch, Pg2v]], hourly_cost

``P_`` columns cover power-producing units and ``H_`` columns heat-producing
units, each in system order. With more than one lot the fleet columns are
suffixed ``_<lot>``. A table without fleet columns describes a schedule with
no PEVs.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .model import DemandProfile, PowerSystem, ScheduleSolution, Tolerances, Violation, SOLVER_TOLERANCES
from .pev import per_vehicle_power


class SchemaError(ValueError):
    pass


@dataclass
class DispatchTable:
    power_ids: list[str]
    heat_ids: list[str]
    lot_ids: list[str]
    p: np.ndarray                 # T × len(power_ids)
    h: np.ndarray                 # T × len(heat_ids)
    n_dsch: np.ndarray            # len(lot_ids) × T
    pv2g: np.ndarray
    n_ch: Optional[np.ndarray] = None    # None when the table has no charging columns
    pg2v: Optional[np.ndarray] = None
    hourly_cost: Optional[np.ndarray] = None

    @property
    def horizon(self) -> int:
        return self.p.shape[0]

    @property
    def has_charging(self) -> bool:
        return self.n_ch is not None

    def columns(self) -> list[str]:
        cols = ["hour"] + [f"P_{u}" for u in self.power_ids] + [f"H_{u}" for u in self.heat_ids]
        for lot in self.lot_ids:
            sfx = "" if len(self.lot_ids) == 1 else f"_{lot}"
            cols += [f"N_dsch{sfx}", f"Pv2g{sfx}"]
            if self.has_charging:
                cols += [f"N_ch{sfx}", f"Pg2v{sfx}"]
        return cols + ["hourly_cost"]


def _fmt(v: float) -> str:
    s = f"{float(v):.9f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def write_dispatch_csv(table: DispatchTable, path: str | Path | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns())
    cost = table.hourly_cost if table.hourly_cost is not None else np.zeros(table.horizon)
    for t in range(table.horizon):
        row = [str(t + 1)] + [_fmt(v) for v in table.p[t]] + [_fmt(v) for v in table.h[t]]
        for j in range(len(table.lot_ids)):
            row += [_fmt(round(table.n_dsch[j, t])), _fmt(table.pv2g[j, t])]
            if table.has_charging:
                row += [_fmt(round(table.n_ch[j, t])), _fmt(table.pg2v[j, t])]
        row.append(_fmt(cost[t]))
        w.writerow(row)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_dispatch_csv(source: str | Path) -> DispatchTable:
    """Parse a dispatch CSV given as a path or as raw text."""
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
        text = Path(source).read_text()
    else:
        text = source
    rows = list(csv.reader(text.splitlines()))
    rows = [r for r in rows if r]
    if not rows:
        raise SchemaError("dispatch table is empty")
    header = [c.strip() for c in rows[0]]
    body = rows[1:]
    if not body:
        raise SchemaError("dispatch table has a header but no hourly rows")
    for k, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise SchemaError(f"row {k} has {len(r)} cells, header has {len(header)}")
    if not header or header[0] != "hour" or header[-1] != "hourly_cost":
        raise SchemaError("dispatch header must start with 'hour' and end with 'hourly_cost'")
    try:
        data = np.array([[float(c.replace(",", "")) for c in r] for r in body], dtype=float).reshape(len(body), -1)
    except ValueError as exc:
        raise SchemaError(f"non-numeric cell: {exc}") from None
    if list(data[:, 0].astype(int)) != list(range(1, len(body) + 1)):
        raise SchemaError("hours must run 1..T in order")

    col = {name: k for k, name in enumerate(header)}
    if len(col) != len(header):
        raise SchemaError("duplicate column names")
    power_ids = [c[2:] for c in header if c.startswith("P_")]
    heat_ids = [c[2:] for c in header if c.startswith("H_")]
    fleet_cols = [c for c in header if c.startswith("N_dsch")]
    if fleet_cols == ["N_dsch"]:
        lot_ids, sfx = ["lot"], [""]
    else:
        lot_ids = [c[len("N_dsch_"):] for c in fleet_cols]
        sfx = ["_" + l for l in lot_ids]
    charging = any(c.startswith("N_ch") for c in header)
    known = {"hour", "hourly_cost"} | {f"P_{u}" for u in power_ids} | {f"H_{u}" for u in heat_ids}
    for s in sfx:
        known |= {f"N_dsch{s}", f"Pv2g{s}"} | ({f"N_ch{s}", f"Pg2v{s}"} if charging else set())
    missing = known - set(header)
    extra = set(header) - known
    if missing or extra:
        raise SchemaError(f"schema mismatch: missing {sorted(missing)}, unexpected {sorted(extra)}")

    def grab(names):
        return np.array([data[:, col[n]] for n in names]).reshape(len(names), len(body))

    return DispatchTable(
        power_ids=power_ids, heat_ids=heat_ids, lot_ids=lot_ids,
        p=grab([f"P_{u}" for u in power_ids]).T, h=grab([f"H_{u}" for u in heat_ids]).T,
        n_dsch=grab([f"N_dsch{s}" for s in sfx]), pv2g=grab([f"Pv2g{s}" for s in sfx]),
        n_ch=grab([f"N_ch{s}" for s in sfx]) if charging else None,
        pg2v=grab([f"Pg2v{s}" for s in sfx]) if charging else None,
        hourly_cost=data[:, col["hourly_cost"]].copy(),
    )


def derive_demand_from_dispatch(table: DispatchTable, reserve_fraction: float = 0.10,
                                resolution: Optional[float] = None) -> DemandProfile:
    """Hourly demand implied by a dispatch table's row sums.

    pd = sum of unit power + V2G injection - grid-to-vehicle draw, optionally
    snapped to ``resolution`` MW; hd = sum of heat; rd = reserve_fraction * pd
    rounded to the nearest MW.
    """
    pd = table.p.sum(axis=1) + table.pv2g.sum(axis=0)
    if table.has_charging:
        pd = pd - table.pg2v.sum(axis=0)
    hd = table.h.sum(axis=1)
    if resolution:
        pd = np.round(pd / resolution) * resolution
        pd = np.round(pd, 10)
    pd = np.maximum(pd, 0.0)
    rd = np.round(reserve_fraction * pd)
    return DemandProfile(pd=pd, hd=hd, rd=rd)


def table_from_solution(system: PowerSystem, sol: ScheduleSolution, charging: Optional[bool] = None) -> DispatchTable:
    """Report layout of a solution; ``charging`` defaults to any lot allowing grid charging."""
    pu, hu = system.power_units, system.heat_units
    if charging is None:
        charging = any(l.grid_charging for l in system.lots)
    ppev = np.array([per_vehicle_power(l) for l in system.lots]).reshape(-1, 1)
    nd = np.round(sol.n_dsch)
    nc = np.round(sol.n_ch)
    return DispatchTable(
        power_ids=[system.units[i].id for i in pu], heat_ids=[system.units[i].id for i in hu],
        lot_ids=[l.id for l in system.lots],
        p=(sol.p[pu] * sol.x[pu]).T, h=(sol.h[hu] * sol.x[hu]).T,
        n_dsch=nd, pv2g=nd * ppev,
        n_ch=nc if charging else None, pg2v=nc * ppev if charging else None,
        hourly_cost=sol.hourly_cost,
    )


def solution_from_table(system: PowerSystem, table: DispatchTable) -> ScheduleSolution:
    """Schedule implied by a table: a unit is ON whenever it produces power or heat."""
    N, T = system.n_units, table.horizon
    p, h = np.zeros((N, T)), np.zeros((N, T))
    for k, uid in enumerate(table.power_ids):
        p[_index(system, uid)] = table.p[:, k]
    for k, uid in enumerate(table.heat_ids):
        h[_index(system, uid)] = table.h[:, k]
    expect_p = {system.units[i].id for i in system.power_units}
    expect_h = {system.units[i].id for i in system.heat_units}
    if set(table.power_ids) != expect_p or set(table.heat_ids) != expect_h:
        raise SchemaError("table unit columns do not match the system's units")
    x = ((np.abs(p) > 0) | (np.abs(h) > 0)).astype(int)
    M = len(system.lots)
    n_dsch = np.zeros((M, T))
    n_ch = np.zeros((M, T))
    if table.lot_ids and M:
        if len(table.lot_ids) != M:
            raise SchemaError(f"table has {len(table.lot_ids)} lots, system has {M}")
        n_dsch = table.n_dsch.copy()
        if table.has_charging:
            n_ch = table.n_ch.copy()
    elif table.lot_ids and np.any(table.n_dsch):
        raise SchemaError("table dispatches PEVs but the system has no lots")
    sol = ScheduleSolution(x=x, p=p, h=h, n_dsch=n_dsch, n_ch=n_ch,
                           hourly_cost=table.hourly_cost)
    if table.hourly_cost is not None:
        sol.total_cost = float(np.sum(table.hourly_cost))
    return sol


def check_pev_power_columns(system: PowerSystem, table: DispatchTable,
                            tol: Tolerances = SOLVER_TOLERANCES) -> list[Violation]:
    """Printed Pv2g/Pg2v against vehicle count times per-vehicle power."""
    out = []
    for j, lot in enumerate(system.lots[:len(table.lot_ids)]):
        ppev = per_vehicle_power(lot)
        pairs = [(table.n_dsch[j], table.pv2g[j])]
        if table.has_charging:
            pairs.append((table.n_ch[j], table.pg2v[j]))
        for counts, power in pairs:
            r = np.abs(power - counts * ppev)
            for t in np.flatnonzero(r > tol.pev_power):
                out.append(Violation("pev-power", int(t) + 1, lot.id, float(r[t])))
    return out


def _index(system, uid):
    try:
        return system.unit_index(uid)
    except KeyError:
        raise SchemaError(f"table column refers to unknown unit {uid!r}") from None
