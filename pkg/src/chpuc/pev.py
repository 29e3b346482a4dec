"""PEV fleet power and daily/hourly fleet scheduling constraints."""
from __future__ import annotations

import csv
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .model import ParkingLot, Tolerances, Violation, SOLVER_TOLERANCES


def per_vehicle_power(lot: ParkingLot) -> float:
    """Deliverable power of one vehicle over a one-hour step, in MW."""
    return lot.pv * lot.delta * lot.eta / 1000.0


def fleet_power(lot: ParkingLot, n: float) -> float:
    if n < 0 or n > lot.fleet_size:
        raise ValueError(f"vehicle count {n} outside [0, {lot.fleet_size}] for lot {lot.id}")
    return n * per_vehicle_power(lot)


def load_min_discharge_profile(path: str | Path | None = None) -> np.ndarray:
    """Hourly minimum discharge counts from a ``hour,min_count`` CSV.

    With no path, the bundled 24-hour scenario-2 profile is returned.
    """
    if path is None:
        text = resources.files("chpuc.data").joinpath("table3_min_dsch.csv").read_text()
    else:
        text = Path(path).read_text()
    rows = list(csv.DictReader(text.splitlines()))
    rows.sort(key=lambda r: int(r["hour"]))
    hours = [int(r["hour"]) for r in rows]
    if hours != list(range(1, len(rows) + 1)):
        raise ValueError("minimum-discharge profile must list hours 1..T once each")
    return np.array([float(r["min_count"]) for r in rows])


def check_fleet_constraints(lots: Sequence[ParkingLot], n_dsch: np.ndarray, n_ch: np.ndarray,
                            tol: Tolerances = SOLVER_TOLERANCES) -> list[Violation]:
    """Daily totals (equalities) and hourly count bounds for every lot.

    Charging rows are only checked for lots with ``grid_charging``; the
    minimum-discharge profile, when configured, lives in ``n_dsch_min``.
    """
    if not lots:
        return []
    n_dsch = np.asarray(n_dsch, dtype=float).reshape(len(lots), -1)
    n_ch = np.asarray(n_ch, dtype=float).reshape(len(lots), -1)
    T = n_dsch.shape[1]
    out: list[Violation] = []
    for j, lot in enumerate(lots):
        total_tol = max(tol.fleet_total_abs, tol.fleet_total_rel * lot.fleet_size)
        checks = [("dsch", n_dsch[j], False)]
        if lot.grid_charging:
            checks.append(("ch", n_ch[j], True))
        for name, counts, charging in checks:
            resid = counts.sum() - lot.fleet_size
            if abs(resid) > total_tol:
                out.append(Violation(f"fleet-total-{name}", 0, lot.id, abs(resid)))
            lo, hi = lot.bounds(T, charging=charging)
            for t in range(T):
                short = lo[t] - counts[t]
                over = counts[t] - hi[t]
                if short > tol.fleet_count:
                    out.append(Violation(f"fleet-hourly-{name}", t + 1, lot.id, short))
                elif over > tol.fleet_count:
                    out.append(Violation(f"fleet-hourly-{name}", t + 1, lot.id, over))
    return out
