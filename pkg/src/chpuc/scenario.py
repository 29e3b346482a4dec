"""Scenario set-up, solver runs and report files."""
from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .benders import BendersOptions, ConvergenceTrace, solve_chpuc_pev
from .dispatch import (DispatchTable, check_pev_power_columns, derive_demand_from_dispatch,
                       read_dispatch_csv, solution_from_table, table_from_solution, write_dispatch_csv)
from .io import emit_system
from .model import (SOLVER_TOLERANCES, TOLERANCE_PROFILES, DemandProfile, InvariantError, ParkingLot,
                    PowerSystem, ScheduleSolution, Tolerances, UnitKind, ViolationReport)
from .pev import load_min_discharge_profile, per_vehicle_power
from .validation import validate_schedule


@dataclass
class ScenarioConfig:
    """Scenario 1: no PEVs. 2: V2G only, charging supplied off-grid. 3: grid charging and V2G."""

    scenario: int
    fleet_size: Optional[int] = None      # None: the lot's own fleet size (50000 in the reference data)
    reserve_fraction: float = 0.10
    dsch_cap_fraction: Optional[float] = None
    ch_cap_fraction: Optional[float] = None
    min_dsch: Optional[str] = "default"   # "default", None/"none", "table3" or a CSV path
    pi: Optional[float] = None            # overrides the lot's V2G price when set
    tol: float = 1e-4
    max_outer: int = 200
    max_inner: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.scenario not in (1, 2, 3):
            raise ValueError(f"scenario must be 1, 2 or 3, got {self.scenario}")
        if self.dsch_cap_fraction is None:
            self.dsch_cap_fraction = 0.10 if self.scenario == 2 else 0.20
        if self.ch_cap_fraction is None:
            self.ch_cap_fraction = 0.20
        for name in ("reserve_fraction", "dsch_cap_fraction", "ch_cap_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.fleet_size is not None and self.fleet_size < 0:
            raise ValueError("fleet_size must be nonnegative")
        if self.min_dsch == "default":
            self.min_dsch = "table3" if self.scenario == 2 else None
        if self.min_dsch == "none":
            self.min_dsch = None

    @property
    def uses_fleet(self) -> bool:
        return self.scenario != 1


def configure_lots(system: PowerSystem, config: ScenarioConfig, horizon: int) -> list[ParkingLot]:
    """Lots with scenario-specific hourly caps, charging flag and minimum profile."""
    if not config.uses_fleet:
        return []
    base = system.lots[0] if system.lots else None
    if base is None:
        raise InvariantError("system", "lots", f"scenario {config.scenario} needs a parking lot")
    mins = None
    if config.min_dsch is not None:
        src = None if config.min_dsch == "table3" else config.min_dsch
        mins = load_min_discharge_profile(src)
        if mins.size != horizon:
            raise InvariantError("scenario", "min_dsch", f"profile has {mins.size} hours, horizon is {horizon}")
    lots = []
    for k, lot in enumerate(system.lots):
        fleet = config.fleet_size if (config.fleet_size is not None and len(system.lots) == 1) else lot.fleet_size
        cap = np.floor(config.dsch_cap_fraction * fleet + 1e-9)
        dmax = np.full(horizon, cap) if lot.n_dsch_max is None else np.minimum(lot.n_dsch_max, cap)
        dmin = np.zeros(horizon) if lot.n_dsch_min is None else lot.n_dsch_min.copy()
        if mins is not None and k == 0:
            dmin = np.maximum(dmin, mins)
        kw = dict(fleet_size=fleet, n_dsch_min=dmin, n_dsch_max=dmax,
                  grid_charging=config.scenario == 3, n_ch_min=None, n_ch_max=None)
        if config.scenario == 3:
            ccap = np.floor(config.ch_cap_fraction * fleet + 1e-9)
            kw["n_ch_min"] = np.zeros(horizon) if lot.n_ch_min is None else lot.n_ch_min.copy()
            kw["n_ch_max"] = np.full(horizon, ccap) if lot.n_ch_max is None else np.minimum(lot.n_ch_max, ccap)
        if config.pi is not None:
            kw["pi"] = config.pi
        lots.append(replace(lot, **kw))
    return lots


def scenario_system(system: PowerSystem, config: ScenarioConfig,
                    demand: Optional[DemandProfile] = None) -> PowerSystem:
    demand = demand if demand is not None else system.demand
    if demand is None:
        raise InvariantError("system", "demand", "no demand profile given")
    if config.reserve_fraction != 0.10 and system.demand is demand:
        demand = DemandProfile(pd=demand.pd, hd=demand.hd, rd=np.round(config.reserve_fraction * demand.pd))
    return PowerSystem(units=list(system.units), lots=configure_lots(system, config, demand.horizon),
                       demand=demand)


def infer_scenario(table: DispatchTable) -> int:
    if not table.lot_ids:
        return 1
    return 3 if table.has_charging else 2


def validate_dispatch(system: PowerSystem, table: DispatchTable | str | Path,
                      profile: str | Tolerances = "paper-replay",
                      config: Optional[ScenarioConfig] = None) -> ViolationReport:
    """Replay a dispatch table against the full constraint set.

    Demand is reconstructed from the table's own row sums; the scenario
    (caps, charging, minimum discharge) is inferred from its columns unless
    ``config`` is given.
    """
    if not isinstance(table, DispatchTable):
        table = read_dispatch_csv(table)
    tol = TOLERANCE_PROFILES[profile] if isinstance(profile, str) else profile
    if config is None:
        config = ScenarioConfig(infer_scenario(table))
    demand = derive_demand_from_dispatch(table, reserve_fraction=config.reserve_fraction)
    sys_s = PowerSystem(units=list(system.units), lots=configure_lots(system, config, demand.horizon),
                        demand=demand)
    sol = solution_from_table(sys_s, table)
    rep = validate_schedule(sys_s, demand, sol, tol)
    rep.extend(check_pev_power_columns(sys_s, table, tol))
    return rep


def benders_options(config: ScenarioConfig, **extra) -> BendersOptions:
    return BendersOptions(tol=config.tol, max_outer=config.max_outer, max_inner=config.max_inner, **extra)


def system_fingerprint(system: PowerSystem) -> str:
    """Stable hash of units, lots and demand; keys the scenario-1 baseline cache."""
    text = emit_system(PowerSystem(units=list(system.units), lots=list(system.lots), demand=None))
    d = system.demand
    body = text + "\n" + ",".join(f"{v:.9g}" for v in np.concatenate([d.pd, d.hd, d.rd]))
    return hashlib.sha256(body.encode()).hexdigest()[:16]


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    system: PowerSystem
    solution: ScheduleSolution
    trace: ConvergenceTrace
    report: ViolationReport
    baseline_cost: Optional[float] = None
    files: dict = field(default_factory=dict)

    @property
    def total_cost(self) -> float:
        return float(self.solution.total_cost)

    @property
    def improvement(self) -> Optional[float]:
        if self.config.scenario == 1 or self.baseline_cost is None:
            return None
        return self.baseline_cost - self.total_cost

    @property
    def ok(self) -> bool:
        return self.trace.converged and self.report.feasible

    @property
    def exit_code(self) -> int:
        return 0 if self.ok else 1


def solve_scenario(system: PowerSystem, config: ScenarioConfig, options: Optional[BendersOptions] = None):
    """Configure the scenario and run the decomposition; returns (scenario system, solution, trace, report)."""
    sys_s = scenario_system(system, config)
    sol, trace = solve_chpuc_pev(sys_s, options=options or benders_options(config))
    report = validate_schedule(sys_s, sys_s.demand, sol, SOLVER_TOLERANCES)
    return sys_s, sol, trace, report


def baseline_cost(system: PowerSystem, config: ScenarioConfig, cache_dir: Optional[str | Path] = None) -> float:
    """Scenario-1 cost of ``system``, read from or written to a small JSON cache."""
    key = system_fingerprint(scenario_system(system, ScenarioConfig(1, reserve_fraction=config.reserve_fraction)))
    path = Path(cache_dir) / f"baseline-{key}.json" if cache_dir is not None else None
    if path is not None and path.exists():
        data = json.loads(path.read_text())
        if data.get("tol") == config.tol:
            return float(data["total_cost"])
    base = ScenarioConfig(1, reserve_fraction=config.reserve_fraction, tol=config.tol,
                          max_outer=config.max_outer, max_inner=config.max_inner, seed=config.seed)
    _, sol, trace, _ = solve_scenario(system, base)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps({"total_cost": round(float(sol.total_cost), 6), "tol": config.tol,
                                    "converged": trace.converged}, indent=1) + "\n")
    return float(sol.total_cost)


def _money(v: float) -> str:
    return f"{v:,.2f}"


def format_summary(res: ScenarioResult) -> str:
    """Plain-text summary in the layout of the scenario comparison table."""
    lines = ["Scenario  Best result ($)  Improvement ($)"]
    if res.config.scenario != 1 and res.baseline_cost is not None:
        lines.append(f"{1:<8d}  {_money(res.baseline_cost):>15}  {'—':>15}")
    imp = res.improvement
    lines.append(f"{res.config.scenario:<8d}  {_money(res.total_cost):>15}  "
                 f"{'—' if imp is None else _money(imp):>15}")
    lines.append("")
    if res.config.scenario == 1:
        lines.append("Improvement: —")
    elif imp is not None:
        lines.append(f"Improvement: {_money(imp)}")
    lines.append(f"Total cost: {res.total_cost:.2f}")
    lines.append(f"Converged: {'yes' if res.trace.converged else 'no'}")
    lines.append(f"Final gap: {res.trace.final_gap:.3e}")
    lines.append(f"Outer iterations: {len(res.trace)}")
    lines.append(f"Violations: {len(res.report)}")
    sol = res.solution
    if res.config.scenario == 3 and sol.n_dsch.size:
        both = np.flatnonzero(np.any((sol.n_dsch > 0) & (sol.n_ch > 0), axis=0)) + 1
        lines.append("Hours with both charging and discharging: " + (", ".join(map(str, both)) or "none"))
    return "\n".join(lines) + "\n"


def load_curves_csv(system: PowerSystem, sol: ScheduleSolution) -> str:
    """Hourly heat and power load curves with the supply split by source."""
    d = system.demand
    kinds = [u.kind for u in system.units]
    thermal = [i for i, k in enumerate(kinds) if k is UnitKind.THERMAL]
    chp = [i for i, k in enumerate(kinds) if k is UnitKind.CHP]
    boiler = [i for i, k in enumerate(kinds) if k is UnitKind.HEAT_ONLY]
    v2g = np.zeros(d.horizon)
    g2v = np.zeros(d.horizon)
    for j, lot in enumerate(system.lots):
        ppev = per_vehicle_power(lot)
        v2g += np.round(sol.n_dsch[j]) * ppev
        g2v += np.round(sol.n_ch[j]) * ppev
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["hour", "power_demand", "heat_demand", "reserve", "P_thermal", "P_chp", "Pv2g", "Pg2v",
                "H_chp", "H_heat_only"])
    for t in range(d.horizon):
        vals = [d.pd[t], d.hd[t], d.rd[t], sol.p[thermal, t].sum(), sol.p[chp, t].sum(), v2g[t], g2v[t],
                sol.h[chp, t].sum(), sol.h[boiler, t].sum()]
        w.writerow([t + 1] + [f"{v:.6f}" for v in vals])
    return buf.getvalue()


def run_scenario(system: PowerSystem, config: ScenarioConfig, out_dir: str | Path | None = None,
                 cache_dir: str | Path | None = None, baseline: Optional[float] = None,
                 options: Optional[BendersOptions] = None) -> ScenarioResult:
    """Solve one scenario and, with ``out_dir``, write the four report files.

    Files: dispatch.csv, summary.txt, convergence.csv, load_curves.csv.
    The scenario-1 baseline comes from ``baseline`` when given, otherwise
    from the cache in ``cache_dir`` (defaulting to ``out_dir``), solving
    scenario 1 once when absent.
    """
    sys_s, sol, trace, report = solve_scenario(system, config, options)
    if config.scenario == 1:
        base = float(sol.total_cost)
        if cache_dir is not None or out_dir is not None:
            key = system_fingerprint(sys_s)
            path = Path(cache_dir if cache_dir is not None else out_dir) / f"baseline-{key}.json"
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps({"total_cost": round(base, 6), "tol": config.tol,
                                        "converged": trace.converged}, indent=1) + "\n")
    elif baseline is not None:
        base = float(baseline)
    else:
        base = baseline_cost(system, config, cache_dir if cache_dir is not None else out_dir)
    res = ScenarioResult(config, sys_s, sol, trace, report, baseline_cost=base)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        table = table_from_solution(sys_s, sol, charging=config.scenario == 3)
        res.files = {
            "dispatch": out / "dispatch.csv",
            "summary": out / "summary.txt",
            "convergence": out / "convergence.csv",
            "load_curves": out / "load_curves.csv",
        }
        write_dispatch_csv(table, res.files["dispatch"])
        res.files["summary"].write_text(format_summary(res))
        trace.to_csv(res.files["convergence"])
        res.files["load_curves"].write_text(load_curves_csv(sys_s, sol))
    return res
