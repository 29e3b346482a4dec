"""Domain records for the CHP unit-commitment problem with PEV parking lots."""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .geometry import GEOM_TOL, ForPolygon, convexify, halfspace_form, heat_range


class InvariantError(ValueError):
    """A record violates one of its invariants; ``field`` names the culprit."""

    def __init__(self, owner: str, field_name: str, msg: str):
        super().__init__(f"{owner}: field '{field_name}' {msg}")
        self.owner = owner
        self.field = field_name


class KindMismatchError(TypeError):
    pass


class InfeasiblePointError(ValueError):
    pass


class UnitKind(str, Enum):
    THERMAL = "thermal"
    CHP = "chp"
    HEAT_ONLY = "heat-only"


class _ArrayEq:
    """Field-wise equality that understands numpy arrays."""

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        for f in fields(self):
            if not f.compare:
                continue
            a, b = getattr(self, f.name), getattr(other, f.name)
            if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
                if a is None or b is None or not np.array_equal(a, b):
                    return False
            elif a != b:
                return False
        return True


@dataclass(eq=False)
class GeneratingUnit(_ArrayEq):
    id: str
    kind: UnitKind
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0
    e: float = 0.0
    f: float = 0.0
    p_min: Optional[float] = None
    p_max: Optional[float] = None
    h_min: Optional[float] = None
    h_max: Optional[float] = None
    for_polygon: Optional[ForPolygon] = None
    t_up_min: int = 1
    t_down_min: int = 1
    startup_cost: float = 0.0
    shutdown_cost: float = 0.0
    initial_status: int = -1
    hull: Optional[ForPolygon] = field(default=None, init=False, repr=False, compare=False)
    hull_is_polygon: bool = field(default=True, init=False, repr=False, compare=False)
    halfspaces: tuple = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        self.kind = UnitKind(self.kind)
        own = f"unit {self.id}"
        for name in "abcdef":
            if getattr(self, name) < 0:
                raise InvariantError(own, name, "must be nonnegative")
        if self.kind is UnitKind.THERMAL:
            if self.p_min is None or self.p_max is None:
                raise InvariantError(own, "p_max", "required for thermal units")
            if self.d or self.e or self.f:
                raise InvariantError(own, "d", "heat coefficients must be zero for thermal units")
        if self.kind is UnitKind.HEAT_ONLY and (self.h_min is None or self.h_max is None):
            raise InvariantError(own, "h_max", "required for heat-only units")
        if self.p_min is not None and self.p_max is not None and self.p_min > self.p_max:
            raise InvariantError(own, "p_min", f"{self.p_min} exceeds p_max {self.p_max}")
        if self.h_min is not None and self.h_max is not None and self.h_min > self.h_max:
            raise InvariantError(own, "h_min", f"{self.h_min} exceeds h_max {self.h_max}")
        if self.kind is UnitKind.CHP:
            if self.for_polygon is None:
                raise InvariantError(own, "for_polygon", "required for CHP units")
            self.hull, self.hull_is_polygon = convexify(self.for_polygon)
            self.halfspaces = tuple(halfspace_form(self.hull))
        elif self.for_polygon is not None:
            raise InvariantError(own, "for_polygon", "only CHP units carry a FOR")
        if self.t_up_min < 1:
            raise InvariantError(own, "t_up_min", "must be >= 1")
        if self.t_down_min < 1:
            raise InvariantError(own, "t_down_min", "must be >= 1")
        if self.initial_status == 0:
            raise InvariantError(own, "initial_status", "must be nonzero")
        if self.startup_cost < 0 or self.shutdown_cost < 0:
            raise InvariantError(own, "startup_cost", "must be nonnegative")

    @property
    def makes_power(self) -> bool:
        return self.kind is not UnitKind.HEAT_ONLY

    @property
    def makes_heat(self) -> bool:
        return self.kind is not UnitKind.THERMAL

    @property
    def power_bounds(self) -> tuple[float, float]:
        if self.kind is UnitKind.CHP:
            return self.hull.p_range
        if self.kind is UnitKind.HEAT_ONLY:
            return 0.0, 0.0
        return float(self.p_min), float(self.p_max)

    @property
    def heat_bounds(self) -> tuple[float, float]:
        if self.kind is UnitKind.CHP:
            lo, hi = heat_range(self.hull)
            if self.h_min is not None:
                lo = max(lo, self.h_min)
            if self.h_max is not None:
                hi = min(hi, self.h_max)
            return lo, hi
        if self.kind is UnitKind.THERMAL:
            return 0.0, 0.0
        return float(self.h_min), float(self.h_max)

    @property
    def initially_on(self) -> bool:
        return self.initial_status > 0


def _count_vector(v, T, default, owner, name):
    if v is None:
        return np.full(T, float(default)) if T is not None else None
    arr = np.asarray(v, dtype=float).ravel()
    if T is not None and arr.size != T:
        raise InvariantError(owner, name, f"has length {arr.size}, expected {T}")
    return arr


@dataclass(eq=False)
class ParkingLot(_ArrayEq):
    """Aggregated PEV fleet. Hourly count bounds are length-T vectors."""

    id: str
    fleet_size: int
    pv: float
    delta: float
    eta: float
    pi: float = 0.0
    n_dsch_min: Optional[np.ndarray] = None
    n_dsch_max: Optional[np.ndarray] = None
    n_ch_min: Optional[np.ndarray] = None
    n_ch_max: Optional[np.ndarray] = None
    grid_charging: bool = False

    def __post_init__(self):
        own = f"lot {self.id}"
        if self.fleet_size < 0:
            raise InvariantError(own, "fleet_size", "must be nonnegative")
        if not self.pv > 0:
            raise InvariantError(own, "pv", "must be positive")
        if not 0.0 <= self.delta <= 1.0:
            raise InvariantError(own, "delta", "must lie in [0, 1]")
        if not 0.0 < self.eta <= 1.0:
            raise InvariantError(own, "eta", "must lie in (0, 1]")
        if self.pi < 0:
            raise InvariantError(own, "pi", "must be nonnegative")
        for lo_name, hi_name in (("n_dsch_min", "n_dsch_max"), ("n_ch_min", "n_ch_max")):
            lo, hi = getattr(self, lo_name), getattr(self, hi_name)
            if lo is None and hi is None:
                continue
            T = len(lo) if lo is not None else len(hi)
            lo = _count_vector(lo, T, 0, own, lo_name)
            hi = _count_vector(hi, T, self.fleet_size, own, hi_name)
            if np.any(lo < 0):
                raise InvariantError(own, lo_name, "must be nonnegative")
            if np.any(lo > hi):
                raise InvariantError(own, lo_name, "exceeds the matching upper bound")
            if np.any(hi > self.fleet_size):
                raise InvariantError(own, hi_name, "exceeds fleet_size")
            setattr(self, lo_name, lo)
            setattr(self, hi_name, hi)

    def bounds(self, T: int, charging: bool = False) -> tuple[np.ndarray, np.ndarray]:
        if charging:
            if not self.grid_charging:
                return np.zeros(T), np.zeros(T)
            lo, hi = self.n_ch_min, self.n_ch_max
        else:
            lo, hi = self.n_dsch_min, self.n_dsch_max
        lo = np.zeros(T) if lo is None else lo
        hi = np.full(T, float(self.fleet_size)) if hi is None else hi
        if lo.size != T or hi.size != T:
            raise InvariantError(f"lot {self.id}", "n_dsch_max", f"bounds do not cover {T} hours")
        return lo, hi


@dataclass(eq=False)
class DemandProfile(_ArrayEq):
    pd: np.ndarray
    hd: np.ndarray
    rd: np.ndarray

    def __post_init__(self):
        self.pd = np.asarray(self.pd, dtype=float).ravel()
        self.hd = np.asarray(self.hd, dtype=float).ravel()
        self.rd = np.asarray(self.rd, dtype=float).ravel()
        if not (self.pd.size == self.hd.size == self.rd.size):
            raise InvariantError("demand", "hd", "vectors must share the horizon length")
        for name in ("pd", "hd", "rd"):
            if np.any(getattr(self, name) < 0):
                raise InvariantError("demand", name, "entries must be nonnegative")

    @property
    def horizon(self) -> int:
        return self.pd.size


@dataclass(eq=False)
class PowerSystem(_ArrayEq):
    units: list[GeneratingUnit]
    lots: list[ParkingLot] = field(default_factory=list)
    demand: Optional[DemandProfile] = None

    def __post_init__(self):
        ids = [u.id for u in self.units]
        if len(set(ids)) != len(ids):
            raise InvariantError("system", "units", "unit ids must be unique")
        lot_ids = [l.id for l in self.lots]
        if len(set(lot_ids)) != len(lot_ids):
            raise InvariantError("system", "lots", "lot ids must be unique")

    @property
    def n_units(self) -> int:
        return len(self.units)

    def unit_index(self, uid: str) -> int:
        for i, u in enumerate(self.units):
            if u.id == uid:
                return i
        raise KeyError(uid)

    def indices(self, *kinds: UnitKind) -> list[int]:
        return [i for i, u in enumerate(self.units) if u.kind in kinds]

    @property
    def power_units(self) -> list[int]:
        return self.indices(UnitKind.THERMAL, UnitKind.CHP)

    @property
    def heat_units(self) -> list[int]:
        return self.indices(UnitKind.CHP, UnitKind.HEAT_ONLY)


@dataclass(eq=False)
class ScheduleSolution(_ArrayEq):
    """Commitment x, dispatch p/h (units x hours) and fleet counts (lots x hours)."""

    x: np.ndarray
    p: np.ndarray
    h: np.ndarray
    n_dsch: np.ndarray
    n_ch: np.ndarray
    hourly_cost: Optional[np.ndarray] = None
    total_cost: float = float("nan")

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=int)
        self.p = np.asarray(self.p, dtype=float)
        self.h = np.asarray(self.h, dtype=float)
        T = self.x.shape[1] if self.x.ndim == 2 else 0
        self.n_dsch = np.asarray(self.n_dsch, dtype=float).reshape(-1, T)
        self.n_ch = np.asarray(self.n_ch, dtype=float).reshape(-1, T)
        if self.p.shape != self.x.shape or self.h.shape != self.x.shape:
            raise ValueError("x, p and h must share shape (units, hours)")
        if self.n_dsch.shape != self.n_ch.shape:
            raise ValueError("n_dsch and n_ch must share shape (lots, hours)")

    @property
    def horizon(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class Violation:
    tag: str
    hour: int  # 1-based
    ident: str
    residual: float
    severity: str = "error"

    def __str__(self):
        return f"{self.severity:7s} {self.tag:18s} hour {self.hour:3d}  {self.ident:10s} residual {self.residual:.6g}"


TAGS = ("power-balance", "heat-balance", "p-limit", "h-limit", "for-membership", "min-up",
        "min-down", "reserve", "fleet-total-dsch", "fleet-total-ch", "fleet-hourly-dsch",
        "fleet-hourly-ch", "pev-power")


@dataclass
class ViolationReport:
    violations: list[Violation] = field(default_factory=list)
    warnings: list[Violation] = field(default_factory=list)

    def add(self, v: Violation):
        (self.warnings if v.severity == "warning" else self.violations).append(v)

    def extend(self, vs: Sequence[Violation]):
        for v in vs:
            self.add(v)

    @property
    def feasible(self) -> bool:
        return not self.violations

    def by_tag(self, tag: str) -> list[Violation]:
        return [v for v in self.violations + self.warnings if v.tag == tag]

    def __len__(self):
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)


@dataclass(frozen=True)
class Tolerances:
    balance: float = 1e-6
    heat: float = 1e-6
    bounds: float = 1e-6
    reserve: float = 1e-6
    geometric: float = GEOM_TOL
    fleet_total_rel: float = 0.0
    fleet_total_abs: float = 1e-6
    fleet_count: float = 1e-6
    pev_power: float = 1e-6


SOLVER_TOLERANCES = Tolerances()
PAPER_REPLAY_TOLERANCES = Tolerances(balance=0.15, heat=1.0, bounds=0.15, reserve=0.15,
                                     fleet_total_rel=0.0015, pev_power=0.1)
TOLERANCE_PROFILES = {"solver": SOLVER_TOLERANCES, "paper-replay": PAPER_REPLAY_TOLERANCES}
