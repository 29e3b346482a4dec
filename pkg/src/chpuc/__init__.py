"""CHP unit commitment with PEV parking lots, solved by a two-level Benders decomposition."""
from .benders import BendersOptions, ModelInfeasibleError, solve_chpuc_pev
from .geometry import ForPolygon
from .io import load_reference_system, load_system
from .model import (DemandProfile, GeneratingUnit, ParkingLot, PowerSystem, ScheduleSolution, UnitKind,
                    ViolationReport)
from .pev import per_vehicle_power
from .scenario import ScenarioConfig, run_scenario, validate_dispatch
from .validation import validate_schedule

__version__ = "0.1.0"
