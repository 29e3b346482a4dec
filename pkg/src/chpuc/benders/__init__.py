"""Double Benders decomposition for CHP unit commitment with PEV lots."""
from .cuts import (FEASIBILITY, H_SPACE, NORMAL, STRONG, X_SPACE, BendersCut, ConvergenceTrace, CutPool,
                   TraceRecord, build_strong_cut)
from .inner import HourModel, dispatch_hour, inner_benders, solve_inner_master, solve_inner_sub
from .outer import (BendersOptions, MasterResult, ModelInfeasibleError, build_outer_cut, fixed_costs,
                    round_fleet, solve_chpuc_pev, solve_outer_master)
