from .lp import solve_lp
from .milp import solve_milp
from .problems import EQ, GE, LE, LinearProgram, QuadraticProgram, SolveOutcome, Status, dual_objective
from .qp import solve_qp

__all__ = [
    "EQ", "GE", "LE", "LinearProgram", "QuadraticProgram", "SolveOutcome", "Status",
    "dual_objective", "solve_lp", "solve_milp", "solve_qp",
]
