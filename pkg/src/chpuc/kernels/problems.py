from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

LE, EQ, GE = "<=", "==", ">="


class Status(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration-limit"


@dataclass
class LinearProgram:
    """min c'x  s.t.  A x (<=, ==, >=) b,  lower <= x <= upper."""

    c: np.ndarray
    A: np.ndarray
    senses: Sequence[str]
    b: np.ndarray
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        self.A = np.asarray(self.A, dtype=float).reshape(-1, n)
        self.b = np.asarray(self.b, dtype=float).ravel()
        self.senses = list(self.senses)
        m = self.A.shape[0]
        if self.b.size != m or len(self.senses) != m:
            raise ValueError("constraint dimensions inconsistent")
        bad = [s for s in self.senses if s not in (LE, EQ, GE)]
        if bad:
            raise ValueError(f"unknown constraint sense {bad[0]!r}")
        self.lower = np.zeros(n) if self.lower is None else np.asarray(self.lower, dtype=float).ravel()
        self.upper = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float).ravel()
        if self.lower.size != n or self.upper.size != n:
            raise ValueError("bound dimensions inconsistent")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")

    @property
    def n(self) -> int:
        return self.c.size

    @property
    def m(self) -> int:
        return self.A.shape[0]


@dataclass
class QuadraticProgram(LinearProgram):
    """min 1/2 x'Qx + c'x subject to the linear constraints of LinearProgram."""

    Q: Optional[np.ndarray] = None

    def __post_init__(self):
        super().__post_init__()
        n = self.n
        self.Q = np.zeros((n, n)) if self.Q is None else np.asarray(self.Q, dtype=float)
        if self.Q.shape != (n, n):
            raise ValueError("Q has wrong shape")
        if not np.allclose(self.Q, self.Q.T, atol=1e-12):
            raise ValueError("Q must be symmetric")
        if n and np.linalg.eigvalsh(self.Q).min() < -1e-10 * max(1.0, np.abs(self.Q).max()):
            raise ValueError("Q must be positive semidefinite")


@dataclass
class SolveOutcome:
    """Result of an LP / QP / MILP solve.

    ``duals`` are marginals d(objective)/d(b_i): nonnegative on ``>=`` rows,
    nonpositive on ``<=`` rows of a minimisation. ``lower_duals`` and
    ``upper_duals`` are the nonnegative bound multipliers, so that at an
    optimum ``Qx + c = A'duals + lower_duals - upper_duals``.
    """

    status: Status
    x: Optional[np.ndarray] = None
    objective: float = float("nan")
    duals: Optional[np.ndarray] = None
    lower_duals: Optional[np.ndarray] = None
    upper_duals: Optional[np.ndarray] = None
    iterations: int = 0
    nodes: int = 0
    gap: float = 0.0
    bound: float = float("nan")
    message: str = ""
    ray: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


def dual_objective(lp: LinearProgram, out: SolveOutcome) -> float:
    """b'y + l'z_l - u'z_u over finite bounds (LP dual value)."""
    val = float(lp.b @ out.duals)
    fl = np.isfinite(lp.lower)
    fu = np.isfinite(lp.upper)
    val += float(lp.lower[fl] @ out.lower_duals[fl])
    val -= float(lp.upper[fu] @ out.upper_duals[fu])
    return val
