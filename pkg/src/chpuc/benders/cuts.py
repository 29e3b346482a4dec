"""Benders cuts, strong-cut selection and the convergence trace."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

NORMAL, STRONG, FEASIBILITY = "normal", "strong", "feasibility"
X_SPACE, H_SPACE = "X-space", "H-space"


@dataclass
class BendersCut:
    """Affine model  value(z) = constant + gradient . (z - point).

    Optimality cuts under-estimate a recourse value; feasibility cuts state
    value(z) <= 0 for every feasible z. X-space cuts live on the hour's
    (commitment, fleet count) vector, H-space cuts on (heat, commitment,
    fleet count).
    """

    space: str
    hour: int
    constant: float
    gradient: np.ndarray
    point: np.ndarray
    kind: str = NORMAL
    iteration: int = 0

    def __post_init__(self):
        self.gradient = np.asarray(self.gradient, dtype=float).ravel()
        self.point = np.asarray(self.point, dtype=float).ravel()
        if self.gradient.shape != self.point.shape:
            raise ValueError("cut gradient and anchor point differ in length")
        if not (np.all(np.isfinite(self.gradient)) and np.isfinite(self.constant)):
            raise ValueError("cut coefficients must be finite")

    def evaluate(self, z) -> float:
        return float(self.constant + self.gradient @ (np.asarray(z, dtype=float) - self.point))

    @property
    def intercept(self) -> float:
        """Constant term of the cut written as  intercept + gradient . z."""
        return float(self.constant - self.gradient @ self.point)

    def same_as(self, other: "BendersCut", tol: float = 1e-9) -> bool:
        if (self.kind == FEASIBILITY) != (other.kind == FEASIBILITY):
            return False
        scale = max(1.0, abs(self.intercept), float(np.abs(self.gradient).max(initial=0.0)))
        return (abs(self.intercept - other.intercept) <= tol * scale
                and np.allclose(self.gradient, other.gradient, rtol=0.0, atol=tol * scale))


def build_strong_cut(history: Sequence[BendersCut], point, exclude_iteration: Optional[int] = None) -> BendersCut:
    """Re-emit the past normal cut with the highest value at ``point``.

    ``exclude_iteration`` drops cuts produced in that iteration, which is
    how an infeasible current sub-problem is kept out of the comparison.
    Ties go to the earliest cut.
    """
    best, best_val = None, -np.inf
    for cut in history:
        if cut.kind != NORMAL or (exclude_iteration is not None and cut.iteration == exclude_iteration):
            continue
        v = cut.evaluate(point)
        if v > best_val:
            best, best_val = cut, v
    if best is None:
        raise ValueError("no normal cut available for a strong cut")
    return BendersCut(best.space, best.hour, best.constant, best.gradient.copy(), best.point.copy(),
                      kind=STRONG, iteration=best.iteration)


class CutPool:
    """Cuts of one space/hour with duplicate suppression."""

    def __init__(self):
        self.cuts: list[BendersCut] = []

    def add(self, cut: BendersCut) -> bool:
        if any(c.same_as(cut) for c in self.cuts):
            return False
        self.cuts.append(cut)
        return True

    @property
    def optimality(self) -> list[BendersCut]:
        return [c for c in self.cuts if c.kind != FEASIBILITY]

    @property
    def feasibility(self) -> list[BendersCut]:
        return [c for c in self.cuts if c.kind == FEASIBILITY]

    def __len__(self):
        return len(self.cuts)

    def __iter__(self):
        return iter(self.cuts)


@dataclass
class TraceRecord:
    iteration: int
    lower_bound: float
    upper_bound: float
    gap: float
    inner_iterations: list[int]
    seconds: float


@dataclass
class ConvergenceTrace:
    records: list[TraceRecord] = field(default_factory=list)
    converged: bool = False

    def append(self, rec: TraceRecord):
        self.records.append(rec)

    @property
    def lower_bounds(self) -> np.ndarray:
        return np.array([r.lower_bound for r in self.records])

    @property
    def upper_bounds(self) -> np.ndarray:
        return np.array([r.upper_bound for r in self.records])

    @property
    def final_gap(self) -> float:
        return self.records[-1].gap if self.records else float("inf")

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "LB", "UB", "gap", "seconds"])
        for r in self.records:
            w.writerow([r.iteration, f"{r.lower_bound:.6f}", f"{r.upper_bound:.6f}", f"{r.gap:.3e}",
                        f"{r.seconds:.3f}"])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    def __len__(self):
        return len(self.records)
