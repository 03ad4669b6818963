from dataclasses import dataclass, field, fields
from typing import Any, Dict, Optional

import numpy as np
import yaml

from jordan.models import ConeSpec

GAP_TOL = 1e-8
FEAS_TOL = 1e-8
INFEAS_TOL = 1e-8
NEAR_OPTIMAL_TOL = 1e-6
STALL_ITERS = 5
MAX_ITER = 200
DIVERGENCE_NORM = 1e10
FEASIBILITY_EPS = 1e-7
SCHUR_CHUNK = 256

OPTIMAL = "Optimal"
PRIMAL_INFEASIBLE = "PrimalInfeasible"
DUAL_INFEASIBLE = "DualInfeasible"
MAX_ITERATIONS = "MaxIter"
NUMERICAL = "Numerical"
INDETERMINATE = "Indeterminate"

STATUSES = [OPTIMAL, PRIMAL_INFEASIBLE, DUAL_INFEASIBLE, MAX_ITERATIONS, NUMERICAL]


class SolverError(RuntimeError):
    pass


@dataclass
class SolverOptions:
    gap_tol: float = GAP_TOL
    feas_tol: float = FEAS_TOL
    infeas_tol: float = INFEAS_TOL
    max_iter: int = MAX_ITER
    refine_steps: int = 2
    schur_chunk: int = SCHUR_CHUNK
    init: str = "scaled-identity"
    near_optimal_tol: float = NEAR_OPTIMAL_TOL
    stall_iters: int = STALL_ITERS

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> "SolverOptions":
        data = data or {}
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown solver option(s): {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path: str) -> "SolverOptions":
        with open(path) as fh:
            try:
                data = yaml.safe_load(fh)
            except yaml.YAMLError as exc:
                raise ValueError(f"{path}: failed to parse options: {exc}")
        return cls.from_dict(data)


@dataclass
class BlockConicProgram:
    """min cᵀx  s.t.  Ax = b,  x[:cone.ambient_dim] ∈ cone,  trailing free_dim entries free.

    A may be a dense array or any scipy.sparse matrix.
    """

    cone: ConeSpec
    c: np.ndarray
    A: Any
    b: np.ndarray
    free_dim: int = 0
    name: str = ""

    @property
    def n_vars(self) -> int:
        return self.cone.ambient_dim + self.free_dim

    def validate(self):
        c = np.asarray(self.c, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if c.shape != (self.n_vars,):
            raise SolverError(f"objective has length {c.shape}, expected {self.n_vars}")
        if self.A.shape != (b.shape[0], self.n_vars):
            raise SolverError(f"constraint operator has shape {self.A.shape}, expected ({b.shape[0]}, {self.n_vars})")
        if not np.all(np.isfinite(b)) or not np.all(np.isfinite(c)):
            raise SolverError("program data must be finite")


@dataclass
class LmiProgram:
    """min fᵀy  s.t.  f0 + F y ∈ cone,  G y = h."""

    cone: ConeSpec
    f0: np.ndarray
    F: Any
    f: np.ndarray
    G: Optional[Any] = None
    h: Optional[np.ndarray] = None
    name: str = ""

    @property
    def n_vars(self) -> int:
        return int(np.asarray(self.f).shape[0])

    def validate(self):
        if self.F.shape != (self.cone.ambient_dim, self.n_vars):
            raise SolverError(f"LMI operator has shape {self.F.shape}, expected ({self.cone.ambient_dim}, {self.n_vars})")
        if np.asarray(self.f0).shape != (self.cone.ambient_dim,):
            raise SolverError("LMI constant term does not match the cone")
        if self.G is not None:
            h = np.asarray(self.h, dtype=float)
            if self.G.shape != (h.shape[0], self.n_vars):
                raise SolverError(f"equality block has shape {self.G.shape}, expected ({h.shape[0]}, {self.n_vars})")


@dataclass
class Solution:
    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    status: str
    primal_objective: float = float("nan")
    dual_objective: float = float("nan")
    gap: float = float("nan")
    primal_residual: float = float("nan")
    dual_residual: float = float("nan")
    iterations: int = 0
    solve_time: float = 0.0

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL

    def near_optimal(self, tol: float = NEAR_OPTIMAL_TOL) -> bool:
        return max(self.gap, self.primal_residual, self.dual_residual) <= tol

    def summary(self) -> Dict:
        return {
            "status": self.status,
            "primal_objective": self.primal_objective,
            "dual_objective": self.dual_objective,
            "gap": self.gap,
            "primal_residual": self.primal_residual,
            "dual_residual": self.dual_residual,
            "iterations": self.iterations,
            "solve_time": self.solve_time,
        }


@dataclass
class FeasibilityResult:
    feasible: bool
    status: str
    t: float
    point: Optional[np.ndarray] = None
    witness: Optional[np.ndarray] = None
    solution: Optional[Solution] = field(default=None, repr=False)
