from dataclasses import dataclass, field, fields
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
import yaml

from jordan.algebra import svec
from jordan.models import ConeSpec

MISOCP = "misocp"
SDP = "sdp"
ZVP = "zvp"
NN = "nn"
BD = "bd"

RELAXATIONS = [SDP, ZVP, NN, BD]
SOLVE_VARIANTS = [MISOCP] + RELAXATIONS

SDP_REGULARIZATION = 0.005
MAX_BINARY = 25
MAX_ONES = 4


class ExchangeError(RuntimeError):
    pass


@dataclass
class MisocpInstance:
    """min cᵀx  s.t.  x ∈ Lⁿ, 0 ≤ x₁ ≤ 2, 0 ≤ x_i ≤ 1 (i ≥ 2), x_i ∈ {0,1} (i ∈ B).

    ``binary`` holds 1-based indices from {2, …, n}.
    """

    n: int
    c: np.ndarray
    binary: Tuple[int, ...] = ()
    seed: Optional[int] = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.binary = tuple(sorted(int(i) for i in self.binary))
        if self.n < 2:
            raise ValueError("an instance needs n >= 2")
        if self.c.shape != (self.n,):
            raise ValueError(f"objective has shape {self.c.shape}, expected ({self.n},)")
        if not np.all(np.isfinite(self.c)):
            raise ValueError("objective must be finite")
        bad = [i for i in self.binary if not 2 <= i <= self.n]
        if bad:
            raise ValueError(f"binary indices {bad} are outside {{2, …, {self.n}}}")
        if len(set(self.binary)) != len(self.binary):
            raise ValueError("binary indices must be distinct")

    @property
    def upper_bounds(self) -> np.ndarray:
        ub = np.ones(self.n)
        ub[0] = 2.0
        return ub

    @property
    def binary_positions(self) -> List[int]:
        return [i - 1 for i in self.binary]

    def to_dict(self) -> Dict:
        return {"n": self.n, "c": self.c.tolist(), "binary": list(self.binary), "seed": self.seed}

    @classmethod
    def from_dict(cls, data: Dict) -> "MisocpInstance":
        try:
            return cls(n=int(data["n"]), c=data["c"], binary=tuple(data.get("binary", [])), seed=data.get("seed"))
        except KeyError as exc:
            raise ValueError(f"instance is missing field {exc}")

    @classmethod
    def from_file(cls, path: str) -> "MisocpInstance":
        with open(path) as fh:
            try:
                data = yaml.safe_load(fh)
            except yaml.YAMLError as exc:
                raise ValueError(f"{path}: failed to parse instance: {exc}")
        return cls.from_dict(data or {})


@dataclass
class GcppProblem:
    """min ⟨C, Y⟩ s.t. ⟨A_i, Y⟩ = b_i, Y ∈ CP(cone), over Y of order 3n+1."""

    order: int
    C: np.ndarray
    constraints: List[Tuple[np.ndarray, float]]
    cone: ConeSpec
    instance: Optional[MisocpInstance] = None

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)

    @property
    def b(self) -> np.ndarray:
        return np.array([bi for _, bi in self.constraints], dtype=float)

    def constraint_rows(self) -> sp.csr_matrix:
        """Rows svec(A_i), so that row @ svec(Y) = ⟨A_i, Y⟩."""
        return sp.csr_matrix(np.vstack([svec(A) for A, _ in self.constraints]))

    def residual(self, Y) -> float:
        Y = np.asarray(Y, dtype=float)
        return float(max(abs(np.sum(A * Y) - bi) for A, bi in self.constraints))


@dataclass
class ExchangeParams:
    gamma_base: float = 0.5
    tau: float = 1e-5
    prune_tol: float = 1e-12
    n_random_idempotents: int = 1000
    accelerate_after: int = 5
    max_inner: int = 500
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.gamma_base < 1:
            raise ValueError("gamma_base must lie in (0, 1)")
        if self.tau <= 0:
            raise ValueError("tau must be positive")

    def gamma(self, k: int) -> float:
        return self.gamma_base ** k

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> "ExchangeParams":
        data = data or {}
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown exchange parameter(s): {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path: str) -> "ExchangeParams":
        with open(path) as fh:
            try:
                data = yaml.safe_load(fh)
            except yaml.YAMLError as exc:
                raise ValueError(f"{path}: failed to parse parameters: {exc}")
        return cls.from_dict(data)


@dataclass
class ExchangeTrace:
    entries: List[Dict[str, Any]] = field(default_factory=list)
    fallback_seeded: bool = False

    def record(self, outer: int, inner: int, gamma: float, active: int, objective: float, source: str):
        self.entries.append({
            "outer": outer,
            "inner": inner,
            "gamma": gamma,
            "active": active,
            "objective": objective,
            "source": source,
        })

    @property
    def objectives(self) -> List[float]:
        return [e["objective"] for e in self.entries]

    def to_dict(self) -> Dict:
        return {"fallback_seeded": self.fallback_seeded, "entries": list(self.entries)}


@dataclass
class RelaxationResult:
    variant: str
    value: float
    status: str
    time: float
    Y: Optional[np.ndarray] = None
    kkt: Optional[Dict[str, float]] = None
    trace: Optional[ExchangeTrace] = None
    message: str = ""

    def to_dict(self, include_matrix: bool = False) -> Dict:
        out = {
            "variant": self.variant,
            "value": self.value,
            "status": self.status,
            "time": self.time,
            "kkt": self.kkt,
        }
        if self.message:
            out["message"] = self.message
        if self.trace is not None:
            out["trace"] = self.trace.to_dict()
        if include_matrix and self.Y is not None:
            out["Y"] = self.Y.tolist()
        return out
