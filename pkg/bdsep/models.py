from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

INSIDE = "Inside"
CUT = "Cut"

NNO_NNO = "NnoNno"
NNO_SOC = "NnoSoc"
SOC_NNO = "SocNno"
SOCSOC_LINEAR = "SocSocLinear"
SOCSOC_TRS = "SocSocTrs"

# evaluation order of the separation cases
CASE_ORDER = [NNO_NNO, NNO_SOC, SOC_NNO, SOCSOC_LINEAR, SOCSOC_TRS]

CUT_TOL = 1e-12
TRS_TOL = 1e-12
TRS_MAX_ITER = 500


class TrsError(RuntimeError):
    pass


@dataclass
class TrsProblem:
    """min vᵀBv + 2bᵀv + c over the unit sphere."""

    B: np.ndarray
    b: np.ndarray
    c: float = 0.0

    @property
    def dim(self) -> int:
        return int(np.asarray(self.b).shape[0])

    def evaluate(self, v) -> float:
        v = np.asarray(v, dtype=float)
        return float(v @ self.B @ v + 2.0 * self.b @ v + self.c)


@dataclass
class TrsSolution:
    value: float
    v: np.ndarray
    mu: float
    hard_case: bool = False
    iterations: int = 0


@dataclass
class SeparationOutcome:
    kind: str
    source: Optional[str] = None
    value: Optional[float] = None
    H: Optional[np.ndarray] = None
    violation: Optional[float] = None
    witness: Optional[np.ndarray] = None
    # linear cases in units of X, SocSocTrs in units of X² (a determinant)
    case_values: Dict[str, Optional[float]] = field(default_factory=dict)

    @property
    def is_cut(self) -> bool:
        return self.kind == CUT

    def to_dict(self, include_matrix: bool = True) -> Dict:
        out = {
            "kind": self.kind,
            "source": self.source,
            "value": self.value,
            "violation": self.violation,
            "case_values": dict(self.case_values),
        }
        if self.witness is not None:
            out["witness"] = self.witness.tolist()
        if include_matrix and self.H is not None:
            out["H"] = self.H.tolist()
        return out
