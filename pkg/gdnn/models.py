from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

MEMBERSHIP_TOL = 1e-7

NN = "nn"
ZVP = "zvp"
BD = "bd"
KZVP0 = "kzvp0"
KNN = "knn"

VARIANTS = [NN, ZVP, BD, KZVP0, KNN]


class Unsupported(ValueError):
    pass


@dataclass
class ZvpGenerators:
    """Extreme rays of the zero-valued-polynomial side of K_ZVP,0.

    J_list holds (block index, J_h) for every second-order block and
    Jij_list holds (block index, i, j, J_h^{ij}) for every PSD block pair i < j.
    """

    J_list: List[Tuple[int, np.ndarray]] = field(default_factory=list)
    Jij_list: List[Tuple[int, int, int, np.ndarray]] = field(default_factory=list)
    nonneg_index_set: List[int] = field(default_factory=list)

    def matrices(self) -> List[np.ndarray]:
        return [J for _, J in self.J_list] + [J for _, _, _, J in self.Jij_list]

    def labels(self) -> List[str]:
        return [f"J[{h}]" for h, _ in self.J_list] + [f"J[{h}]({i},{j})" for h, i, j, _ in self.Jij_list]


@dataclass
class MembershipResult:
    member: bool
    variant: str
    certificate: Optional[Dict[str, Any]] = None
    violation: Optional[Dict[str, Any]] = None

    def to_dict(self) -> Dict:
        def _plain(value):
            if isinstance(value, np.ndarray):
                return value.tolist()
            if isinstance(value, (np.floating, np.integer)):
                return value.item()
            return value

        return {
            "member": self.member,
            "variant": self.variant,
            "certificate": {k: _plain(v) for k, v in (self.certificate or {}).items()} or None,
            "violation": {k: _plain(v) for k, v in (self.violation or {}).items()} or None,
        }
