from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

BASIS_CAP = 10**6
FEASIBILITY_EPS = 1e-7
GRAM_TOL = 1e-6

MultiIndex = Tuple[int, ...]


class BasisTooLarge(ValueError):
    pass


@dataclass
class MonomialBasis:
    n: int
    m: int
    monomials: List[MultiIndex] = field(default_factory=list)
    index: Dict[MultiIndex, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.monomials)

    def position(self, alpha: MultiIndex) -> int:
        return self.index[tuple(alpha)]

    def exponents(self) -> np.ndarray:
        return np.array(self.monomials, dtype=int).reshape(len(self.monomials), self.n)


def _key(alpha: MultiIndex) -> str:
    return "(" + ",".join(str(a) for a in alpha) + ")"


def _parse_key(key: str) -> MultiIndex:
    return tuple(int(a) for a in key.strip("()").split(",") if a.strip())


@dataclass
class Form:
    n: int
    degree: int
    coeffs: np.ndarray

    def to_dict(self) -> Dict:
        from polymoment.monomials import enumerate_monomials

        basis = enumerate_monomials(self.n, self.degree)
        return {
            "n": self.n,
            "degree": self.degree,
            "coeffs": {_key(alpha): float(v) for alpha, v in zip(basis.monomials, self.coeffs) if v != 0},
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "Form":
        from polymoment.monomials import enumerate_monomials

        n, degree = int(data["n"]), int(data["degree"])
        basis = enumerate_monomials(n, degree)
        coeffs = np.zeros(len(basis))
        for key, value in data.get("coeffs", {}).items():
            alpha = _parse_key(key)
            if len(alpha) != n or sum(alpha) != degree:
                raise ValueError(f"monomial {key} does not belong to I({n},{degree})")
            coeffs[basis.position(alpha)] = float(value)
        return cls(n=n, degree=degree, coeffs=coeffs)


@dataclass
class MomentVector:
    n: int
    y: np.ndarray
    degree: int = 4

    def to_dict(self) -> Dict:
        return Form(self.n, self.degree, self.y).to_dict()

    @classmethod
    def from_dict(cls, data: Dict) -> "MomentVector":
        form = Form.from_dict(data)
        return cls(n=form.n, y=form.coeffs, degree=form.degree)


@dataclass
class GramCertificate:
    gram: np.ndarray
    residual: float
    basis: Optional[MonomialBasis] = None
    margin: float = 0.0

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.gram)[0])


@dataclass
class SosInfeasible:
    witness: MomentVector
    margin: float
