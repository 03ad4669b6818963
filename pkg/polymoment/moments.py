import logging
from functools import lru_cache
from typing import Optional, Union

import numpy as np
import scipy.sparse as sp

from conicsolver.feasibility import solve_feasibility
from conicsolver.models import INDETERMINATE, BlockConicProgram, SolverError, SolverOptions
from jordan.algebra import smat, svec, svec_layout
from jordan.models import ConeSpec, psd
from polymoment.models import (
    FEASIBILITY_EPS,
    Form,
    GramCertificate,
    MomentVector,
    SosInfeasible,
)
from polymoment.monomials import enumerate_monomials

logger = logging.getLogger(__name__)


@lru_cache(maxsize=32)
def moment_index(n: int, m: int) -> np.ndarray:
    """Position of α+α′ in I(n, 2m) for every pair (α, α′) of I(n, m)."""
    half = enumerate_monomials(n, m)
    full = enumerate_monomials(n, 2 * m)
    E = half.exponents()
    idx = np.empty((len(half), len(half)), dtype=int)
    for a in range(len(half)):
        for b in range(a, len(half)):
            pos = full.position(tuple(E[a] + E[b]))
            idx[a, b] = idx[b, a] = pos
    return idx


@lru_cache(maxsize=32)
def moment_operator(n: int, m: int) -> sp.csr_matrix:
    """Sparse F with svec(M_{n,2m}(y)) = F y; Fᵀ maps svec(G) to the coefficients of mᵀGm."""
    idx = moment_index(n, m)
    rows, cols, scale = svec_layout(idx.shape[0])
    full = enumerate_monomials(n, 2 * m)
    return sp.csr_matrix(
        (scale, (np.arange(rows.size), idx[rows, cols])),
        shape=(rows.size, len(full)),
    )


def moment_matrix(y: Union[MomentVector, np.ndarray], n: Optional[int] = None) -> np.ndarray:
    if isinstance(y, MomentVector):
        n, degree, values = y.n, y.degree, np.asarray(y.y, dtype=float)
    else:
        values, degree = np.asarray(y, dtype=float), 4
    if degree % 2:
        raise ValueError("moment matrices need an even degree")
    idx = moment_index(n, degree // 2)
    return values[idx]


def gram_form(G: np.ndarray, n: int) -> Form:
    """Coefficients of m(x)ᵀ G m(x) for the degree-m monomial vector m(x)."""
    size = G.shape[0]
    m = next(k for k in range(0, 64) if len(enumerate_monomials(n, k)) == size)
    coeffs = moment_operator(n, m).T @ svec(G)
    return Form(n=n, degree=2 * m, coeffs=np.asarray(coeffs).ravel())


def sos_decompose(theta: Form, tol: float = FEASIBILITY_EPS,
                  opts: Optional[SolverOptions] = None) -> Union[GramCertificate, SosInfeasible]:
    """Gram certificate for θ, or a moment witness y with M(y) ⪰ 0 and yᵀθ < 0."""
    if theta.degree % 2:
        raise ValueError("only even-degree forms can be sums of squares")
    m = theta.degree // 2
    basis = enumerate_monomials(theta.n, m)
    F = moment_operator(theta.n, m)
    coeffs = np.asarray(theta.coeffs, dtype=float)
    scale = float(np.max(np.abs(coeffs))) if coeffs.size else 0.0
    if scale == 0.0:
        return GramCertificate(gram=np.zeros((len(basis), len(basis))), residual=0.0, basis=basis)

    prog = BlockConicProgram(
        cone=ConeSpec.of(psd(len(basis))),
        c=np.zeros(F.shape[0]),
        A=F.T.tocsr(),
        b=coeffs / scale,
        name=f"sos:n={theta.n},deg={theta.degree}",
    )
    result = solve_feasibility(prog, opts, eps=tol)
    if result.status == INDETERMINATE:
        raise SolverError(f"SOS feasibility solve ended with {result.solution.status}")
    logger.debug("sos phase one t* = %.3e", result.t)

    if result.feasible:
        G = smat(result.point) * scale
        residual = float(np.max(np.abs(F.T @ svec(G) - coeffs)))
        return GramCertificate(gram=G, residual=residual, basis=basis, margin=result.t)

    witness = np.asarray(result.witness, dtype=float)
    norm = np.linalg.norm(witness)
    if norm > 0:
        witness = witness / norm
    return SosInfeasible(
        witness=MomentVector(n=theta.n, y=witness, degree=theta.degree),
        margin=result.t,
    )
