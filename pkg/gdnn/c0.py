"""
The NN moment map C₀: y ∈ R^{I(n,4)} ↦ the symmetric matrix with entries
Σ_δ coeff_δ((xᵀQ_I x)(xᵀQ_J x)) y_δ, where xᵀQ_I x is the I-th coordinate
of the Jordan square x∘x. Its adjoint sends A to the coefficients p_A of
(x∘x)ᵀA(x∘x).
"""

from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from gdnn.models import Unsupported
from jordan.models import NONNEG, SOC, ConeSpec
from jordan.quadforms import square_quadratic_forms
from polymoment.models import Form, MomentVector
from polymoment.monomials import enumerate_monomials, multiply_quadratics


@lru_cache(maxsize=16)
def c0_operator(spec: ConeSpec) -> sp.csr_matrix:
    """Sparse K with vec(C₀(y)) = K y (row-major vec, shape n² x |I(n,4)|)."""
    n = spec.ambient_dim
    table = square_quadratic_forms(spec)
    width = len(enumerate_monomials(n, 4))
    rows, cols, vals = [], [], []
    for I in range(n):
        for J in range(I, n):
            coeffs = multiply_quadratics(table[I], table[J]).coeffs
            nz = np.flatnonzero(coeffs)
            for r in {I * n + J, J * n + I}:
                rows.extend([r] * nz.size)
                cols.extend(nz.tolist())
                vals.extend(coeffs[nz].tolist())
    return sp.csr_matrix((vals, (rows, cols)), shape=(n * n, width))


@lru_cache(maxsize=16)
def c0_upper_operator(spec: ConeSpec) -> sp.csr_matrix:
    """Rows of c0_operator for the upper triangle I <= J only."""
    n = spec.ambient_dim
    I, J = np.triu_indices(n)
    return c0_operator(spec)[I * n + J]


def nn_c0(spec: ConeSpec, y) -> np.ndarray:
    n = spec.ambient_dim
    values = np.asarray(y.y if isinstance(y, MomentVector) else y, dtype=float)
    K = c0_operator(spec)
    if values.shape != (K.shape[1],):
        raise ValueError(f"moment vector has length {values.shape}, expected ({K.shape[1]},)")
    return (K @ values).reshape(n, n)


def c0_adjoint(spec: ConeSpec, A) -> Form:
    """p_A: coefficients of (x∘x)ᵀ A (x∘x) over I(n, 4)."""
    A = spec.check_matrix(A, "A")
    K = c0_operator(spec)
    coeffs = K.T @ A.reshape(-1)
    return Form(n=spec.ambient_dim, degree=4, coeffs=np.asarray(coeffs).ravel())


def nn_c0_closed_form(spec: ConeSpec, y) -> np.ndarray:
    """Entrywise formula for nonnegative and second-order blocks, independent of c0_operator."""
    if spec.has_psd:
        raise Unsupported("the closed-form C₀ covers nonnegative and second-order blocks only")
    n = spec.ambient_dim
    basis = enumerate_monomials(n, 4)
    values = np.asarray(y.y if isinstance(y, MomentVector) else y, dtype=float)

    def Y(*terms):
        alpha = [0] * n
        for index, power in terms:
            alpha[index] += power
        return values[basis.position(tuple(alpha))]

    # role of each coordinate: ("nno", None), ("lead", h) or ("tail", h)
    role = {}
    block_members = {}
    for h, block in enumerate(spec.blocks):
        idx = spec.block_indices(h)
        if block.kind == NONNEG:
            role.update({i: ("nno", None) for i in idx})
        elif block.kind == SOC:
            block_members[h] = idx
            role[idx[0]] = ("lead", h)
            role.update({i: ("tail", h) for i in idx[1:]})

    def entry(I, J):
        kind_i, g = role[I]
        kind_j, h = role[J]
        if kind_i == "nno" and kind_j == "nno":
            return Y((I, 2), (J, 2))
        if kind_i == "nno" and kind_j == "lead":
            return sum(Y((I, 2), (K, 2)) for K in block_members[h])
        if kind_i == "nno" and kind_j == "tail":
            return 2.0 * Y((I, 2), (block_members[h][0], 1), (J, 1))
        if kind_i == "lead" and kind_j == "lead":
            return sum(Y((K, 2), (L, 2)) for K in block_members[g] for L in block_members[h])
        if kind_i == "lead" and kind_j == "tail":
            return sum(2.0 * Y((K, 2), (block_members[h][0], 1), (J, 1)) for K in block_members[g])
        if kind_i == "tail" and kind_j == "tail":
            return 4.0 * Y((block_members[g][0], 1), (I, 1), (block_members[h][0], 1), (J, 1))
        return entry(J, I)

    C = np.zeros((n, n))
    for I in range(n):
        for J in range(I, n):
            C[I, J] = C[J, I] = entry(I, J)
    return C
