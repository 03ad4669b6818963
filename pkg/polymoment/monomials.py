from collections import defaultdict
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb
from typing import Dict, Tuple

import numpy as np

from polymoment.models import BASIS_CAP, BasisTooLarge, Form, MonomialBasis


def basis_size(n: int, m: int) -> int:
    return comb(n + m - 1, m)


@lru_cache(maxsize=64)
def enumerate_monomials(n: int, m: int, cap: int = BASIS_CAP) -> MonomialBasis:
    """All exponents of total degree m in n variables, graded-lex descending."""
    if n < 1 or m < 0:
        raise ValueError(f"invalid monomial basis I({n},{m})")
    size = basis_size(n, m)
    if size > cap:
        raise BasisTooLarge(f"|I({n},{m})| = {size} exceeds the cap {cap}")
    basis = MonomialBasis(n=n, m=m)
    for combo in combinations_with_replacement(range(n), m):
        alpha = [0] * n
        for i in combo:
            alpha[i] += 1
        alpha = tuple(alpha)
        basis.index[alpha] = len(basis.monomials)
        basis.monomials.append(alpha)
    return basis


def _quadratic_terms(Q: np.ndarray) -> Dict[Tuple[int, int], float]:
    terms = {}
    rows, cols = np.nonzero(Q)
    for a, b in zip(rows, cols):
        if a > b:
            continue
        val = Q[a, b] if a == b else Q[a, b] + Q[b, a]
        if val != 0:
            terms[(a, b)] = float(val)
    return terms


def multiply_quadratics(Q_I: np.ndarray, Q_J: np.ndarray) -> Form:
    """Coefficients of (xᵀ Q_I x)(xᵀ Q_J x) over I(n, 4)."""
    Q_I = np.asarray(Q_I, dtype=float)
    Q_J = np.asarray(Q_J, dtype=float)
    if Q_I.shape != Q_J.shape or Q_I.shape[0] != Q_I.shape[1]:
        raise ValueError("quadratic forms must be square and of equal size")
    n = Q_I.shape[0]
    basis = enumerate_monomials(n, 4)
    coeffs = np.zeros(len(basis))
    acc = defaultdict(float)
    left, right = _quadratic_terms(Q_I), _quadratic_terms(Q_J)
    for (a, b), u in left.items():
        for (c, d), v in right.items():
            acc[tuple(sorted((a, b, c, d)))] += u * v
    for combo, val in acc.items():
        alpha = [0] * n
        for i in combo:
            alpha[i] += 1
        coeffs[basis.position(tuple(alpha))] += val
    return Form(n=n, degree=4, coeffs=coeffs)


def multiply_by_norm_power(theta: Form, r: int) -> Form:
    """Coefficients of (Σ x_i²)^r · θ."""
    if r < 0:
        raise ValueError("power must be nonnegative")
    current = theta
    for _ in range(r):
        source = enumerate_monomials(current.n, current.degree)
        target = enumerate_monomials(current.n, current.degree + 2)
        coeffs = np.zeros(len(target))
        for alpha, val in zip(source.monomials, current.coeffs):
            if val == 0:
                continue
            for i in range(current.n):
                beta = list(alpha)
                beta[i] += 2
                coeffs[target.position(tuple(beta))] += val
        current = Form(n=current.n, degree=current.degree + 2, coeffs=coeffs)
    return current


def evaluate_form(theta: Form, x) -> float:
    x = np.asarray(x, dtype=float)
    E = enumerate_monomials(theta.n, theta.degree).exponents()
    return float(np.prod(x[None, :] ** E, axis=1) @ theta.coeffs)


def point_moments(x, degree: int = 4) -> np.ndarray:
    """Monomial moment vector of the Dirac measure at x."""
    x = np.asarray(x, dtype=float)
    E = enumerate_monomials(x.shape[0], degree).exponents()
    return np.prod(x[None, :] ** E, axis=1)
