"""
Burer lift of the mixed 0-1 SOCP to a linear program over CP(R₊^{2n+1} x Lⁿ).

Lifted coordinates of Y (order 3n+1): 0 is the homogenising entry, then
u (1..n, lower-bound slacks), v (n+1..2n, upper-bound slacks) and x (2n+1..3n).
"""

from typing import List, Tuple

import numpy as np

from gcpp.models import GcppProblem, MisocpInstance
from jordan.models import ConeSpec, nonneg, second_order


def lift_positions(n: int):
    u = np.arange(1, n + 1)
    v = np.arange(n + 1, 2 * n + 1)
    x = np.arange(2 * n + 1, 3 * n + 1)
    return u, v, x


def lifted_cone(n: int) -> ConeSpec:
    return ConeSpec.of(nonneg(2 * n + 1), second_order(n))


def _linear_system(inst: MisocpInstance) -> Tuple[np.ndarray, np.ndarray]:
    """Rows ã of x - u = 0 and x + v = ub over z = (u, v, x)."""
    n = inst.n
    eye = np.eye(n)
    zero = np.zeros((n, n))
    A = np.vstack([np.hstack([-eye, zero, eye]), np.hstack([zero, eye, eye])])
    b = np.concatenate([np.zeros(n), inst.upper_bounds])
    return A, b


def burer_reformulate(inst: MisocpInstance) -> GcppProblem:
    n = inst.n
    order = 3 * n + 1
    _, _, xpos = lift_positions(n)
    constraints: List[Tuple[np.ndarray, float]] = []

    E00 = np.zeros((order, order))
    E00[0, 0] = 1.0
    constraints.append((E00, 1.0))

    A_lin, b_lin = _linear_system(inst)
    for a, bi in zip(A_lin, b_lin):
        row = np.concatenate([[0.0], a])
        M = 0.5 * (np.outer(np.eye(order)[0], row) + np.outer(row, np.eye(order)[0]))
        constraints.append((M, float(bi)))
    for a, bi in zip(A_lin, b_lin):
        row = np.concatenate([[0.0], a])
        constraints.append((np.outer(row, row), float(bi * bi)))

    for j in inst.binary_positions:
        p = xpos[j]
        M = np.zeros((order, order))
        M[p, p] = -1.0
        M[0, p] = M[p, 0] = 0.5
        constraints.append((M, 0.0))

    C = np.zeros((order, order))
    C[0, xpos] = C[xpos, 0] = 0.5 * inst.c
    return GcppProblem(order=order, C=C, constraints=constraints, cone=lifted_cone(n), instance=inst)


def rank_one_lift(inst: MisocpInstance, x) -> np.ndarray:
    """(1, z)(1, z)ᵀ for z = (x, ub - x, x)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (inst.n,):
        raise ValueError(f"point has shape {x.shape}, expected ({inst.n},)")
    w = np.concatenate([[1.0], x, inst.upper_bounds - x, x])
    return np.outer(w, w)
