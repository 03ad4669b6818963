import logging
from concurrent.futures import ThreadPoolExecutor
from itertools import combinations
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from conicsolver.ipm import solve
from conicsolver.models import OPTIMAL, PRIMAL_INFEASIBLE, BlockConicProgram, SolverOptions
from gcpp.models import MAX_BINARY, MAX_ONES, MisocpInstance
from jordan.algebra import in_cone
from jordan.models import ConeSpec, nonneg, second_order

logger = logging.getLogger(__name__)


def _fixings(inst: MisocpInstance):
    # x ∈ Lⁿ with x₁ ≤ 2 admits at most four tail coordinates equal to one
    positions = inst.binary_positions
    for k in range(min(len(positions), MAX_ONES) + 1):
        for ones in combinations(positions, k):
            yield {j: (1.0 if j in ones else 0.0) for j in positions}


def _branch_program(inst: MisocpInstance, fixed: Dict[int, float]) -> BlockConicProgram:
    n = inst.n
    ub = inst.upper_bounds
    free = [j for j in range(n) if j not in fixed]
    lower = [j for j in free if j > 0]
    n_slack = len(free) + len(lower)
    rows, cols, vals, b = [], [], [], []

    def add_row(entries, rhs):
        r = len(b)
        for col, val in entries:
            rows.append(r)
            cols.append(col)
            vals.append(val)
        b.append(rhs)

    for j, value in sorted(fixed.items()):
        add_row([(j, 1.0)], value)
    for k, j in enumerate(free):
        add_row([(j, 1.0), (n + k, 1.0)], ub[j])
    for k, j in enumerate(lower):
        add_row([(j, 1.0), (n + len(free) + k, -1.0)], 0.0)

    blocks = (second_order(n),) + ((nonneg(n_slack),) if n_slack else ())
    return BlockConicProgram(
        cone=ConeSpec(blocks),
        c=np.concatenate([inst.c, np.zeros(n_slack)]),
        A=sp.csr_matrix((vals, (rows, cols)), shape=(len(b), n + n_slack)),
        b=np.array(b),
        name="misocp-branch",
    )


def _solve_branch(inst: MisocpInstance, fixed: Dict[int, float],
                  opts: Optional[SolverOptions]) -> Tuple[float, Optional[np.ndarray], str]:
    ones = [j for j, v in fixed.items() if v == 1.0]
    if len(ones) == MAX_ONES:
        # ‖x_tail‖ ≥ 2 forces x₁ = 2 and every other tail coordinate to zero
        x = np.zeros(inst.n)
        x[0] = 2.0
        x[ones] = 1.0
        return float(inst.c @ x), x, OPTIMAL
    sol = solve(_branch_program(inst, fixed), opts)
    if sol.status == PRIMAL_INFEASIBLE:
        return np.inf, None, sol.status
    if sol.status != OPTIMAL and not sol.near_optimal():
        logger.warning("branch %s ended with %s", sorted(ones), sol.status)
        return np.inf, None, sol.status
    x = sol.x[: inst.n]
    return float(inst.c @ x), x, OPTIMAL


def misocp_bruteforce(inst: MisocpInstance, opts: Optional[SolverOptions] = None,
                      workers: int = 1) -> Tuple[float, Optional[np.ndarray]]:
    """Best value over every feasible binary fixing, each solved as an SOCP."""
    if len(inst.binary) > MAX_BINARY:
        raise ValueError(f"brute force supports at most {MAX_BINARY} binary variables")
    branches: List[Dict[int, float]] = list(_fixings(inst))
    logger.info("enumerating %d binary fixings for n=%d", len(branches), inst.n)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda fx: _solve_branch(inst, fx, opts), branches))
    else:
        results = [_solve_branch(inst, fx, opts) for fx in branches]

    best, argmin = np.inf, None
    for value, x, _ in results:
        if x is not None and value < best:
            best, argmin = value, x
    if argmin is not None and not in_cone(ConeSpec.of(second_order(inst.n)), argmin, 1e-6):
        logger.warning("brute-force minimiser leaves the cone by more than 1e-6")
    return best, argmin
