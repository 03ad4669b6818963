import logging
from typing import Optional, Union

import numpy as np
import scipy.sparse as sp

from conicsolver.ipm import solve, solve_lmi
from conicsolver.models import (
    FEASIBILITY_EPS,
    INDETERMINATE,
    OPTIMAL,
    PRIMAL_INFEASIBLE,
    BlockConicProgram,
    FeasibilityResult,
    LmiProgram,
    SolverOptions,
)
from conicsolver.operators import as_csr
from jordan.algebra import identity
from jordan.models import ConeSpec, nonneg

logger = logging.getLogger(__name__)


def _decide(status: str, sol, t: float, eps: float):
    if status == OPTIMAL or sol.near_optimal():
        return t >= -eps, OPTIMAL
    return False, INDETERMINATE


def _standard_phase_one(prog: BlockConicProgram, opts: SolverOptions, eps: float) -> FeasibilityResult:
    # max t  s.t.  A(x' + t e) = b,  x' ∈ K,  t + u = 1,  u ≥ 0
    cone = prog.cone
    n_cone = cone.ambient_dim
    A = as_csr(prog.A)
    m = A.shape[0]
    e = identity(cone)
    A_cone, A_free = A[:, :n_cone], A[:, n_cone:]
    Ae = sp.csr_matrix((A_cone @ e).reshape(-1, 1))
    top = sp.hstack([A_cone, sp.csr_matrix((m, 1)), A_free, Ae])
    bottom = sp.csr_matrix(
        ([1.0, 1.0], ([0, 0], [n_cone, n_cone + 1 + prog.free_dim])),
        shape=(1, n_cone + 2 + prog.free_dim),
    )
    c = np.zeros(n_cone + 2 + prog.free_dim)
    c[-1] = -1.0
    phase = BlockConicProgram(
        cone=ConeSpec(cone.blocks + (nonneg(1),)),
        c=c,
        A=sp.vstack([top, bottom]).tocsr(),
        b=np.concatenate([np.asarray(prog.b, dtype=float), [1.0]]),
        free_dim=prog.free_dim + 1,
        name=f"{prog.name}:phase1",
    )
    sol = solve(phase, opts)
    if sol.status == PRIMAL_INFEASIBLE:
        return FeasibilityResult(False, PRIMAL_INFEASIBLE, -np.inf, witness=-sol.y[:m], solution=sol)
    t = float(sol.x[-1])
    feasible, status = _decide(sol.status, sol, t, eps)
    point = np.concatenate([sol.x[:n_cone] + t * e, sol.x[n_cone + 1:-1]])
    logger.debug("phase one t* = %.3e (%s)", t, sol.status)
    return FeasibilityResult(feasible, status, t, point=point, witness=-sol.y[:m], solution=sol)


def _lmi_phase_one(prog: LmiProgram, opts: SolverOptions, eps: float) -> FeasibilityResult:
    # max t  s.t.  f0 + F y - t e ∈ K,  1 - t ≥ 0,  G y = h
    cone = prog.cone
    n_s = cone.ambient_dim
    m = prog.n_vars
    e = identity(cone)
    F = as_csr(prog.F)
    F_ext = sp.vstack([
        sp.hstack([F, sp.csr_matrix(-e.reshape(-1, 1))]),
        sp.csr_matrix(([-1.0], ([0], [m])), shape=(1, m + 1)),
    ]).tocsr()
    f = np.zeros(m + 1)
    f[-1] = -1.0
    G = None
    if prog.G is not None:
        G = sp.hstack([as_csr(prog.G), sp.csr_matrix((prog.G.shape[0], 1))]).tocsr()
    phase = LmiProgram(
        cone=ConeSpec(cone.blocks + (nonneg(1),)),
        f0=np.concatenate([np.asarray(prog.f0, dtype=float), [1.0]]),
        F=F_ext,
        f=f,
        G=G,
        h=prog.h,
        name=f"{prog.name}:phase1",
    )
    sol = solve_lmi(phase, opts)
    if sol.status == PRIMAL_INFEASIBLE:
        return FeasibilityResult(False, PRIMAL_INFEASIBLE, -np.inf, witness=sol.x[:n_s], solution=sol)
    t = float(sol.y[-1])
    feasible, status = _decide(sol.status, sol, t, eps)
    return FeasibilityResult(feasible, status, t, point=sol.y[:-1], witness=sol.x[:n_s], solution=sol)


def solve_feasibility(prog: Union[BlockConicProgram, LmiProgram], opts: Optional[SolverOptions] = None,
                      eps: float = FEASIBILITY_EPS) -> FeasibilityResult:
    """Phase-I feasibility of the constraints of prog; its objective is ignored.

    Feasible iff the maximal interior shift t* is at least -eps. For the
    standard form the witness is -y on the equality rows; for the LMI form it
    is the dual matrix variable.
    """
    opts = opts or SolverOptions()
    if isinstance(prog, LmiProgram):
        return _lmi_phase_one(prog, opts, eps)
    return _standard_phase_one(prog, opts, eps)
