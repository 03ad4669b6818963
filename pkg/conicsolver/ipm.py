"""
Primal-dual interior-point method for block-conic programs.

    (P)  min cᵀx  s.t.  Ax = b,  x ∈ K
    (D)  max bᵀy  s.t.  Aᵀy + s = c,  s ∈ K

Infeasible-start path following with Nesterov-Todd scaling and Mehrotra's
predictor-corrector. Every cone operation goes through the jordan kernel, so
nonnegative, second-order and PSD blocks share one code path.
"""

import logging
import time
from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from conicsolver.models import (
    DIVERGENCE_NORM,
    DUAL_INFEASIBLE,
    MAX_ITERATIONS,
    NUMERICAL,
    OPTIMAL,
    PRIMAL_INFEASIBLE,
    BlockConicProgram,
    LmiProgram,
    Solution,
    SolverError,
    SolverOptions,
)
from conicsolver.operators import ConstraintMap, as_csr
from jordan.algebra import (
    identity,
    in_cone,
    in_interior,
    jordan_divide,
    jordan_product,
    max_step,
    nt_scaling_point,
    quadratic_representation,
    spectral_map,
)
from jordan.models import ConeSpec, nonneg

logger = logging.getLogger(__name__)

REGULARIZATION_STEPS = [0.0, 1e-14, 1e-12, 1e-10, 1e-8]
EIGEN_FLOOR = 1e-14
INTERIOR_RTOL = 64 * np.finfo(float).eps
BACKTRACK = 0.8
MIN_STEP = 1e-10
NUMERIC_ERRORS = (la.LinAlgError, FloatingPointError, ValueError)


@dataclass
class _Iterate:
    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    pobj: float
    dobj: float
    gap: float
    pinf: float
    dinf: float
    it: int

    @property
    def score(self) -> float:
        return max(self.gap, self.pinf, self.dinf)


def _factor(M: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """Solver for M dy = r: Cholesky with escalating shifts, then a floored eigensolve."""
    if not np.all(np.isfinite(M)):
        raise FloatingPointError("Schur complement has non-finite entries")
    scale = max(float(np.max(np.abs(np.diag(M)))) if M.size else 1.0, 1.0)
    eye = np.eye(M.shape[0])
    for reg in REGULARIZATION_STEPS:
        try:
            factor = la.cho_factor(M + reg * scale * eye, check_finite=False)
        except la.LinAlgError:
            continue
        if reg > 0:
            logger.debug("Schur complement regularized with %.1e", reg)
        return lambda r, f=factor: la.cho_solve(f, r, check_finite=False)
    logger.warning("Schur complement is not positive definite; using a floored eigensolve")
    d, Q = la.eigh(M, check_finite=False)
    d = np.maximum(d, EIGEN_FLOOR * scale)
    return lambda r: Q @ ((Q.T @ r) / d)


def _solve_schur(M: np.ndarray, solver, rhs: np.ndarray, refine: int) -> np.ndarray:
    dy = solver(rhs)
    for _ in range(refine):
        dy = dy + solver(rhs - M @ dy)
    return dy


def _starting_point(cone: ConeSpec, c: np.ndarray, A: ConstraintMap, b: np.ndarray):
    rank = max(cone.rank, 1)
    norms = A.row_norms() if A.shape[0] else np.zeros(0)
    xi, eta = max(10.0, np.sqrt(rank)), max(10.0, np.sqrt(rank))
    if norms.size:
        xi = max(xi, np.sqrt(rank) * float(np.max((1.0 + np.abs(b)) / (1.0 + norms))))
        eta = max(eta, float(np.max(norms)))
    eta = max(eta, float(np.linalg.norm(c)))
    e = identity(cone)
    return xi * e, np.zeros(A.shape[0]), eta * e


def _interior_step(cone: ConeSpec, v: np.ndarray, d: np.ndarray, alpha: float) -> Tuple[np.ndarray, float]:
    # shorten the step until v + alpha d is safely inside the cone
    while alpha >= MIN_STEP:
        trial = v + alpha * d
        if in_interior(cone, trial, INTERIOR_RTOL):
            return trial, alpha
        alpha *= BACKTRACK
    raise FloatingPointError(f"step length collapsed below {MIN_STEP:.0e}")


def _step(cone: ConeSpec, A: ConstraintMap, x, y, s, rp, rd, mu: float, opts: SolverOptions):
    """One Mehrotra predictor-corrector step from the interior pair (x, s)."""
    m = A.shape[0]
    rank = max(cone.rank, 1)
    e = identity(cone)
    w = nt_scaling_point(cone, x, s)
    w_half = spectral_map(cone, w, np.sqrt)
    w_inv_half = spectral_map(cone, w, lambda t: 1.0 / np.sqrt(t))
    lam = quadratic_representation(cone, w_half, s)
    if m:
        M = A.schur(w)
        solver = _factor(M)
    H_rd = quadratic_representation(cone, w, rd)

    def direction(rc):
        rho = jordan_divide(cone, lam, rc)
        g_rho = quadratic_representation(cone, w_half, rho)
        if m:
            rhs = rp - A.matvec(g_rho) + A.matvec(H_rd)
            dy = _solve_schur(M, solver, rhs, opts.refine_steps)
        else:
            dy = np.zeros(0)
        ds = rd - A.rmatvec(dy)
        dx = g_rho - quadratic_representation(cone, w, ds)
        return dx, dy, ds

    lam_sq = jordan_product(cone, lam, lam)
    dx_a, dy_a, ds_a = direction(-lam_sq)
    ap_a = min(1.0, max_step(cone, x, dx_a))
    ad_a = min(1.0, max_step(cone, s, ds_a))
    mu_aff = float((x + ap_a * dx_a) @ (s + ad_a * ds_a)) / rank
    sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3 if mu > 0 else 0.0

    second_order = jordan_product(
        cone,
        quadratic_representation(cone, w_inv_half, dx_a),
        quadratic_representation(cone, w_half, ds_a),
    )
    dx, dy, ds = direction(sigma * mu * e - lam_sq - second_order)
    if not (np.all(np.isfinite(dx)) and np.all(np.isfinite(dy)) and np.all(np.isfinite(ds))):
        raise FloatingPointError("non-finite search direction")

    fraction = 0.9 + 0.09 * min(ap_a, ad_a)
    x_new, _ = _interior_step(cone, x, dx, min(1.0, fraction * max_step(cone, x, dx)))
    s_new, ad = _interior_step(cone, s, ds, min(1.0, fraction * max_step(cone, s, ds)))
    return x_new, y + ad * dy, s_new


def _solve_core(cone: ConeSpec, c: np.ndarray, A: ConstraintMap, b: np.ndarray,
                opts: SolverOptions, free_pairs: Optional[Tuple[np.ndarray, np.ndarray]] = None) -> Solution:
    started = time.perf_counter()
    m = A.shape[0]
    rank = max(cone.rank, 1)
    nb, nc = 1.0 + np.linalg.norm(b), 1.0 + np.linalg.norm(c)
    # work with unit-norm rows; y is mapped back on return
    row_scale = A.equilibrate() if m else np.zeros(0)
    b = row_scale * b
    x, y, s = _starting_point(cone, c, A, b)
    status = MAX_ITERATIONS
    current = best = None
    since_best = 0
    it = 0

    for it in range(opts.max_iter + 1):
        Ax, ATy = A.matvec(x), A.rmatvec(y)
        rp, rd = b - Ax, c - ATy - s
        pobj, dobj = float(c @ x), float(b @ y)
        comp = float(x @ s)
        mu = comp / rank
        pinf = np.linalg.norm(rp / row_scale) / nb if m else 0.0
        dinf = np.linalg.norm(rd) / nc
        gap = max(abs(pobj - dobj), comp) / (1.0 + abs(pobj) + abs(dobj))
        logger.debug("iter %3d pobj %.8e dobj %.8e gap %.1e pinf %.1e dinf %.1e",
                     it, pobj, dobj, gap, pinf, dinf)
        current = _Iterate(x, y, s, pobj, dobj, float(gap), float(pinf), float(dinf), it)
        if best is None or current.score < best.score:
            best, since_best = current, 0
        else:
            since_best += 1

        if pinf <= opts.feas_tol and dinf <= opts.feas_tol and gap <= opts.gap_tol:
            status = OPTIMAL
            break
        diverging = max(np.linalg.norm(x), np.linalg.norm(y), np.linalg.norm(s)) > DIVERGENCE_NORM
        cert_tol = opts.infeas_tol if not diverging else max(opts.infeas_tol, 1e-6)
        if dobj > 0 and np.linalg.norm(ATy + s) / dobj <= cert_tol:
            status = PRIMAL_INFEASIBLE
            break
        if pobj < 0 and np.linalg.norm(Ax) / (-pobj) <= cert_tol:
            status = DUAL_INFEASIBLE
            break
        if diverging:
            status = NUMERICAL
            break
        if it == opts.max_iter:
            status = MAX_ITERATIONS
            break
        if best.score <= opts.near_optimal_tol and since_best >= opts.stall_iters:
            logger.info("no progress in %d iterations", since_best)
            status = NUMERICAL
            break

        try:
            with np.errstate(invalid="raise", divide="raise", over="raise"):
                x, y, s = _step(cone, A, x, y, s, rp, rd, mu, opts)
        except NUMERIC_ERRORS as exc:
            logger.warning("numerical failure at iteration %d: %s", it, exc)
            status = NUMERICAL
            break

        if free_pairs is not None:
            plus, minus = free_pairs
            shift = 0.8 * np.minimum(x[plus], x[minus])
            x[plus] -= shift
            x[minus] -= shift

    final = current
    if status in (NUMERICAL, MAX_ITERATIONS) and best is not None:
        final = best
        if best.score <= opts.near_optimal_tol:
            logger.warning("%s at iteration %d; accepting iterate %d at reduced accuracy %.1e",
                           status, it, best.it, best.score)
            status = OPTIMAL
    logger.info("%s after %d iterations (pobj %.6e, dobj %.6e)", status, it, final.pobj, final.dobj)
    return Solution(
        x=final.x, y=row_scale * final.y, s=final.s, status=status,
        primal_objective=final.pobj, dual_objective=final.dobj, gap=final.gap,
        primal_residual=final.pinf, dual_residual=final.dinf,
        iterations=it, solve_time=time.perf_counter() - started,
    )


def _solve_standard(prog: BlockConicProgram, opts: SolverOptions) -> Solution:
    prog.validate()
    cone = prog.cone
    n_cone = cone.ambient_dim
    A = as_csr(prog.A)
    c = np.asarray(prog.c, dtype=float)
    b = np.asarray(prog.b, dtype=float)
    free = prog.free_dim
    free_pairs = None
    if free:
        A_cone, A_free = A[:, :n_cone], A[:, n_cone:]
        A = sp.hstack([A_cone, A_free, -A_free]).tocsr()
        c = np.concatenate([c[:n_cone], c[n_cone:], -c[n_cone:]])
        cone = ConeSpec(cone.blocks + (nonneg(2 * free),))
        plus = np.arange(n_cone, n_cone + free)
        free_pairs = (plus, plus + free)

    op = ConstraintMap(A, cone, chunk=opts.schur_chunk)
    sol = _solve_core(cone, c, op, b, opts, free_pairs)
    if free:
        x_plus = sol.x[n_cone:n_cone + free]
        x_minus = sol.x[n_cone + free:]
        sol.x = np.concatenate([sol.x[:n_cone], x_plus - x_minus])
        sol.s = sol.s[:n_cone + free]
    return sol


def eliminate_equalities(G, h, tol: float = 1e-10):
    """Particular solution y0 and orthonormal nullspace basis N of G y = h.

    Returns (y0, N, consistent).
    """
    G = G.toarray() if sp.issparse(G) else np.atleast_2d(np.asarray(G, dtype=float))
    h = np.asarray(h, dtype=float)
    m = G.shape[1]
    Q, R, _ = la.qr(G.T, mode="full", pivoting=True)
    diag = np.abs(np.diag(R)) if R.size else np.zeros(0)
    rank = int(np.sum(diag > tol * max(diag[0], 1.0))) if diag.size else 0
    N = Q[:, rank:m]
    y0 = la.lstsq(G, h)[0]
    consistent = np.linalg.norm(G @ y0 - h) <= 1e-9 * (1.0 + np.linalg.norm(h))
    return y0, N, consistent


def solve_lmi(prog: LmiProgram, opts: Optional[SolverOptions] = None) -> Solution:
    """Solve min fᵀy s.t. f0 + F y ∈ K, G y = h by nullspace elimination.

    The returned Solution carries the decision vector in ``y``, the slack
    f0 + F y in ``s`` and the dual (matrix) variable in ``x``.
    """
    opts = opts or SolverOptions()
    prog.validate()
    cone = prog.cone
    F = as_csr(prog.F)
    f0 = np.asarray(prog.f0, dtype=float)
    f = np.asarray(prog.f, dtype=float)
    m = prog.n_vars

    if prog.G is not None and np.asarray(prog.h).size:
        y0, N, consistent = eliminate_equalities(prog.G, prog.h)
        if not consistent:
            logger.info("LMI equalities are inconsistent")
            return Solution(x=np.zeros(cone.ambient_dim), y=y0, s=f0 + F @ y0, status=PRIMAL_INFEASIBLE)
    else:
        y0, N = np.zeros(m), None

    c = f0 + F @ y0
    if N is not None and N.shape[1] == 0:
        status = OPTIMAL if in_cone(cone, c, opts.feas_tol) else PRIMAL_INFEASIBLE
        return Solution(x=np.zeros(cone.ambient_dim), y=y0, s=c, status=status,
                        primal_objective=float(f @ y0), dual_objective=float(f @ y0),
                        gap=0.0, primal_residual=0.0, dual_residual=0.0)

    op = ConstraintMap(F.T, cone, nullspace=N, sign=-1.0, chunk=opts.schur_chunk)
    b_eff = -(N.T @ f) if N is not None else -f
    core = _solve_core(cone, c, op, b_eff, opts)
    y = y0 + (N @ core.y if N is not None else core.y)
    status = {PRIMAL_INFEASIBLE: DUAL_INFEASIBLE, DUAL_INFEASIBLE: PRIMAL_INFEASIBLE}.get(core.status, core.status)
    offset = float(f @ y0)
    return Solution(
        x=core.x, y=y, s=f0 + F @ y, status=status,
        primal_objective=float(f @ y), dual_objective=offset - core.primal_objective,
        gap=core.gap, primal_residual=core.dual_residual, dual_residual=core.primal_residual,
        iterations=core.iterations, solve_time=core.solve_time,
    )


def solve(prog: Union[BlockConicProgram, LmiProgram], opts: Optional[SolverOptions] = None) -> Solution:
    opts = opts or SolverOptions()
    if isinstance(prog, LmiProgram):
        return solve_lmi(prog, opts)
    if isinstance(prog, BlockConicProgram):
        return _solve_standard(prog, opts)
    raise SolverError(f"cannot solve object of type {type(prog).__name__}")


def kkt_residuals(prog: BlockConicProgram, sol: Solution) -> dict:
    A = as_csr(prog.A)
    b = np.asarray(prog.b, dtype=float)
    c = np.asarray(prog.c, dtype=float)
    n_cone = prog.cone.ambient_dim
    primal = np.linalg.norm(A @ sol.x - b, np.inf) / (1.0 + np.linalg.norm(b, np.inf)) if b.size else 0.0
    dual_res = A.T @ sol.y - c
    dual_res[:n_cone] += sol.s[:n_cone]
    dual = np.linalg.norm(dual_res, np.inf) / (1.0 + np.linalg.norm(c, np.inf))
    obj = float(c @ sol.x)
    complementarity = float(sol.x[:n_cone] @ sol.s[:n_cone]) / (1.0 + abs(obj))
    return {"primal": float(primal), "dual": float(dual), "complementarity": complementarity}
