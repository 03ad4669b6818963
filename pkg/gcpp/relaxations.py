import logging
import time
from typing import Optional

import numpy as np
import scipy.sparse as sp

from conicsolver.ipm import kkt_residuals, solve
from conicsolver.models import OPTIMAL, BlockConicProgram, LmiProgram, SolverOptions
from gcpp.exchange import solve_bd_exchange
from gcpp.models import BD, NN, SDP, SDP_REGULARIZATION, ZVP, ExchangeParams, GcppProblem, RelaxationResult
from gdnn.c0 import c0_adjoint, nn_c0
from gdnn.membership import zvp_generators
from jordan.algebra import smat, svec, svec_layout
from jordan.models import ConeSpec, nonneg, psd
from polymoment.moments import moment_operator
from polymoment.monomials import enumerate_monomials

logger = logging.getLogger(__name__)


def _psd_program(g: GcppProblem, regularize: bool, name: str) -> BlockConicProgram:
    C = g.C + SDP_REGULARIZATION * np.eye(g.order) if regularize else g.C
    return BlockConicProgram(
        cone=ConeSpec.of(psd(g.order)),
        c=svec(C),
        A=g.constraint_rows(),
        b=g.b,
        name=name,
    )


def _zvp_program(g: GcppProblem, regularize: bool) -> BlockConicProgram:
    base = _psd_program(g, regularize, "zvp")
    L = base.cone.ambient_dim
    rows, cols, scale = svec_layout(g.order)
    position = {(int(i), int(j)): k for k, (i, j) in enumerate(zip(rows, cols))}

    gens = zvp_generators(g.cone)
    idx = gens.nonneg_index_set
    pairs = [(a, b) for k, b in enumerate(idx) for a in idx[: k + 1]]
    Js = gens.matrices()
    n_slack = len(Js) + len(pairs)

    top = sp.hstack([base.A, sp.csr_matrix((base.A.shape[0], n_slack))])
    gen_rows = sp.hstack([sp.csr_matrix(np.vstack([svec(J) for J in Js])),
                          -sp.identity(len(Js), format="csr"),
                          sp.csr_matrix((len(Js), len(pairs)))]) if Js else None
    pos = [position[(a, b)] for a, b in pairs]
    pair_Y = sp.csr_matrix((1.0 / scale[pos], (np.arange(len(pairs)), pos)), shape=(len(pairs), L))
    pair_rows = sp.hstack([pair_Y, sp.csr_matrix((len(pairs), len(Js))), -sp.identity(len(pairs), format="csr")])

    parts = [top] + ([gen_rows] if gen_rows is not None else []) + [pair_rows]
    return BlockConicProgram(
        cone=ConeSpec.of(psd(g.order), nonneg(n_slack)),
        c=np.concatenate([base.c, np.zeros(n_slack)]),
        A=sp.vstack(parts).tocsr(),
        b=np.concatenate([base.b, np.zeros(n_slack)]),
        name="zvp",
    )


def _nn_program(g: GcppProblem) -> LmiProgram:
    F = moment_operator(g.order, 2)
    G = sp.csr_matrix(np.vstack([c0_adjoint(g.cone, A).coeffs for A, _ in g.constraints]))
    return LmiProgram(
        cone=ConeSpec.of(psd(len(enumerate_monomials(g.order, 2)))),
        f0=np.zeros(F.shape[0]),
        F=F,
        f=c0_adjoint(g.cone, g.C).coeffs,
        G=G,
        h=g.b,
        name="nn",
    )


def build_relaxation(g: GcppProblem, variant: str, regularize: Optional[bool] = None):
    """SDP, ZVP or NN relaxation of the lifted problem; 0.005·I regularises C in SDP by default."""
    if regularize is None:
        regularize = variant == SDP
    if variant == SDP:
        return _psd_program(g, regularize, "sdp")
    if variant == ZVP:
        return _zvp_program(g, regularize)
    if variant == NN:
        return _nn_program(g)
    raise ValueError(f"no single-program relaxation for variant '{variant}'")


def solve_relaxation(g: GcppProblem, variant: str, opts: Optional[SolverOptions] = None,
                     params: Optional[ExchangeParams] = None,
                     regularize: Optional[bool] = None) -> RelaxationResult:
    if variant == BD:
        start = time.perf_counter()
        value, Y, trace = solve_bd_exchange(g, params or ExchangeParams(), opts=opts)
        return RelaxationResult(BD, value, OPTIMAL, time.perf_counter() - start, Y=Y, trace=trace)

    prog = build_relaxation(g, variant, regularize)
    start = time.perf_counter()
    sol = solve(prog, opts)
    elapsed = time.perf_counter() - start

    if variant == NN:
        Y = nn_c0(g.cone, sol.y)
        kkt = {"primal": sol.primal_residual, "dual": sol.dual_residual, "gap": sol.gap}
    else:
        Y = smat(sol.x[: prog.cone.blocks[0].ambient_dim])
        kkt = kkt_residuals(prog, sol)

    ok = sol.status == OPTIMAL or sol.near_optimal()
    value = float(np.sum(g.C * Y)) if ok else float("nan")
    logger.info("%s relaxation: %s, value %.6g in %.2fs", variant, sol.status, value, elapsed)
    return RelaxationResult(variant, value, sol.status if not ok else OPTIMAL, elapsed, Y=Y, kkt=kkt)
