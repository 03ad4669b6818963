"""
Explicit exchange method for min ⟨C, Y⟩ over DNN_BD(K) = S₊ ∩ N(K).

The subproblem P(S) keeps Y ⪰ 0 and the cuts Ys ∈ K for the finite active set
S, each encoded as Ys - w_s = 0 with a slack w_s ∈ K so that its multiplier v_s
can be read off the dual. The shift γ_k = base^k relaxes the cut search to
λ_min(Ys) + γ_k < 0; the method stops once γ_k ≤ τ and no cut is violated.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from bdsep.models import CUT
from bdsep.oracle import separate
from conicsolver.ipm import solve
from conicsolver.models import OPTIMAL, BlockConicProgram, SolverOptions
from gcpp.models import ExchangeError, ExchangeParams, ExchangeTrace, GcppProblem
from jordan.algebra import min_eigenvalue_batch, sample_primitive_idempotent, smat, svec, svec_layout
from jordan.models import NONNEG, SOC, ConeSpec, psd

logger = logging.getLogger(__name__)

JFIX = "Jfix"
SEED = "seed"


@dataclass
class _Cut:
    s: np.ndarray
    permanent: bool = False


def cut_operator(order: int, s: np.ndarray) -> sp.csr_matrix:
    """Matrix of svec(Y) ↦ Y s."""
    rows, cols, scale = svec_layout(order)
    k = np.arange(rows.size)
    off = rows != cols
    r = np.concatenate([rows, cols[off]])
    c = np.concatenate([k, k[off]])
    v = np.concatenate([s[cols] / scale, s[rows[off]] / scale[off]])
    return sp.csr_matrix((v, (r, c)), shape=(order, rows.size))


def fixed_idempotents(spec: ConeSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    """Unit idempotents of the nonnegative blocks plus `count` random idempotents per second-order block."""
    cols = []
    n = spec.ambient_dim
    for h in spec.blocks_of(NONNEG):
        for i in spec.block_indices(h):
            e = np.zeros(n)
            e[i] = 1.0
            cols.append(e)
    for h in spec.blocks_of(SOC):
        if spec.blocks[h].dim < 2:
            continue
        cols.extend(sample_primitive_idempotent(spec, h, rng) for _ in range(count))
    return np.column_stack(cols) if cols else np.zeros((n, 0))


def _subproblem(g: GcppProblem, cuts: List[_Cut]) -> BlockConicProgram:
    L = g.order * (g.order + 1) // 2
    m = g.n_constraints
    k = len(cuts)
    width = L + k * g.order
    base = sp.hstack([g.constraint_rows(), sp.csr_matrix((m, k * g.order))])
    parts = [base]
    for i, cut in enumerate(cuts):
        left = cut_operator(g.order, cut.s)
        pieces = [left]
        if i:
            pieces.append(sp.csr_matrix((g.order, i * g.order)))
        pieces.append(-sp.identity(g.order, format="csr"))
        rest = width - L - (i + 1) * g.order
        if rest:
            pieces.append(sp.csr_matrix((g.order, rest)))
        parts.append(sp.hstack(pieces))
    cone = ConeSpec((psd(g.order),) + g.cone.blocks * k)
    return BlockConicProgram(
        cone=cone,
        c=np.concatenate([svec(g.C), np.zeros(k * g.order)]),
        A=sp.vstack(parts).tocsr(),
        b=np.concatenate([g.b, np.zeros(k * g.order)]),
        name=f"bd-exchange[{k}]",
    )


def _solve_subproblem(g: GcppProblem, cuts: List[_Cut], opts: Optional[SolverOptions]):
    prog = _subproblem(g, cuts)
    sol = solve(prog, opts)
    ok = sol.status == OPTIMAL or sol.near_optimal()
    L = g.order * (g.order + 1) // 2
    Y = smat(sol.x[:L])
    m = g.n_constraints
    duals = [sol.y[m + i * g.order: m + (i + 1) * g.order] for i in range(len(cuts))]
    return ok, sol.status, Y, duals


def _find_cut(g: GcppProblem, Y: np.ndarray, gamma: float, S_fix: np.ndarray) -> Tuple[Optional[np.ndarray], str]:
    if S_fix.shape[1]:
        vals = min_eigenvalue_batch(g.cone, Y @ S_fix) + gamma
        j = int(np.argmin(vals))
        if vals[j] < 0:
            return S_fix[:, j].copy(), JFIX
    outcome = separate(g.cone, Y, gamma)
    if outcome.kind == CUT:
        return outcome.witness, outcome.source
    return None, ""


def solve_bd_exchange(g: GcppProblem, params: Optional[ExchangeParams] = None,
                      rng: Optional[np.random.Generator] = None,
                      opts: Optional[SolverOptions] = None) -> Tuple[float, np.ndarray, ExchangeTrace]:
    params = params or ExchangeParams()
    if g.cone.has_psd:
        raise ExchangeError("the exchange method needs nonnegative and second-order blocks only")
    rng = rng or np.random.Generator(np.random.Philox(params.seed))
    S_fix = fixed_idempotents(g.cone, params.n_random_idempotents, rng)
    trace = ExchangeTrace()

    cuts: List[_Cut] = []
    ok, status, Y, duals = _solve_subproblem(g, cuts, opts)
    if not ok:
        logger.warning("P(∅) ended with %s; seeding with the nonnegative unit idempotents", status)
        n = g.cone.ambient_dim
        for i in g.cone.nonneg_indices():
            e = np.zeros(n)
            e[i] = 1.0
            cuts.append(_Cut(e, permanent=True))
        trace.fallback_seeded = True
        ok, status, Y, duals = _solve_subproblem(g, cuts, opts)
        if not ok:
            raise ExchangeError(f"seeded subproblem ended with {status}")
    trace.record(0, 0, params.gamma(0), len(cuts), float(np.sum(g.C * Y)), SEED if cuts else "")

    k, gamma, total = 0, params.gamma(0), 0
    while True:
        r = 0
        while True:
            s, source = _find_cut(g, Y, gamma, S_fix)
            if s is None:
                break
            total += 1
            if total > params.max_inner:
                raise ExchangeError(f"no convergence within {params.max_inner} cut additions")
            cuts.append(_Cut(s))
            ok, status, Y, duals = _solve_subproblem(g, cuts, opts)
            if not ok:
                raise ExchangeError(f"subproblem with {len(cuts)} cuts ended with {status}")
            cuts = [c for c, v in zip(cuts, duals) if c.permanent or np.linalg.norm(v) > params.prune_tol]
            r += 1
            objective = float(np.sum(g.C * Y))
            trace.record(k, r, gamma, len(cuts), objective, source)
            logger.info("exchange k=%d r=%d gamma=%.1e active=%d objective=%.8g (%s)",
                        k, r, gamma, len(cuts), objective, source)
        if gamma <= params.tau:
            break
        k += 1
        gamma = params.tau if r >= params.accelerate_after else params.gamma(k)

    return float(np.sum(g.C * Y)), Y, trace
