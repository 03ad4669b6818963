"""
Separation oracle for N(K) = {X : Xs ∈ K for every primitive idempotent s of K}
when K is a product of nonnegative orthants and second-order cones.

Primitive idempotents are e_I on nonnegative coordinates and (1/2, v/2) with
‖v‖ = 1 on a second-order block. With a shift γ ≥ 0 the oracle tests
Xs + γe ∈ K instead. The five cases are evaluated in CASE_ORDER and the first
violated one yields the cut H = -(d s̃ᵀ + s̃ dᵀ) with s̃ = 2s and d ∈ K chosen so
that dᵀXs < 0.
"""

import logging
from typing import List, Optional, Tuple

import numpy as np

from bdsep.models import (
    CASE_ORDER,
    CUT,
    CUT_TOL,
    INSIDE,
    NNO_NNO,
    NNO_SOC,
    SOC_NNO,
    SOCSOC_LINEAR,
    SOCSOC_TRS,
    SeparationOutcome,
    TrsProblem,
)
from bdsep.trs import solve_trs
from gdnn.models import Unsupported
from jordan.algebra import min_eigenvalue
from jordan.models import SOC, ConeSpec

logger = logging.getLogger(__name__)

# (value, witness s, dual direction d)
Candidate = Tuple[float, np.ndarray, np.ndarray]


def idempotent_violation(spec: ConeSpec, X, s) -> float:
    X = spec.check_matrix(X, "X")
    return min_eigenvalue(spec, X @ spec.check(s, "s"))


def _unit(dim: int, index: int = 0) -> np.ndarray:
    e = np.zeros(dim)
    e[index] = 1.0
    return e


def _soc_idempotent(spec: ConeSpec, h: int, v: np.ndarray) -> np.ndarray:
    s = np.zeros(spec.ambient_dim)
    idx = spec.block_indices(h)
    s[idx[0]] = 0.5
    s[idx[1:]] = 0.5 * v
    return s


def _soc_direction(spec: ConeSpec, g: int, Xs: np.ndarray) -> np.ndarray:
    """d = (1, -c) on block g with c the unit direction of the tail of Xs."""
    idx = spec.block_indices(g)
    tail = Xs[idx[1:]]
    nrm = np.linalg.norm(tail)
    c = tail / nrm if nrm > 0 else _unit(len(idx) - 1)
    d = np.zeros(spec.ambient_dim)
    d[idx[0]] = 1.0
    d[idx[1:]] = -c
    return d


def _soc_blocks(spec: ConeSpec) -> List[int]:
    return [h for h in spec.blocks_of(SOC) if spec.blocks[h].dim >= 2]


def socsoc_objective(spec: ConeSpec, X, g: int, h: int, gamma: float = 0.0) -> TrsProblem:
    """q(v) = 4[(X s)_{g1}² - ‖(X s)_{g tail}‖²] for s = (1/2, v/2) on block h.

    The shift γ adds γ to (X s)_{g1}, i.e. replaces X_{g1,h1} by X_{g1,h1} + 2γ.
    """
    X = spec.check_matrix(X, "X")
    gi, hi = spec.block_indices(g), spec.block_indices(h)
    x11 = X[gi[0], hi[0]] + 2.0 * gamma
    x12 = X[gi[0], hi[1:]]
    x21 = X[gi[1:], hi[0]]
    x22 = X[np.ix_(gi[1:], hi[1:])]
    B = np.outer(x12, x12) - x22.T @ x22
    b = x11 * x12 - x22.T @ x21
    c = x11 * x11 - x21 @ x21
    return TrsProblem(B=B, b=b, c=float(c))


def _nno_nno(spec: ConeSpec, X: np.ndarray) -> Optional[Candidate]:
    idx = spec.nonneg_indices()
    if not idx:
        return None
    sub = X[np.ix_(idx, idx)]
    a, b = np.unravel_index(np.argmin(sub), sub.shape)
    n = spec.ambient_dim
    return float(sub[a, b]), _unit(n, idx[b]), _unit(n, idx[a])


def _nno_soc(spec: ConeSpec, X: np.ndarray) -> Optional[Candidate]:
    # s on a second-order block, target a nonnegative coordinate
    best = None
    for h in _soc_blocks(spec):
        hi = spec.block_indices(h)
        for I in spec.nonneg_indices():
            row = X[I, hi[1:]]
            nrm = np.linalg.norm(row)
            value = 0.5 * (X[I, hi[0]] - nrm)
            if best is None or value < best[0]:
                v = -row / nrm if nrm > 0 else _unit(len(hi) - 1)
                best = (float(value), _soc_idempotent(spec, h, v), _unit(spec.ambient_dim, I))
    return best


def _soc_nno(spec: ConeSpec, X: np.ndarray) -> Optional[Candidate]:
    # s = e_J on a nonnegative coordinate, target a second-order block
    best = None
    for g in _soc_blocks(spec):
        gi = spec.block_indices(g)
        for J in spec.nonneg_indices():
            value = X[gi[0], J] - np.linalg.norm(X[gi[1:], J])
            if best is None or value < best[0]:
                s = _unit(spec.ambient_dim, J)
                best = (float(value), s, _soc_direction(spec, g, X @ s))
    return best


def _socsoc_linear(spec: ConeSpec, X: np.ndarray) -> Optional[Candidate]:
    best = None
    for g in _soc_blocks(spec):
        g1 = spec.soc_leading(g)
        for h in _soc_blocks(spec):
            hi = spec.block_indices(h)
            row = X[g1, hi[1:]]
            nrm = np.linalg.norm(row)
            value = 0.5 * (X[g1, hi[0]] - nrm)
            if best is None or value < best[0]:
                v = -row / nrm if nrm > 0 else _unit(len(hi) - 1)
                s = _soc_idempotent(spec, h, v)
                best = (float(value), s, _soc_direction(spec, g, X @ s))
    return best


def _minimise_pair(problem: TrsProblem):
    if problem.dim == 1:
        # the sphere in R¹ is {-1, +1}
        vals = [(problem.evaluate([t]), np.array([t])) for t in (1.0, -1.0)]
        return min(vals, key=lambda item: item[0])
    sol = solve_trs(problem)
    return sol.value, sol.v


def _socsoc_trs(spec: ConeSpec, X: np.ndarray, gamma: float) -> Tuple[Optional[float], Optional[Candidate]]:
    """Unshifted minimum of the quartic phase and the most violated shifted candidate.

    Values are min over s of det((X s) on block g) = λmin·λmax, so they scale
    with the square of X while the linear cases scale with X.
    """
    report, best = None, None
    for g in _soc_blocks(spec):
        for h in _soc_blocks(spec):
            raw, _ = _minimise_pair(socsoc_objective(spec, X, g, h))
            report = raw / 4.0 if report is None else min(report, raw / 4.0)
            shifted, v = _minimise_pair(socsoc_objective(spec, X, g, h, gamma))
            value = shifted / 4.0
            if best is None or value < best[0]:
                s = _soc_idempotent(spec, h, v)
                best = (float(value), s, _soc_direction(spec, g, X @ s))
    return report, best


def separate(spec: ConeSpec, X, gamma: float = 0.0) -> SeparationOutcome:
    if spec.has_psd:
        raise Unsupported("separation over N(K) needs nonnegative and second-order blocks only")
    if gamma < 0:
        raise ValueError("shift must be nonnegative")
    X = spec.check_matrix(X, "X")
    X = 0.5 * (X + X.T)
    scale = max(1.0, float(np.max(np.abs(X))) if X.size else 1.0)
    threshold = CUT_TOL * scale

    linear_cases = [
        (NNO_NNO, _nno_nno(spec, X)),
        (NNO_SOC, _nno_soc(spec, X)),
        (SOC_NNO, _soc_nno(spec, X)),
        (SOCSOC_LINEAR, _socsoc_linear(spec, X)),
    ]
    case_values = {source: (cand[0] if cand else None) for source, cand in linear_cases}

    found = None
    for source, cand in linear_cases:
        if cand is not None and cand[0] + gamma < -threshold:
            found = (source, cand)
            break

    if found is None:
        trs_value, cand = _socsoc_trs(spec, X, gamma)
        case_values[SOCSOC_TRS] = trs_value
        # the TRS phase is quadratic in X
        if cand is not None and cand[0] < -CUT_TOL * scale * scale:
            found = (SOCSOC_TRS, cand)
    else:
        case_values[SOCSOC_TRS] = None

    if found is None:
        return SeparationOutcome(kind=INSIDE, case_values=case_values)

    source, (value, s, d) = found
    s_tilde = 2.0 * s
    H = -(np.outer(d, s_tilde) + np.outer(s_tilde, d))
    logger.debug("cut from %s, value %.3e", source, value)
    return SeparationOutcome(
        kind=CUT,
        source=source,
        value=value,
        H=H,
        violation=float(np.sum(H * X)),
        witness=s,
        case_values={k: case_values.get(k) for k in CASE_ORDER},
    )
