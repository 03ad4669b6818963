"""Exact minimisation of a quadratic over the unit sphere."""

import numpy as np
import scipy.linalg as la

from bdsep.models import TRS_MAX_ITER, TRS_TOL, TrsError, TrsProblem, TrsSolution


def _secular_root(lams: np.ndarray, beta: np.ndarray, lo: float, hi: float):
    """Root of Σ β²/(λ-μ)² = 1 in (lo, hi) by Newton steps kept inside a bracket."""
    w = beta * beta

    def phi(mu):
        d = lams - mu
        return float(np.sum(w / (d * d))) - 1.0, float(2.0 * np.sum(w / (d * d * d)))

    mu = lo
    for it in range(1, TRS_MAX_ITER + 1):
        val, slope = phi(mu)
        norm = np.sqrt(val + 1.0)
        if abs(norm - 1.0) <= TRS_TOL:
            return mu, it
        if val < 0:
            lo = mu
        else:
            hi = mu
        step = mu - val / slope if slope > 0 else None
        mu = step if step is not None and lo < step < hi else 0.5 * (lo + hi)
        if hi - lo <= 1e-15 * max(1.0, abs(lo), abs(hi)):
            return mu, it
    raise TrsError("secular equation did not converge")


def solve_trs(p: TrsProblem) -> TrsSolution:
    B = 0.5 * (np.asarray(p.B, dtype=float) + np.asarray(p.B, dtype=float).T)
    b = np.asarray(p.b, dtype=float)
    if b.ndim != 1 or B.shape != (b.size, b.size) or b.size < 1:
        raise TrsError(f"inconsistent TRS data: B {B.shape}, b {b.shape}")

    lams, Q = la.eigh(B)
    beta = Q.T @ b
    lam1 = lams[0]
    scale = max(1.0, float(np.max(np.abs(lams))), float(np.linalg.norm(b)))
    low = lams - lam1 <= 1e-10 * scale
    hard = bool(np.all(np.abs(beta[low]) <= TRS_TOL * scale))

    if hard:
        gap = lams[~low] - lam1
        vp = np.zeros_like(b)
        if gap.size:
            vp = -(Q[:, ~low] @ (beta[~low] / gap))
        slack = 1.0 - vp @ vp
        if slack >= 0:
            v = vp + np.sqrt(slack) * Q[:, 0]
            return TrsSolution(value=p.evaluate(v), v=v, mu=float(lam1), hard_case=True)

    bnorm = float(np.linalg.norm(b))
    lo = lam1 - bnorm - 1.0
    keep = ~low if hard else np.ones(b.size, dtype=bool)
    mu, iterations = _secular_root(lams[keep], beta[keep], lo, lam1)
    v = -(Q[:, keep] @ (beta[keep] / (lams[keep] - mu)))
    v /= np.linalg.norm(v)
    return TrsSolution(value=p.evaluate(v), v=v, mu=float(mu), hard_case=hard, iterations=iterations)
