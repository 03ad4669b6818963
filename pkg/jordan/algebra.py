"""
Jordan-algebra kernel for products of nonnegative, second-order and PSD blocks.

Every spec-level operation splits its vectors along the ConeSpec blocks, runs
the block rule and reassembles. PSD blocks are handled in svec coordinates,
so the Jordan product there is svec((XY + YX) / 2).
"""

from functools import lru_cache
from typing import Callable, List, Tuple

import numpy as np
import scipy.linalg as la

from jordan.models import (
    ABS_TOL,
    NONNEG,
    PSD,
    SOC,
    Block,
    ConeSpec,
    ConeSpecError,
    SpectralDecomposition,
)

SQRT2 = np.sqrt(2.0)


@lru_cache(maxsize=None)
def svec_layout(order: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Row indices, column indices and scale factors of the svec ordering."""
    rows, cols = [], []
    for j in range(order):
        for i in range(j + 1):
            rows.append(i)
            cols.append(j)
    rows = np.array(rows, dtype=int)
    cols = np.array(cols, dtype=int)
    scale = np.where(rows == cols, 1.0, SQRT2)
    return rows, cols, scale


def order_from_length(length: int) -> int:
    order = int(round((np.sqrt(8 * length + 1) - 1) / 2))
    if order * (order + 1) // 2 != length:
        raise ConeSpecError(f"length {length} is not a triangular number")
    return order


def svec(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim < 2 or M.shape[-1] != M.shape[-2]:
        raise ConeSpecError(f"svec needs a square matrix, got shape {M.shape}")
    rows, cols, scale = svec_layout(M.shape[-1])
    sym = 0.5 * (M + np.swapaxes(M, -1, -2))
    return sym[..., rows, cols] * scale


def smat(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    order = order_from_length(v.shape[-1])
    rows, cols, scale = svec_layout(order)
    M = np.zeros(v.shape[:-1] + (order, order))
    vals = v / scale
    M[..., rows, cols] = vals
    M[..., cols, rows] = vals
    return M


def _sign_fix(V: np.ndarray) -> np.ndarray:
    # first nonzero component of each eigenvector positive
    for k in range(V.shape[1]):
        col = V[:, k]
        nz = np.flatnonzero(np.abs(col) > ABS_TOL)
        if nz.size and col[nz[0]] < 0:
            V[:, k] = -col
    return V


def _soc_frame(xb: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    tail = xb[1:]
    nrm = np.linalg.norm(tail)
    if nrm > 0:
        v = tail / nrm
    else:
        v = np.zeros_like(tail)
        v[0] = 1.0
    lams = np.array([xb[0] - nrm, xb[0] + nrm])
    c_low = 0.5 * np.concatenate([[1.0], -v])
    c_high = 0.5 * np.concatenate([[1.0], v])
    return lams, c_low, c_high


# -- block rules ------------------------------------------------------------


def _block_product(block: Block, xb: np.ndarray, yb: np.ndarray) -> np.ndarray:
    if block.kind == NONNEG:
        return xb * yb
    if block.kind == SOC:
        return np.concatenate([[xb @ yb], xb[0] * yb[1:] + yb[0] * xb[1:]])
    X, Y = smat(xb), smat(yb)
    return svec(0.5 * (X @ Y + Y @ X))


def _block_identity(block: Block) -> np.ndarray:
    if block.kind == NONNEG:
        return np.ones(block.dim)
    if block.kind == SOC:
        e = np.zeros(block.dim)
        e[0] = 1.0
        return e
    return svec(np.eye(block.dim))


def _block_eigenvalues(block: Block, xb: np.ndarray) -> np.ndarray:
    if block.kind == NONNEG:
        return np.sort(xb)
    if block.kind == SOC:
        nrm = np.linalg.norm(xb[1:])
        return np.array([xb[0] - nrm, xb[0] + nrm])
    return np.linalg.eigvalsh(smat(xb))


def _block_decompose(block: Block, xb: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:
    if block.kind == NONNEG:
        order = np.argsort(xb, kind="stable")
        eye = np.eye(block.dim)
        return xb[order], [eye[i] for i in order]
    if block.kind == SOC:
        lams, c_low, c_high = _soc_frame(xb)
        return lams, [c_low, c_high]
    w, V = np.linalg.eigh(smat(xb))
    V = _sign_fix(V)
    return w, [svec(np.outer(V[:, k], V[:, k])) for k in range(block.dim)]


def _block_map(block: Block, xb: np.ndarray, f: Callable) -> np.ndarray:
    if block.kind == NONNEG:
        return f(xb)
    if block.kind == SOC:
        lams, c_low, c_high = _soc_frame(xb)
        fl = f(lams)
        return fl[0] * c_low + fl[1] * c_high
    w, V = np.linalg.eigh(smat(xb))
    return svec((V * f(w)) @ V.T)


def _block_quad(block: Block, wb: np.ndarray, vb: np.ndarray) -> np.ndarray:
    if block.kind == NONNEG:
        return wb * wb * vb
    if block.kind == SOC:
        det = wb[0] ** 2 - wb[1:] @ wb[1:]
        reflected = np.concatenate([[vb[0]], -vb[1:]])
        return 2.0 * wb * (wb @ vb) - det * reflected
    W = smat(wb)
    return svec(W @ smat(vb) @ W)


def _block_divide(block: Block, lb: np.ndarray, rb: np.ndarray) -> np.ndarray:
    if block.kind == NONNEG:
        return rb / lb
    if block.kind == SOC:
        l0, lt = lb[0], lb[1:]
        det = l0 * l0 - lt @ lt
        rho0 = (l0 * rb[0] - lt @ rb[1:]) / det
        return np.concatenate([[rho0], (rb[1:] - lt * rho0) / l0])
    d, Q = np.linalg.eigh(smat(lb))
    Rt = Q.T @ smat(rb) @ Q
    Rt = 2.0 * Rt / (d[:, None] + d[None, :])
    return svec(Q @ Rt @ Q.T)


def _soc_det(vb: np.ndarray) -> float:
    nrm = np.linalg.norm(vb[1:])
    return float((vb[0] - nrm) * (vb[0] + nrm))


def _soc_max_step(xb: np.ndarray, db: np.ndarray) -> float:
    # smallest t > 0 with det(x + t d) = a t² + 2 b t + c = 0
    c = _soc_det(xb)
    if not (xb[0] > 0 and c > 0):
        raise ValueError("max_step needs a point in the interior of the second-order cone")
    a = _soc_det(db)
    b = float(xb[0] * db[0] - xb[1:] @ db[1:])
    disc = b * b - a * c
    if disc < 0:
        return np.inf
    q = -(b + np.copysign(np.sqrt(disc), b))
    roots = []
    if q != 0:
        roots.append(c / q)
    if a != 0:
        roots.append(q / a)
    positive = [t for t in roots if t > 0]
    return float(min(positive)) if positive else np.inf


def _psd_max_step(xb: np.ndarray, db: np.ndarray) -> float:
    # X + tD = L (I + t L⁻¹ D L⁻ᵀ) Lᵀ
    L = np.linalg.cholesky(smat(xb))
    half = la.solve_triangular(L, smat(db), lower=True, check_finite=False)
    M = la.solve_triangular(L, half.T, lower=True, check_finite=False)
    lam = np.linalg.eigvalsh(0.5 * (M + M.T))[0]
    if lam >= 0:
        return np.inf
    return float(-1.0 / lam)


def _block_max_step(block: Block, xb: np.ndarray, db: np.ndarray) -> float:
    if block.kind == NONNEG:
        neg = db < 0
        if not np.any(neg):
            return np.inf
        return float(np.min(-xb[neg] / db[neg]))
    if block.kind == SOC:
        return _soc_max_step(xb, db)
    return _psd_max_step(xb, db)


def _block_nt_point(block: Block, xb: np.ndarray, sb: np.ndarray) -> np.ndarray:
    if block.kind == NONNEG:
        return np.sqrt(xb / sb)
    if block.kind == SOC:
        det_x, det_s = _soc_det(xb), _soc_det(sb)
        if not (det_x > 0 and det_s > 0 and xb[0] > 0 and sb[0] > 0):
            raise ValueError("NT scaling needs interior points")
        xn = xb / np.sqrt(det_x)
        sn = sb / np.sqrt(det_s)
        gamma = np.sqrt(0.5 * (1.0 + xn @ sn))
        # geometric mean of the unit-determinant points x̄ and s̄⁻¹
        w = (xn + np.concatenate([[sn[0]], -sn[1:]])) / (2.0 * gamma)
        return (det_x / det_s) ** 0.25 * w
    # W = R Rᵀ with R = Lx V D^(-1/2), where Lsᵀ Lx = U D Vᵀ
    Lx = np.linalg.cholesky(smat(xb))
    Ls = np.linalg.cholesky(smat(sb))
    _, d, Vt = np.linalg.svd(Ls.T @ Lx)
    R = (Lx @ Vt.T) / np.sqrt(d)
    return svec(R @ R.T)


# -- spec-level operations --------------------------------------------------


def _split(spec: ConeSpec, x: np.ndarray) -> List[np.ndarray]:
    return [x[spec.block_slice(h)] for h in range(len(spec.blocks))]


def _assemble(spec: ConeSpec, parts: List[np.ndarray]) -> np.ndarray:
    if not parts:
        return np.zeros(0)
    return np.concatenate(parts)


def jordan_product(spec: ConeSpec, x, y) -> np.ndarray:
    x = spec.check(x, "x")
    y = spec.check(y, "y")
    return _assemble(
        spec,
        [_block_product(b, xb, yb) for b, xb, yb in zip(spec.blocks, _split(spec, x), _split(spec, y))],
    )


def identity(spec: ConeSpec) -> np.ndarray:
    return _assemble(spec, [_block_identity(b) for b in spec.blocks])


def spectral_decompose(spec: ConeSpec, x) -> SpectralDecomposition:
    x = spec.check(x, "x")
    out = SpectralDecomposition()
    n = spec.ambient_dim
    for h, (block, xb) in enumerate(zip(spec.blocks, _split(spec, x))):
        if block.ambient_dim == 0:
            continue
        lams, frames = _block_decompose(block, xb)
        sl = spec.block_slice(h)
        for lam, c in zip(lams, frames):
            full = np.zeros(n)
            full[sl] = c
            out.eigenvalues.append(float(lam))
            out.idempotents.append(full)
            out.block_of.append(h)
    return out


def block_eigenvalues(spec: ConeSpec, x) -> List[np.ndarray]:
    x = spec.check(x, "x")
    return [_block_eigenvalues(b, xb) for b, xb in zip(spec.blocks, _split(spec, x)) if b.ambient_dim]


def min_eigenvalue(spec: ConeSpec, x) -> float:
    eigs = block_eigenvalues(spec, x)
    if not eigs:
        return np.inf
    return float(min(e[0] for e in eigs))


def min_eigenvalue_batch(spec: ConeSpec, X) -> np.ndarray:
    """Minimum eigenvalue of every column of X (shape ambient_dim x k)."""
    X = np.asarray(X, dtype=float)
    if X.shape[0] != spec.ambient_dim:
        raise ConeSpecError(f"expected {spec.ambient_dim} rows, got {X.shape[0]}")
    out = np.full(X.shape[1], np.inf)
    for h, block in enumerate(spec.blocks):
        if block.ambient_dim == 0:
            continue
        part = X[spec.block_slice(h)]
        if block.kind == NONNEG:
            vals = part.min(axis=0)
        elif block.kind == SOC:
            vals = part[0] - np.linalg.norm(part[1:], axis=0)
        else:
            vals = np.linalg.eigvalsh(smat(part.T))[:, 0]
        out = np.minimum(out, vals)
    return out


def in_cone(spec: ConeSpec, x, tol: float = 0.0) -> bool:
    return min_eigenvalue(spec, x) >= -tol


def sample_primitive_idempotent(spec: ConeSpec, block_index: int, rng: np.random.Generator) -> np.ndarray:
    if not 0 <= block_index < len(spec.blocks):
        raise ConeSpecError(f"block index {block_index} out of range")
    block = spec.blocks[block_index]
    if block.ambient_dim == 0:
        raise ConeSpecError(f"block {block_index} is empty")
    out = np.zeros(spec.ambient_dim)
    sl = spec.block_slice(block_index)
    if block.kind == NONNEG:
        c = np.zeros(block.dim)
        c[rng.integers(block.dim)] = 1.0
    elif block.kind == SOC:
        v = _unit_vector(block.dim - 1, rng)
        c = 0.5 * np.concatenate([[1.0], v])
    else:
        v = _unit_vector(block.dim, rng)
        c = svec(np.outer(v, v))
    out[sl] = c
    return out


def _unit_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        v = rng.standard_normal(dim)
        nrm = np.linalg.norm(v)
        if nrm > ABS_TOL:
            return v / nrm


def spectral_map(spec: ConeSpec, x, f: Callable) -> np.ndarray:
    x = spec.check(x, "x")
    return _assemble(spec, [_block_map(b, xb, f) for b, xb in zip(spec.blocks, _split(spec, x))])


def quadratic_representation(spec: ConeSpec, w, v) -> np.ndarray:
    """P(w)v = 2 w∘(w∘v) - (w∘w)∘v, evaluated blockwise in closed form."""
    w = spec.check(w, "w")
    v = spec.check(v, "v")
    return _assemble(
        spec,
        [_block_quad(b, wb, vb) for b, wb, vb in zip(spec.blocks, _split(spec, w), _split(spec, v))],
    )


def quadratic_representation_matrix(spec: ConeSpec, w) -> np.ndarray:
    w = spec.check(w, "w")
    n = spec.ambient_dim
    P = np.zeros((n, n))
    for h, (block, wb) in enumerate(zip(spec.blocks, _split(spec, w))):
        sl = spec.block_slice(h)
        if block.kind == NONNEG:
            P[sl, sl] = np.diag(wb * wb)
        elif block.kind == SOC:
            det = wb[0] ** 2 - wb[1:] @ wb[1:]
            reflect = -np.ones(block.dim)
            reflect[0] = 1.0
            P[sl, sl] = 2.0 * np.outer(wb, wb) - det * np.diag(reflect)
        else:
            eye = np.eye(block.ambient_dim)
            P[sl, sl] = np.column_stack([_block_quad(block, wb, e) for e in eye])
    return P


def jordan_divide(spec: ConeSpec, lam, r) -> np.ndarray:
    """Solve lam ∘ rho = r for rho; lam must lie in the cone interior."""
    lam = spec.check(lam, "lam")
    r = spec.check(r, "r")
    return _assemble(
        spec,
        [_block_divide(b, lb, rb) for b, lb, rb in zip(spec.blocks, _split(spec, lam), _split(spec, r))],
    )


def max_step(spec: ConeSpec, x, d) -> float:
    x = spec.check(x, "x")
    d = spec.check(d, "d")
    steps = [
        _block_max_step(b, xb, db)
        for b, xb, db in zip(spec.blocks, _split(spec, x), _split(spec, d))
        if b.ambient_dim
    ]
    return min(steps) if steps else np.inf


def in_interior(spec: ConeSpec, x, rtol: float = 0.0) -> bool:
    """Strict interior test; curved blocks also need λmin > rtol·λmax."""
    x = spec.check(x, "x")
    if not np.all(np.isfinite(x)):
        return False
    for block, xb in zip(spec.blocks, _split(spec, x)):
        if block.ambient_dim == 0:
            continue
        lams = _block_eigenvalues(block, xb)
        floor = 0.0 if block.kind == NONNEG else rtol * max(lams[-1], 0.0)
        if not lams[0] > floor:
            return False
    return True


def nt_scaling_point(spec: ConeSpec, x, s) -> np.ndarray:
    """The interior point w with P(w)s = x, for x and s in the cone interior."""
    x = spec.check(x, "x")
    s = spec.check(s, "s")
    return _assemble(
        spec,
        [_block_nt_point(b, xb, sb) for b, xb, sb in zip(spec.blocks, _split(spec, x), _split(spec, s))],
    )
