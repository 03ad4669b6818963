"""
Constraint operators for the interior-point core.

A ConstraintMap represents sign * D Nᵀ B where B is a sparse base matrix, N an
optional dense nullspace basis and D an optional diagonal row scaling. The
plain standard form uses N = I, sign = 1; the eliminated LMI form uses B = Fᵀ,
sign = -1 and N from the QR of G.
"""

from typing import List, Optional

import numpy as np
import scipy.sparse as sp

from jordan.algebra import smat, svec, svec_layout
from jordan.models import NONNEG, SOC, ConeSpec

ZERO_ROW = 1e-12


def as_csr(A) -> sp.csr_matrix:
    if sp.issparse(A):
        return sp.csr_matrix(A, dtype=float)
    return sp.csr_matrix(np.atleast_2d(np.asarray(A, dtype=float)))


class ConstraintMap:
    def __init__(self, base, cone: ConeSpec, nullspace: Optional[np.ndarray] = None,
                 sign: float = 1.0, chunk: int = 256):
        self.base = as_csr(base)
        self.cone = cone
        self.nullspace = nullspace
        self.sign = sign
        self.chunk = chunk
        self.row_scale: Optional[np.ndarray] = None
        self._columns: List[sp.csr_matrix] = [
            self.base[:, cone.block_slice(h)].tocsr() for h in range(len(cone.blocks))
        ]

    @property
    def shape(self):
        rows = self.base.shape[0] if self.nullspace is None else self.nullspace.shape[1]
        return rows, self.base.shape[1]

    def equilibrate(self) -> np.ndarray:
        """Rescale every nonzero row to unit norm and return the scale vector."""
        self.row_scale = None
        norms = self.row_norms()
        scale = np.ones_like(norms)
        nonzero = norms > ZERO_ROW
        scale[nonzero] = 1.0 / norms[nonzero]
        self.row_scale = scale
        return scale

    def matvec(self, x: np.ndarray) -> np.ndarray:
        out = self.base @ x
        if self.nullspace is not None:
            out = self.nullspace.T @ out
        if self.row_scale is not None:
            out = self.row_scale * out
        return self.sign * out

    def rmatvec(self, y: np.ndarray) -> np.ndarray:
        if self.row_scale is not None:
            y = self.row_scale * y
        if self.nullspace is not None:
            y = self.nullspace @ y
        return self.sign * (self.base.T @ y)

    def row_norms(self) -> np.ndarray:
        if self.nullspace is None:
            norms = np.sqrt(np.asarray(self.base.multiply(self.base).sum(axis=1)).ravel())
        else:
            gram = (self.base @ self.base.T) @ self.nullspace
            norms = np.sqrt(np.maximum(np.einsum("ij,ij->j", self.nullspace, gram), 0.0))
        if self.row_scale is not None:
            norms = self.row_scale * norms
        return norms

    def schur(self, w: np.ndarray) -> np.ndarray:
        """A P(w) Aᵀ for the NT scaling point w."""
        S = self._base_schur(w)
        if self.nullspace is not None:
            S = self.nullspace.T @ S @ self.nullspace
        if self.row_scale is not None:
            S = self.row_scale[:, None] * S * self.row_scale[None, :]
        return 0.5 * (S + S.T)

    def _base_schur(self, w: np.ndarray) -> np.ndarray:
        m = self.base.shape[0]
        S = np.zeros((m, m))
        for h, block in enumerate(self.cone.blocks):
            Bk = self._columns[h]
            if Bk.nnz == 0:
                continue
            wb = w[self.cone.block_slice(h)]
            if block.kind == NONNEG:
                S += (Bk @ sp.diags(wb * wb) @ Bk.T).toarray()
            elif block.kind == SOC:
                det = wb[0] ** 2 - wb[1:] @ wb[1:]
                reflect = -np.ones(block.dim)
                reflect[0] = 1.0
                P = 2.0 * np.outer(wb, wb) - det * np.diag(reflect)
                BP = np.asarray(Bk @ P)
                S += np.asarray(Bk @ BP.T)
            else:
                self._psd_schur(S, Bk, smat(wb), block.dim)
        return S

    def _psd_schur(self, S: np.ndarray, Bk: sp.csr_matrix, W: np.ndarray, order: int):
        rows_idx, cols_idx, scale = svec_layout(order)
        active = np.flatnonzero(np.diff(Bk.indptr))
        for start in range(0, active.size, self.chunk):
            batch = active[start:start + self.chunk]
            T = np.empty((batch.size, order, order))
            for k, i in enumerate(batch):
                lo, hi = Bk.indptr[i], Bk.indptr[i + 1]
                idx = Bk.indices[lo:hi]
                vals = Bk.data[lo:hi] / scale[idx]
                if idx.size > order:
                    dense = np.zeros(scale.size)
                    dense[idx] = Bk.data[lo:hi]
                    Si = smat(dense)
                    T[k] = W @ Si @ W
                    continue
                r, c = rows_idx[idx], cols_idx[idx]
                off = r != c
                R = np.concatenate([r, c[off]])
                C = np.concatenate([c, r[off]])
                V = np.concatenate([vals, vals[off]])
                T[k] = W[:, R] @ (V[:, None] * W[C, :])
            S[:, batch] += np.asarray(Bk @ svec(T).T)
