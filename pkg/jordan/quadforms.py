import numpy as np

from jordan.algebra import SQRT2
from jordan.models import NONNEG, SOC, ConeSpec, QuadFormTable


def _psd_forms(spec: ConeSpec, h: int, n: int):
    order = spec.blocks[h].dim

    def coef(i, k):
        return 1.0 if i == k else 1.0 / SQRT2

    forms = {}
    for j in range(order):
        for i in range(j + 1):
            Q = np.zeros((n, n))
            scale = 1.0 if i == j else SQRT2
            for k in range(order):
                a = spec.psd_index(h, i, k)
                b = spec.psd_index(h, k, j)
                val = scale * coef(i, k) * coef(k, j)
                Q[a, b] += 0.5 * val
                Q[b, a] += 0.5 * val
            forms[spec.psd_index(h, i, j)] = Q
    return forms


def square_quadratic_forms(spec: ConeSpec) -> QuadFormTable:
    """Matrices Q_I with (x∘x)_I = xᵀ Q_I x for every global coordinate I."""
    n = spec.ambient_dim
    forms = [None] * n
    for h, block in enumerate(spec.blocks):
        if block.ambient_dim == 0:
            continue
        idx = spec.block_indices(h)
        if block.kind == NONNEG:
            for i in idx:
                Q = np.zeros((n, n))
                Q[i, i] = 1.0
                forms[i] = Q
        elif block.kind == SOC:
            lead = idx[0]
            Q = np.zeros((n, n))
            Q[idx, idx] = 1.0
            forms[lead] = Q
            for j in idx[1:]:
                Q = np.zeros((n, n))
                Q[lead, j] = 1.0
                Q[j, lead] = 1.0
                forms[j] = Q
        else:
            for pos, Q in _psd_forms(spec, h, n).items():
                forms[pos] = Q
    return QuadFormTable(forms=forms)
