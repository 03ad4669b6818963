"""Reference matrices that separate the GDNN cones, plus CP(K) samplers."""

import numpy as np

from jordan.algebra import jordan_product
from jordan.models import NONNEG, SOC, ConeSpec, nonneg, psd, second_order


def soc_spec(n1: int, n2: int) -> ConeSpec:
    return ConeSpec.of(nonneg(n1), second_order(n2))


def zvp_not_bd_matrix(n1: int = 1, n2: int = 3) -> np.ndarray:
    """PSD, in DNN_ZVP(R₊^{n1} x L^{n2}) and violated by zvp_not_bd_witness."""
    if n1 < 1 or n2 < 2:
        raise ValueError("needs n1 >= 1 and n2 >= 2")
    n = n1 + n2
    A = np.zeros((n, n))
    A[0, 0] = n2 - 1
    A[0, n1 + 1:] = A[n1 + 1:, 0] = 1.0
    A[n1, n1] = n2 - 1
    A[n1 + 1:, n1 + 1:] = np.eye(n2 - 1)
    return A


def zvp_not_bd_witness(n1: int = 1, n2: int = 3) -> np.ndarray:
    s = np.zeros(n1 + n2)
    s[n1] = 0.5
    s[n1 + 1:] = -1.0 / (2.0 * np.sqrt(n2 - 1))
    return s


def bd_not_zvp_matrix(n1: int = 1, n2: int = 3) -> np.ndarray:
    if n2 < 3:
        raise ValueError("needs n2 >= 3")
    diag = np.concatenate([np.zeros(n1), [1.0], np.full(n2 - 1, 1.0 / np.sqrt(n2 - 1))])
    return np.diag(diag)


def kzvp_gap_matrix(spec: ConeSpec) -> np.ndarray:
    """Member of K_NN,0 outside K_ZVP,0: couples the first nonnegative coordinate
    with the lead and first tail coordinate of the first second-order block."""
    nonneg_blocks = spec.blocks_of(NONNEG)
    soc_blocks = [h for h in spec.blocks_of(SOC) if spec.blocks[h].dim >= 2]
    if not nonneg_blocks or not soc_blocks:
        raise ValueError("needs a nonnegative block and a second-order block of dimension >= 2")
    i = spec.block_indices(nonneg_blocks[0])[0]
    h = soc_blocks[0]
    A = np.zeros((spec.ambient_dim, spec.ambient_dim))
    for j in (spec.soc_leading(h), spec.soc_tail(h)[0]):
        A[i, j] = A[j, i] = 1.0
    return A


def psd_epsilon_matrix(n2: int = 2, eps: float = 0.5, n1: int = 1):
    """(spec, A) with A coupling the first nonnegative coordinate to the PSD block by (1 on diagonals, eps off)."""
    spec = ConeSpec.of(nonneg(n1), psd(n2))
    h = 1
    A = np.zeros((spec.ambient_dim, spec.ambient_dim))
    for j in range(n2):
        for i in range(j + 1):
            pos = spec.psd_index(h, i, j)
            A[0, pos] = A[pos, 0] = 1.0 if i == j else eps
    return spec, A


def sample_cone_point(spec: ConeSpec, rng: np.random.Generator) -> np.ndarray:
    x = rng.standard_normal(spec.ambient_dim)
    return jordan_product(spec, x, x)


def rank_one_members(spec: ConeSpec, rng: np.random.Generator, k: int = 1) -> np.ndarray:
    """Σ z zᵀ over k sampled cone points; lies in CP(K)."""
    n = spec.ambient_dim
    Y = np.zeros((n, n))
    for _ in range(k):
        z = sample_cone_point(spec, rng)
        Y += np.outer(z, z)
    return Y
