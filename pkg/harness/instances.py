"""
Random instances: mixed 0-1 SOCPs and degree-4 moment vectors in four
variables obtained by tying a random Wishart matrix into moment form.
"""

import logging
from collections import defaultdict
from typing import Dict, List, Optional, Tuple

import numpy as np

from gcpp.models import MisocpInstance
from harness.models import CRITICAL, INFO, WARNING, ExperimentReport, Rejected
from polymoment.models import MomentVector
from polymoment.monomials import enumerate_monomials

logger = logging.getLogger(__name__)

# x1², x2², x3², x4², x1x2, x1x3, x1x4, x2x3, x2x4, x3x4
M44_BASIS = [
    (2, 0, 0, 0), (0, 2, 0, 0), (0, 0, 2, 0), (0, 0, 0, 2),
    (1, 1, 0, 0), (1, 0, 1, 0), (1, 0, 0, 1), (0, 1, 1, 0), (0, 1, 0, 1), (0, 0, 1, 1),
]

# (target, source), 1-based, each also applied to the transposed cells
TIE_ASSIGNMENTS = [
    ((1, 2), (5, 5)), ((1, 3), (6, 6)), ((1, 4), (7, 7)),
    ((1, 8), (5, 6)), ((1, 9), (5, 7)), ((1, 10), (6, 7)),
    ((2, 3), (8, 8)), ((2, 4), (9, 9)), ((2, 6), (5, 8)), ((2, 7), (5, 9)), ((2, 10), (8, 9)),
    ((3, 4), (10, 10)), ((3, 5), (6, 8)), ((3, 7), (6, 10)), ((3, 9), (8, 10)),
    ((4, 5), (7, 9)), ((4, 6), (7, 10)), ((4, 8), (9, 10)),
    ((5, 10), (7, 8)), ((6, 9), (7, 8)),
]

PSD_REL_TOL = 1e-9
SAMPLE_BATCH = 16384


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def generate_instance(n: int, seed: int) -> MisocpInstance:
    if n < 3:
        raise ValueError("instances need n >= 3")
    rng = rng_for(seed)
    c = rng.standard_normal(n)
    size = int(np.rint(0.4 * n))
    binary = sorted(int(i) for i in rng.choice(np.arange(2, n + 1), size=size, replace=False))
    return MisocpInstance(n=n, c=c, binary=tuple(binary), seed=seed)


def _tie_index() -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    targets, sources = [], []
    for (i, j), (k, l) in TIE_ASSIGNMENTS:
        targets.extend([(i - 1, j - 1), (j - 1, i - 1)])
        sources.extend([(k - 1, l - 1), (l - 1, k - 1)])
    t = np.array(targets)
    s = np.array(sources)
    return t[:, 0], t[:, 1], s[:, 0], s[:, 1]


def tie_moment_entries(M: np.ndarray) -> np.ndarray:
    """Copy of M (or a stack of them) with the moment-consistency assignments applied."""
    out = np.array(M, dtype=float, copy=True)
    ti, tj, si, sj = _tie_index()
    out[..., ti, tj] = out[..., si, sj]
    return out


def tied_classes() -> List[List[Tuple[int, int]]]:
    """Groups of upper-triangle cells (1-based) whose monomials α+α′ coincide."""
    groups: Dict[Tuple[int, ...], List[Tuple[int, int]]] = defaultdict(list)
    for a in range(len(M44_BASIS)):
        for b in range(a, len(M44_BASIS)):
            key = tuple(np.add(M44_BASIS[a], M44_BASIS[b]))
            groups[key].append((a + 1, b + 1))
    return [cells for cells in groups.values() if len(cells) > 1]


def untied_classes() -> List[List[Tuple[int, int]]]:
    """Classes the assignment table fails to make equal on a generic matrix."""
    rng = rng_for(0)
    A = rng.standard_normal((10, 10))
    M = tie_moment_entries(A @ A.T)
    bad = []
    for cells in tied_classes():
        values = [M[a - 1, b - 1] for a, b in cells]
        if max(values) != min(values):
            bad.append(cells)
    return bad


def moments_from_matrix(M: np.ndarray) -> MomentVector:
    basis = enumerate_monomials(4, 4)
    y = np.zeros(len(basis))
    for a, alpha in enumerate(M44_BASIS):
        for b, beta in enumerate(M44_BASIS):
            y[basis.position(tuple(np.add(alpha, beta)))] = M[a, b]
    return MomentVector(n=4, y=y, degree=4)


def _undecided(M: np.ndarray, tol: np.ndarray) -> np.ndarray:
    """Indices of the stack M that no elimination pivot proves indefinite."""
    S = M.copy()
    idx = np.arange(M.shape[0])
    parked = []
    for k in range(M.shape[-1]):
        piv = S[:, k, k]
        negative = piv < -tol[idx]
        small = ~negative & (piv <= tol[idx])
        parked.append(idx[small])
        go = ~(negative | small)
        S, idx = S[go], idx[go]
        if not idx.size:
            break
        col = S[:, k + 1:, k] / S[:, k, k][:, None]
        S[:, k + 1:, k + 1:] -= col[:, :, None] * S[:, None, k, k + 1:]
    return np.sort(np.concatenate([idx, *parked]))


def _accepts(M: np.ndarray) -> np.ndarray:
    """PSD test up to PSD_REL_TOL·|trace|, for one matrix or a stack."""
    M = np.asarray(M, dtype=float)
    stack = M.reshape((-1,) + M.shape[-2:])
    tol = PSD_REL_TOL * np.abs(np.trace(stack, axis1=-2, axis2=-1))
    out = np.zeros(stack.shape[0], dtype=bool)
    candidates = _undecided(stack, tol)
    if candidates.size:
        lam = np.linalg.eigvalsh(stack[candidates])[:, 0]
        out[candidates] = lam >= -tol[candidates]
    return out.reshape(M.shape[:-2])


def generate_m44_vector(seed: int) -> MomentVector:
    """One draw: Wishart matrix, tied into moment form; Rejected unless still PSD."""
    rng = rng_for(seed)
    A = rng.standard_normal((10, 10))
    M = tie_moment_entries(A @ A.T)
    if not _accepts(M):
        raise Rejected(f"tied matrix for seed {seed} is not PSD")
    return moments_from_matrix(M)


def sample_m44_vectors(count: int, seed: int, max_draws: Optional[int] = None,
                       batch: int = SAMPLE_BATCH) -> Tuple[List[MomentVector], int]:
    """Accepted moment vectors from one seeded stream, drawn in batches; returns (vectors, draws)."""
    rng = rng_for(seed)
    accepted: List[MomentVector] = []
    draws = 0
    while len(accepted) < count and (max_draws is None or draws < max_draws):
        size = batch if max_draws is None else min(batch, max_draws - draws)
        A = rng.standard_normal((size, 10, 10))
        M = tie_moment_entries(A @ np.swapaxes(A, -1, -2))
        ok = np.flatnonzero(_accepts(M))
        for k in ok[: count - len(accepted)]:
            accepted.append(moments_from_matrix(M[k]))
        draws += size
    if len(accepted) < count:
        logger.warning("accepted %d of %d requested samples in %d draws", len(accepted), count, draws)
    return accepted, draws


def run_m44(count: int = 10000, seed: int = 0) -> ExperimentReport:
    """Acceptance rate of the tie-and-check sampler over `count` draws."""
    report = ExperimentReport(id=f"m44-{seed}-{count}", kind="m44", seed=seed, params={"count": count})
    classes = tied_classes()
    bad = untied_classes()
    if bad:
        report.add_finding(CRITICAL, "moment-tying", f"{len(bad)} of {len(classes)} classes stay untied: {bad}")
    else:
        report.add_finding(INFO, "moment-tying", f"all {len(classes)} moment classes tied")

    accepted, draws = sample_m44_vectors(count, seed, max_draws=count)
    rate = len(accepted) / draws if draws else 0.0
    report.summary = {"draws": draws, "accepted": len(accepted), "acceptance_rate": rate,
                      "tied_classes": len(classes)}
    if not accepted:
        report.add_finding(WARNING, "sampling", f"no sample accepted in {draws} draws")
    logger.info("m44: %d of %d draws accepted", len(accepted), draws)
    return report
