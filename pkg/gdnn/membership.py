import logging
from typing import List, Optional

import numpy as np
import scipy.sparse as sp

from bdsep.models import INSIDE
from bdsep.oracle import separate
from conicsolver.feasibility import solve_feasibility
from conicsolver.models import INDETERMINATE, BlockConicProgram, LmiProgram, SolverError, SolverOptions
from gdnn.c0 import c0_adjoint, c0_upper_operator
from gdnn.models import BD, KNN, KZVP0, MEMBERSHIP_TOL, NN, ZVP, MembershipResult, Unsupported, ZvpGenerators
from jordan.algebra import smat, svec, svec_layout
from jordan.models import PSD, SOC, ConeSpec, nonneg, psd
from polymoment.models import GramCertificate, MomentVector
from polymoment.moments import moment_operator, sos_decompose
from polymoment.monomials import enumerate_monomials, multiply_by_norm_power

logger = logging.getLogger(__name__)


def zvp_generators(spec: ConeSpec) -> ZvpGenerators:
    n = spec.ambient_dim
    out = ZvpGenerators(nonneg_index_set=spec.nonneg_index_set())
    for h in spec.blocks_of(SOC):
        J = np.zeros((n, n))
        lead = spec.soc_leading(h)
        J[lead, lead] = 1.0
        for i in spec.soc_tail(h):
            J[i, i] = -1.0
        out.J_list.append((h, J))
    for h in spec.blocks_of(PSD):
        order = spec.blocks[h].dim
        for j in range(order):
            for i in range(j):
                J = np.zeros((n, n))
                a, b = spec.psd_index(h, i, i), spec.psd_index(h, j, j)
                J[a, b] = J[b, a] = 1.0
                off = spec.psd_index(h, i, j)
                J[off, off] = -1.0
                out.Jij_list.append((h, i, j, J))
    return out


def _psd_threshold(X: np.ndarray, tol: float) -> float:
    return tol * max(1.0, abs(float(np.trace(X))))


def _symmetric(spec: ConeSpec, X, name: str = "X") -> np.ndarray:
    X = spec.check_matrix(X, name)
    return 0.5 * (X + X.T)


def zvp_membership(spec: ConeSpec, X, tol: float = MEMBERSHIP_TOL) -> MembershipResult:
    X = _symmetric(spec, X)
    lam = float(np.linalg.eigvalsh(X)[0]) if X.size else 0.0
    if lam < -_psd_threshold(X, tol):
        return MembershipResult(False, ZVP, violation={"constraint": "psd", "value": lam})

    gens = zvp_generators(spec)
    for label, J in zip(gens.labels(), gens.matrices()):
        value = float(np.sum(J * X))
        if value < -tol:
            return MembershipResult(False, ZVP, violation={"constraint": f"<{label}, X>", "value": value})

    idx = gens.nonneg_index_set
    if idx:
        sub = X[np.ix_(idx, idx)]
        a, b = np.unravel_index(np.argmin(sub), sub.shape)
        if sub[a, b] < -tol:
            return MembershipResult(
                False, ZVP, violation={"constraint": f"X[{idx[a]},{idx[b]}]", "value": float(sub[a, b])}
            )
    return MembershipResult(True, ZVP, certificate={"min_eigenvalue": lam})


def _upper_pairs(idx: List[int]):
    return [(a, b) for k, b in enumerate(idx) for a in idx[: k + 1]]


def kzvp0_membership(spec: ConeSpec, A, tol: float = MEMBERSHIP_TOL,
                     opts: Optional[SolverOptions] = None) -> MembershipResult:
    """Decide A = P + Σ t_k J_k + N with P ⪰ 0, t ≥ 0 and N ≥ 0 supported on I_{≥0}²."""
    A = _symmetric(spec, A, "A")
    n = spec.ambient_dim
    scale = float(np.max(np.abs(A))) if A.size else 0.0
    if scale == 0.0:
        return MembershipResult(True, KZVP0, certificate={"P": A, "t": [], "N": A})

    gens = zvp_generators(spec)
    Js = gens.matrices()
    pairs = _upper_pairs(gens.nonneg_index_set)
    rows, cols, scl = svec_layout(n)
    L = rows.size
    position = {(int(i), int(j)): k for k, (i, j) in enumerate(zip(rows, cols))}

    columns = [sp.identity(L, format="csc")]
    if Js:
        columns.append(sp.csc_matrix(np.column_stack([svec(J) for J in Js])))
    if pairs:
        pos = [position[(min(a, b), max(a, b))] for a, b in pairs]
        columns.append(sp.csc_matrix((scl[pos], (pos, np.arange(len(pairs)))), shape=(L, len(pairs))))
    extra = len(Js) + len(pairs)
    blocks = (psd(n),) + ((nonneg(extra),) if extra else ())

    prog = BlockConicProgram(
        cone=ConeSpec(blocks),
        c=np.zeros(L + extra),
        A=sp.hstack(columns).tocsr(),
        b=svec(A) / scale,
        name="kzvp0",
    )
    result = solve_feasibility(prog, opts, eps=tol)
    if result.status == INDETERMINATE:
        raise SolverError(f"K_ZVP,0 feasibility solve ended with {result.solution.status}")
    if not result.feasible:
        return MembershipResult(False, KZVP0, violation={"constraint": "decomposition", "value": result.t})

    point = result.point * scale
    t = point[L:L + len(Js)]
    N = np.zeros((n, n))
    for value, (a, b) in zip(point[L + len(Js):], pairs):
        N[a, b] = N[b, a] = value
    return MembershipResult(True, KZVP0, certificate={"P": smat(point[:L]), "t": t, "N": N, "margin": result.t})


def knn_membership(spec: ConeSpec, A, r: int = 0, tol: float = MEMBERSHIP_TOL,
                   opts: Optional[SolverOptions] = None) -> MembershipResult:
    """SOS test of (Σ x_i²)^r (x∘x)ᵀA(x∘x)."""
    if r < 0:
        raise ValueError("level r must be nonnegative")
    A = _symmetric(spec, A, "A")
    theta = multiply_by_norm_power(c0_adjoint(spec, A), r)
    outcome = sos_decompose(theta, tol=tol, opts=opts)
    if isinstance(outcome, GramCertificate):
        return MembershipResult(True, KNN, certificate={
            "level": r, "gram": outcome.gram, "residual": outcome.residual, "margin": outcome.margin,
        })
    return MembershipResult(False, KNN, violation={
        "constraint": f"sos(level={r})", "value": outcome.margin, "moments": outcome.witness.y,
    })


def nn_membership(spec: ConeSpec, X, tol: float = MEMBERSHIP_TOL,
                  opts: Optional[SolverOptions] = None) -> MembershipResult:
    """Decide X = C₀(y) for some y with M_{n,4}(y) ⪰ 0."""
    X = _symmetric(spec, X)
    lam = float(np.linalg.eigvalsh(X)[0])
    if lam < -_psd_threshold(X, tol):
        return MembershipResult(False, NN, violation={"constraint": "psd", "value": lam})
    scale = float(np.max(np.abs(X)))
    if scale == 0.0:
        return MembershipResult(True, NN, certificate={"moments": np.zeros(moment_operator(spec.ambient_dim, 2).shape[1])})

    n = spec.ambient_dim
    F = moment_operator(n, 2)
    G = c0_upper_operator(spec)
    I, J = np.triu_indices(n)
    prog = LmiProgram(
        cone=ConeSpec.of(psd(len(enumerate_monomials(n, 2)))),
        f0=np.zeros(F.shape[0]),
        F=F,
        f=np.zeros(F.shape[1]),
        G=G,
        h=X[I, J] / scale,
        name="nn-membership",
    )
    result = solve_feasibility(prog, opts, eps=tol)
    if result.status == INDETERMINATE:
        raise SolverError(f"NN feasibility solve ended with {result.solution.status}")
    if not result.feasible:
        return MembershipResult(False, NN, violation={"constraint": "moment", "value": result.t})
    y = MomentVector(n=n, y=result.point * scale)
    return MembershipResult(True, NN, certificate={"moments": y.y, "margin": result.t})


def bd_membership(spec: ConeSpec, X, tol: float = MEMBERSHIP_TOL) -> MembershipResult:
    if spec.has_psd:
        raise Unsupported("BD membership needs nonnegative and second-order blocks only")
    X = _symmetric(spec, X)
    lam = float(np.linalg.eigvalsh(X)[0])
    if lam < -_psd_threshold(X, tol):
        return MembershipResult(False, BD, violation={"constraint": "psd", "value": lam})
    outcome = separate(spec, X, gamma=tol)
    if outcome.kind == INSIDE:
        return MembershipResult(True, BD, certificate={"min_eigenvalue": lam, "cases": outcome.case_values})
    return MembershipResult(False, BD, violation={
        "constraint": outcome.source,
        "value": outcome.value,
        "witness": outcome.witness,
        "H": outcome.H,
    })


def check_membership(spec: ConeSpec, X, variant: str, tol: float = MEMBERSHIP_TOL,
                     level: int = 0, opts: Optional[SolverOptions] = None) -> MembershipResult:
    if variant == ZVP:
        return zvp_membership(spec, X, tol)
    if variant == NN:
        return nn_membership(spec, X, tol, opts)
    if variant == BD:
        return bd_membership(spec, X, tol)
    if variant == KZVP0:
        return kzvp0_membership(spec, X, tol, opts)
    if variant == KNN:
        return knn_membership(spec, X, level, tol, opts)
    raise ValueError(f"unknown membership variant '{variant}'")
