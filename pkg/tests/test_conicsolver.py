import numpy as np
import pytest
import scipy.sparse as sp

from conicsolver.feasibility import solve_feasibility
from conicsolver.interchange import read_program, read_sdpa, write_program, write_sdpa
from conicsolver.ipm import eliminate_equalities, kkt_residuals, solve
from conicsolver.models import (
    NUMERICAL,
    OPTIMAL,
    STATUSES,
    BlockConicProgram,
    LmiProgram,
    SolverError,
    SolverOptions,
)
from jordan.algebra import SQRT2, in_cone, svec
from jordan.models import ConeSpec, nonneg, psd, second_order


def _schur_program():
    # min X11  s.t.  X12 = 1, X22 = 1, X ⪰ 0
    return BlockConicProgram(
        cone=ConeSpec.of(psd(2)),
        c=np.array([1.0, 0.0, 0.0]),
        A=np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]),
        b=np.array([SQRT2, 1.0]),
        name="schur",
    )


def _random_lp(rng, n=6, m=3):
    A = rng.standard_normal((m, n))
    x0 = rng.uniform(0.5, 1.5, n)
    y0 = rng.standard_normal(m)
    c = A.T @ y0 + rng.uniform(0.5, 1.5, n)
    return A, A @ x0, c


def test_psd_schur_complement():
    sol = solve(_schur_program())
    assert sol.status == OPTIMAL
    assert sol.primal_objective == pytest.approx(1.0, abs=1e-6)


def test_lp_lower_bound():
    # min x  s.t.  x - s = 3,  x, s ≥ 0
    prog = BlockConicProgram(
        cone=ConeSpec.of(nonneg(2)), c=np.array([1.0, 0.0]), A=np.array([[1.0, -1.0]]), b=np.array([3.0])
    )
    sol = solve(prog)
    assert sol.status == OPTIMAL
    assert sol.x[0] == pytest.approx(3.0, abs=1e-6)


def test_second_order_cone():
    prog = BlockConicProgram(
        cone=ConeSpec.of(second_order(2)), c=np.array([1.0, 0.0]), A=np.array([[0.0, 1.0]]), b=np.array([1.0])
    )
    sol = solve(prog)
    assert sol.status == OPTIMAL
    assert sol.primal_objective == pytest.approx(1.0, abs=1e-6)


def test_free_variables():
    # min x - y  s.t.  x + y = 2,  y free,  x ≥ 0  (bounded by  x - y = 2x - 2 ≥ -2)
    prog = BlockConicProgram(
        cone=ConeSpec.of(nonneg(1)), c=np.array([1.0, -1.0]), A=np.array([[1.0, 1.0]]), b=np.array([2.0]),
        free_dim=1,
    )
    sol = solve(prog)
    assert sol.status == OPTIMAL
    assert sol.primal_objective == pytest.approx(-2.0, abs=1e-6)


def test_optimal_solution_invariants(rng):
    A, b, c = _random_lp(rng)
    prog = BlockConicProgram(cone=ConeSpec.of(nonneg(6)), c=c, A=A, b=b)
    sol = solve(prog)
    assert sol.status == OPTIMAL
    assert sol.primal_objective >= sol.dual_objective - 1e-6 * (1 + abs(sol.primal_objective))
    kkt = kkt_residuals(prog, sol)
    assert kkt["primal"] <= 1e-6
    assert kkt["dual"] <= 1e-6
    assert kkt["complementarity"] <= 1e-6
    assert in_cone(prog.cone, sol.x, 1e-8)


def test_diagonal_sdp_matches_lp(rng):
    n = 4
    diag_pos = [j * (j + 1) // 2 + j for j in range(n)]
    L = n * (n + 1) // 2
    for _ in range(30):
        A, b, c = _random_lp(rng, n=n, m=2)
        lp = solve(BlockConicProgram(cone=ConeSpec.of(nonneg(n)), c=c, A=A, b=b))
        A_sdp = np.zeros((2, L))
        A_sdp[:, diag_pos] = A
        c_sdp = np.zeros(L)
        c_sdp[diag_pos] = c
        sdp = solve(BlockConicProgram(cone=ConeSpec.of(psd(n)), c=c_sdp, A=A_sdp, b=b))
        assert lp.status == OPTIMAL and sdp.status == OPTIMAL
        assert sdp.primal_objective == pytest.approx(lp.primal_objective, abs=1e-6)


def test_lmi_form():
    # min y  s.t.  [[y, 1], [1, 1]] ⪰ 0
    prog = LmiProgram(
        cone=ConeSpec.of(psd(2)),
        f0=svec(np.array([[0.0, 1.0], [1.0, 1.0]])),
        F=sp.csr_matrix(np.array([[1.0], [0.0], [0.0]])),
        f=np.array([1.0]),
    )
    sol = solve(prog)
    assert sol.status == OPTIMAL
    assert sol.y[0] == pytest.approx(1.0, abs=1e-6)


def test_lmi_with_equalities():
    # min y1 + y2  s.t.  diag(y1, y2) ≥ 0,  y1 - y2 = 1
    prog = LmiProgram(
        cone=ConeSpec.of(nonneg(2)),
        f0=np.zeros(2),
        F=sp.identity(2, format="csr"),
        f=np.array([1.0, 1.0]),
        G=sp.csr_matrix(np.array([[1.0, -1.0]])),
        h=np.array([1.0]),
    )
    sol = solve(prog)
    assert sol.status == OPTIMAL
    assert np.allclose(sol.y, [1.0, 0.0], atol=1e-6)


def test_eliminate_equalities():
    G = np.array([[1.0, 1.0, 0.0]])
    y0, N, consistent = eliminate_equalities(G, np.array([2.0]))
    assert consistent
    assert np.allclose(G @ y0, [2.0])
    assert N.shape == (3, 2)
    assert np.allclose(G @ N, 0.0)


def test_infeasible_psd_system():
    prog = BlockConicProgram(
        cone=ConeSpec.of(psd(2)), c=np.zeros(3), A=np.array([[1.0, 0.0, 0.0]]), b=np.array([-1.0])
    )
    result = solve_feasibility(prog)
    assert not result.feasible


def test_feasible_trace_system():
    prog = BlockConicProgram(
        cone=ConeSpec.of(psd(3)), c=np.zeros(6), A=svec(np.eye(3)).reshape(1, -1), b=np.array([1.0])
    )
    result = solve_feasibility(prog)
    assert result.feasible
    assert in_cone(prog.cone, result.point, 1e-7)


def test_feasible_from_interior_point(rng):
    cone = ConeSpec.of(nonneg(2), second_order(3), psd(2))
    x0 = np.concatenate([[1.0, 2.0], [2.0, 0.5, -0.5], svec(np.eye(2))])
    A = rng.standard_normal((4, cone.ambient_dim))
    prog = BlockConicProgram(cone=cone, c=np.zeros(cone.ambient_dim), A=A, b=A @ x0)
    result = solve_feasibility(prog)
    assert result.feasible
    assert np.allclose(A @ result.point, A @ x0, atol=1e-6)


def test_malformed_program_rejected():
    prog = BlockConicProgram(cone=ConeSpec.of(nonneg(2)), c=np.zeros(3), A=np.zeros((1, 2)), b=np.zeros(1))
    with pytest.raises(SolverError):
        solve(prog)


def test_options_from_file(tmp_path):
    path = tmp_path / "opts.yaml"
    path.write_text("max_iter: 50\ngap_tol: 1.0e-7\n")
    opts = SolverOptions.from_file(str(path))
    assert opts.max_iter == 50
    assert opts.gap_tol == 1e-7


def test_unknown_option_rejected():
    with pytest.raises(ValueError, match="bogus"):
        SolverOptions.from_dict({"bogus": 1})


def test_json_interchange(tmp_path):
    path = str(tmp_path / "schur.json")
    write_program(_schur_program(), path)
    back = read_program(path)
    assert solve(back).primal_objective == pytest.approx(1.0, abs=1e-6)


def test_sdpa_interchange():
    prog = LmiProgram(
        cone=ConeSpec.of(psd(2), nonneg(1)),
        f0=np.concatenate([svec(np.array([[0.0, 1.0], [1.0, 1.0]])), [0.0]]),
        F=sp.csr_matrix(np.array([[1.0], [0.0], [0.0], [1.0]])),
        f=np.array([1.0]),
        name="toy",
    )
    text = write_sdpa(prog)
    assert "np." not in text
    assert text.splitlines()[5].split()[-1] == "-1.0"
    back = read_sdpa(text)
    assert back.cone == prog.cone
    assert np.allclose(back.f0, prog.f0)
    assert np.allclose(back.F.toarray(), prog.F.toarray())
    assert solve(back).y[0] == pytest.approx(1.0, abs=1e-6)


def test_program_without_interior_point():
    # X11 = 0 forces X = diag(0, 1): feasible, but with no strictly feasible point
    prog = BlockConicProgram(
        cone=ConeSpec.of(psd(2)),
        c=np.array([0.0, SQRT2, 1.0]),
        A=np.array([[1.0, 0.0, 0.0], [1.0, 0.0, 1.0]]),
        b=np.array([0.0, 1.0]),
    )
    sol = solve(prog)
    assert sol.status in STATUSES
    assert np.all(np.isfinite(sol.x))
    if sol.status == OPTIMAL:
        assert sol.primal_objective == pytest.approx(1.0, abs=1e-4)


def test_step_failure_becomes_numerical_status(monkeypatch):
    def broken(*args, **kwargs):
        raise ValueError("not interior")

    monkeypatch.setattr("conicsolver.ipm.max_step", broken)
    sol = solve(_schur_program())
    assert sol.status == NUMERICAL
    assert sol.iterations == 0


def test_stalled_solve_returns_best_iterate():
    opts = SolverOptions(gap_tol=1e-30, feas_tol=1e-30, max_iter=60)
    sol = solve(_schur_program(), opts)
    assert sol.status == OPTIMAL
    assert sol.near_optimal()
    assert sol.primal_objective == pytest.approx(1.0, abs=1e-5)


def test_badly_scaled_rows(rng):
    A, b, c = _random_lp(rng)
    scale = np.array([1e3, 1.0, 1e-2])
    plain = solve(BlockConicProgram(cone=ConeSpec.of(nonneg(6)), c=c, A=A, b=b))
    scaled = solve(BlockConicProgram(cone=ConeSpec.of(nonneg(6)), c=c, A=scale[:, None] * A, b=scale * b))
    assert plain.status == OPTIMAL and scaled.status == OPTIMAL
    assert scaled.primal_objective == pytest.approx(plain.primal_objective, rel=1e-5, abs=1e-5)
    # dual of the scaled rows is the plain dual divided by the scale
    assert np.allclose(scaled.y * scale, plain.y, atol=1e-4)
