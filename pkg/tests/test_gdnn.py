import numpy as np
import pytest

from gdnn.c0 import c0_adjoint, nn_c0, nn_c0_closed_form
from gdnn.examples import (
    kzvp_gap_matrix,
    psd_epsilon_matrix,
    rank_one_members,
    sample_cone_point,
    soc_spec,
)
from gdnn.membership import (
    bd_membership,
    check_membership,
    knn_membership,
    kzvp0_membership,
    nn_membership,
    zvp_generators,
    zvp_membership,
)
from gdnn.models import BD, MEMBERSHIP_TOL, NN, ZVP, Unsupported
from jordan.algebra import identity, jordan_product
from jordan.models import ConeSpec, DimensionMismatch, nonneg, second_order
from polymoment.monomials import enumerate_monomials, evaluate_form, point_moments


def _integer_moments(spec, rng):
    width = len(enumerate_monomials(spec.ambient_dim, 4))
    return rng.integers(-5, 6, size=width).astype(float)


def test_generators_soc(spec_r1_l3):
    gens = zvp_generators(spec_r1_l3)
    assert len(gens.J_list) == 1
    assert np.array_equal(gens.J_list[0][1], np.diag([0.0, 1.0, -1.0, -1.0]))
    assert gens.nonneg_index_set == [0, 1]
    assert gens.Jij_list == []


def test_generators_psd(spec_r1_psd2):
    gens = zvp_generators(spec_r1_psd2)
    assert gens.J_list == []
    assert len(gens.Jij_list) == 1
    _, i, j, J = gens.Jij_list[0]
    assert (i, j) == (0, 1)
    assert J[1, 3] == J[3, 1] == 1.0
    assert J[2, 2] == -1.0
    assert np.count_nonzero(J) == 3
    assert gens.nonneg_index_set == [0, 1, 3]


def test_generators_pure_nonneg():
    gens = zvp_generators(ConeSpec.of(nonneg(3)))
    assert gens.matrices() == []
    assert gens.nonneg_index_set == [0, 1, 2]


def test_generator_traces(spec_r2_l3_l4):
    for h, J in zvp_generators(spec_r2_l3_l4).J_list:
        assert np.trace(J) == 1 - (spec_r2_l3_l4.blocks[h].dim - 1)


def test_zvp_member_example(spec_r1_l3, zvp_member_matrix):
    expected = np.array([[2, 0, 1, 1], [0, 2, 0, 0], [1, 0, 1, 0], [1, 0, 0, 1]], dtype=float)
    assert np.array_equal(zvp_member_matrix, expected)
    assert zvp_membership(spec_r1_l3, zvp_member_matrix).member


def test_zvp_rejects_bd_example(spec_r1_l3, bd_member_matrix):
    result = zvp_membership(spec_r1_l3, bd_member_matrix)
    assert not result.member
    assert result.violation["value"] == pytest.approx(1 - np.sqrt(2))
    assert result.violation["constraint"].startswith("<J[1]")


def test_identity_outer_product_is_member(spec_mixed):
    e = identity(spec_mixed)
    assert zvp_membership(spec_mixed, np.outer(e, e)).member


def test_zvp_reports_psd_violation(spec_r1_l3):
    result = zvp_membership(spec_r1_l3, -np.eye(4))
    assert not result.member
    assert result.violation["constraint"] == "psd"


def test_zvp_dimension_mismatch(spec_r1_l3):
    with pytest.raises(DimensionMismatch):
        zvp_membership(spec_r1_l3, np.eye(3))


def test_zvp_on_orthant_is_dnn(rng):
    spec = ConeSpec.of(nonneg(3))
    for _ in range(50):
        W = rng.standard_normal((3, 3))
        X = W @ W.T + 0.1 * np.eye(3)
        expected = bool(np.all(X >= 0))
        assert zvp_membership(spec, X).member == expected


def test_bd_membership_examples(spec_r1_l3, zvp_member_matrix, bd_member_matrix):
    assert bd_membership(spec_r1_l3, bd_member_matrix).member
    result = bd_membership(spec_r1_l3, zvp_member_matrix)
    assert not result.member
    assert result.violation["constraint"] == "NnoSoc"


def test_bd_rejects_psd_blocks(spec_r1_psd2):
    with pytest.raises(Unsupported):
        bd_membership(spec_r1_psd2, np.eye(4))


def test_cone_generators_pass_every_membership(spec_r1_l3, rng):
    for _ in range(3):
        z = sample_cone_point(spec_r1_l3, rng)
        X = np.outer(z, z)
        for variant in (ZVP, BD, NN):
            assert check_membership(spec_r1_l3, X, variant).member, variant


def test_unknown_variant(spec_r1_l3):
    with pytest.raises(ValueError):
        check_membership(spec_r1_l3, np.eye(4), "sos")


def test_c0_on_orthant(rng):
    spec = ConeSpec.of(nonneg(3))
    y = _integer_moments(spec, rng)
    basis = enumerate_monomials(3, 4)
    C = nn_c0(spec, y)
    for I in range(3):
        for J in range(3):
            alpha = [0, 0, 0]
            alpha[I] += 2
            alpha[J] += 2
            assert C[I, J] == y[basis.position(tuple(alpha))]


def test_c0_point_moments(spec_r1_l3, rng):
    x = rng.standard_normal(4)
    sq = jordan_product(spec_r1_l3, x, x)
    assert np.allclose(nn_c0(spec_r1_l3, point_moments(x, 4)), np.outer(sq, sq))


@pytest.mark.parametrize("spec", [
    ConeSpec.of(nonneg(1), second_order(3)),
    ConeSpec.of(nonneg(2), second_order(3)),
])
def test_c0_matches_closed_form(spec, rng):
    for _ in range(50):
        y = _integer_moments(spec, rng)
        assert np.array_equal(nn_c0(spec, y), nn_c0_closed_form(spec, y))


def test_c0_is_linear(spec_r2_l3_l4, rng):
    y1, y2 = _integer_moments(spec_r2_l3_l4, rng), _integer_moments(spec_r2_l3_l4, rng)
    lhs = nn_c0(spec_r2_l3_l4, 3.0 * y1 - 2.0 * y2)
    rhs = 3.0 * nn_c0(spec_r2_l3_l4, y1) - 2.0 * nn_c0(spec_r2_l3_l4, y2)
    assert np.array_equal(lhs, rhs)


def test_c0_adjoint_pairing(spec_r1_l3, rng):
    A = rng.standard_normal((4, 4))
    A = A + A.T
    y = rng.standard_normal(len(enumerate_monomials(4, 4)))
    assert y @ c0_adjoint(spec_r1_l3, A).coeffs == pytest.approx(np.sum(nn_c0(spec_r1_l3, y) * A))
    x = rng.standard_normal(4)
    sq = jordan_product(spec_r1_l3, x, x)
    assert evaluate_form(c0_adjoint(spec_r1_l3, A), x) == pytest.approx(sq @ A @ sq)


def test_closed_form_rejects_psd(spec_r1_psd2):
    with pytest.raises(Unsupported):
        nn_c0_closed_form(spec_r1_psd2, np.zeros(len(enumerate_monomials(4, 4))))


def test_kzvp0_generator_and_psd_members(spec_r1_l3, rng):
    J = zvp_generators(spec_r1_l3).J_list[0][1]
    assert kzvp0_membership(spec_r1_l3, J).member
    W = rng.standard_normal((4, 4))
    assert kzvp0_membership(spec_r1_l3, W @ W.T).member


def test_kzvp0_certificate_reassembles(spec_r1_l3, rng):
    J = zvp_generators(spec_r1_l3).J_list[0][1]
    W = rng.standard_normal((4, 4))
    N = np.zeros((4, 4))
    N[0, 1] = N[1, 0] = 0.7
    A = W @ W.T + 2.0 * J + N
    result = kzvp0_membership(spec_r1_l3, A)
    assert result.member
    cert = result.certificate
    rebuilt = cert["P"] + sum(t * G for t, G in zip(cert["t"], [J])) + cert["N"]
    assert np.allclose(rebuilt, A, atol=1e-5)


def test_dual_side_strict_inclusion(spec_r1_l3):
    A = kzvp_gap_matrix(spec_r1_l3)
    assert A[0, 1] == A[0, 2] == 1.0
    assert not kzvp0_membership(spec_r1_l3, A).member
    assert knn_membership(spec_r1_l3, A, r=0).member


def test_psd_epsilon_example():
    spec, A = psd_epsilon_matrix(2, 0.5)
    assert np.allclose(A[0, 1:], [1.0, 0.5, 1.0])
    assert not kzvp0_membership(spec, A).member
    assert knn_membership(spec, A, r=0).member


def test_knn_rejects_negative_identity(spec_r1_l3):
    result = knn_membership(spec_r1_l3, -np.eye(4), r=0)
    assert not result.member
    assert not knn_membership(spec_r1_l3, -np.eye(4), r=1).member


def test_knn_contains_psd(spec_r1_l3, rng):
    W = rng.standard_normal((4, 4))
    assert knn_membership(spec_r1_l3, W @ W.T, r=0).member


def test_knn_negative_level_rejected(spec_r1_l3):
    with pytest.raises(ValueError):
        knn_membership(spec_r1_l3, np.eye(4), r=-1)


def test_nn_rank_one_member(spec_r1_l3, rng):
    x = rng.standard_normal(4)
    sq = jordan_product(spec_r1_l3, x, x)
    X = np.outer(sq, sq)
    result = nn_membership(spec_r1_l3, X)
    assert result.member
    assert np.allclose(nn_c0(spec_r1_l3, result.certificate["moments"]), X, atol=1e-5 * np.max(np.abs(X)))


def test_nn_rejects_indefinite(spec_r1_l3):
    result = nn_membership(spec_r1_l3, np.diag([1.0, 1.0, 1.0, -1.0]))
    assert not result.member
    assert result.violation["constraint"] == "psd"


@pytest.mark.slow
@pytest.mark.parametrize("dim", [3, 4])
def test_nn_and_zvp_coincide_on_single_soc(dim, rng):
    spec = ConeSpec.of(second_order(dim))
    J = zvp_generators(spec).J_list[0][1]
    checked = 0
    while checked < 100:
        W = rng.standard_normal((dim, dim))
        X = W @ W.T + rng.uniform(-1.5, 0.5) * np.eye(dim)
        lam = np.linalg.eigvalsh(X)[0]
        inner = np.sum(J * X)
        if abs(lam) < 0.05 or abs(inner) < 0.1:
            continue
        expected = lam > 0 and inner > 0
        assert zvp_membership(spec, X).member == expected
        assert nn_membership(spec, X).member == expected
        checked += 1


def _mixed_sample(spec, rng, kind):
    n = spec.ambient_dim
    if kind == 0:
        return rank_one_members(spec, rng, k=int(rng.integers(1, 4)))
    W = rng.standard_normal((n, n))
    if kind == 1:
        return W @ W.T
    if kind == 2:
        return W @ W.T - rng.uniform(0.5, 2.0) * n * np.eye(n)
    gens = zvp_generators(spec)
    A = W @ W.T
    for J in gens.matrices():
        A += rng.uniform(0.0, 2.0) * J
    a, b = rng.choice(gens.nonneg_index_set, size=2, replace=False)
    bump = rng.uniform(0.0, 1.0)
    A[a, b] += bump
    A[b, a] += bump
    return A


@pytest.mark.slow
@pytest.mark.parametrize("spec", [soc_spec(1, 3), ConeSpec.of(nonneg(2), second_order(3), second_order(4))],
                         ids=["r1_l3", "r2_l3_l4"])
def test_membership_inclusions(spec, rng):
    for k in range(100):
        kind = k % 4
        X = _mixed_sample(spec, rng, kind)
        scale = max(1.0, float(np.max(np.abs(X))))
        lam = np.linalg.eigvalsh(X)[0]
        zvp = zvp_membership(spec, X)
        if zvp.member:
            assert lam >= -MEMBERSHIP_TOL * max(1.0, abs(np.trace(X)))
        if kind == 0:
            assert zvp.member
            assert nn_membership(spec, X).member
        elif not zvp.member and zvp.violation["value"] < -1e-3 * scale:
            assert not nn_membership(spec, X).member
        if kind in (1, 3):
            assert kzvp0_membership(spec, X).member
            assert knn_membership(spec, X, r=0).member
        elif kind == 2 and kzvp0_membership(spec, X).member:
            assert knn_membership(spec, X, r=0).member


def test_membership_result_to_dict(spec_r1_l3, bd_member_matrix):
    data = zvp_membership(spec_r1_l3, bd_member_matrix).to_dict()
    assert data["member"] is False
    assert data["variant"] == ZVP
    assert isinstance(data["violation"]["value"], float)
    assert bd_membership(spec_r1_l3, bd_member_matrix).to_dict()["variant"] == BD
