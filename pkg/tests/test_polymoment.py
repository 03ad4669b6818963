import numpy as np
import pytest

from polymoment.models import BasisTooLarge, Form, GramCertificate, MomentVector, SosInfeasible
from polymoment.moments import gram_form, moment_matrix, sos_decompose
from polymoment.monomials import (
    basis_size,
    enumerate_monomials,
    evaluate_form,
    multiply_by_norm_power,
    multiply_quadratics,
    point_moments,
)


def _form(n, degree, terms):
    basis = enumerate_monomials(n, degree)
    coeffs = np.zeros(len(basis))
    for alpha, value in terms.items():
        coeffs[basis.position(alpha)] = value
    return Form(n=n, degree=degree, coeffs=coeffs)


def test_enumeration_order():
    assert enumerate_monomials(2, 2).monomials == [(2, 0), (1, 1), (0, 2)]


def test_basis_sizes():
    assert len(enumerate_monomials(4, 2)) == 10
    assert len(enumerate_monomials(16, 4)) == 3876
    assert basis_size(5, 2) == 15


def test_basis_cap():
    with pytest.raises(BasisTooLarge):
        enumerate_monomials(40, 8, cap=1000)


def test_moment_matrix_single_variable():
    assert np.allclose(moment_matrix(np.array([3.0]), n=1), [[3.0]])


def test_moment_matrix_of_point_is_rank_one(rng):
    x = rng.standard_normal(3)
    y = MomentVector(n=3, y=point_moments(x, 4))
    m = point_moments(x, 2)
    M = moment_matrix(y)
    assert np.allclose(M, np.outer(m, m))
    assert np.allclose(moment_matrix(MomentVector(n=2, y=point_moments([1.0, 1.0]))), np.ones((3, 3)))


def test_moment_matrix_symmetric(rng):
    y = rng.standard_normal(len(enumerate_monomials(3, 4)))
    M = moment_matrix(y, n=3)
    assert np.allclose(M, M.T)


def test_multiply_quadratics_monomials():
    E11 = np.diag([1.0, 0.0])
    E22 = np.diag([0.0, 1.0])
    square = multiply_quadratics(E11, E11)
    assert square.coeffs[enumerate_monomials(2, 4).position((4, 0))] == 1.0
    mixed = multiply_quadratics(E11, E22)
    assert mixed.coeffs[enumerate_monomials(2, 4).position((2, 2))] == 1.0
    assert np.count_nonzero(mixed.coeffs) == 1


def test_multiply_quadratics_pointwise(rng):
    A = rng.standard_normal((4, 4))
    B = rng.standard_normal((4, 4))
    A, B = A + A.T, B + B.T
    theta = multiply_quadratics(A, B)
    assert np.allclose(theta.coeffs, multiply_quadratics(B, A).coeffs)
    for _ in range(20):
        x = rng.standard_normal(4)
        expected = (x @ A @ x) * (x @ B @ x)
        assert evaluate_form(theta, x) == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_norm_power():
    theta = _form(2, 2, {(2, 0): 1.0})
    assert multiply_by_norm_power(theta, 0) is theta
    out = multiply_by_norm_power(theta, 1)
    expected = _form(2, 4, {(4, 0): 1.0, (2, 2): 1.0})
    assert np.allclose(out.coeffs, expected.coeffs)


def test_norm_power_pointwise(rng):
    theta = Form(n=3, degree=4, coeffs=rng.standard_normal(len(enumerate_monomials(3, 4))))
    out = multiply_by_norm_power(theta, 2)
    assert out.degree == 8
    x = rng.standard_normal(3)
    assert evaluate_form(out, x) == pytest.approx((x @ x) ** 2 * evaluate_form(theta, x))


def test_gram_form_matches_quadratic(rng):
    G = rng.standard_normal((3, 3))
    G = G @ G.T
    theta = gram_form(G, 2)
    x = rng.standard_normal(2)
    m = point_moments(x, 2)
    assert evaluate_form(theta, x) == pytest.approx(m @ G @ m)


def test_moment_duality(rng):
    for _ in range(10):
        L = rng.standard_normal((6, 6))
        theta = gram_form(L @ L.T, 3)
        pts = rng.standard_normal((4, 3))
        y = sum(point_moments(p, 4) for p in pts)
        assert y @ theta.coeffs >= -1e-8 * np.linalg.norm(y) * np.linalg.norm(theta.coeffs)


def test_sos_of_explicit_square():
    # (x1² - x2²)²
    theta = _form(2, 4, {(4, 0): 1.0, (2, 2): -2.0, (0, 4): 1.0})
    cert = sos_decompose(theta)
    assert isinstance(cert, GramCertificate)
    assert cert.residual <= 1e-6
    assert cert.min_eigenvalue >= -1e-6
    assert np.allclose(gram_form(cert.gram, 2).coeffs, theta.coeffs, atol=1e-6)


def test_sos_infeasible_returns_witness():
    theta = _form(2, 4, {(2, 2): 1.0, (4, 0): -1.0})
    out = sos_decompose(theta)
    assert isinstance(out, SosInfeasible)
    assert out.witness.y @ theta.coeffs < 0
    assert np.linalg.eigvalsh(moment_matrix(out.witness))[0] >= -1e-6


def test_sum_of_random_squares_is_sos(rng):
    n = 3
    basis = enumerate_monomials(n, 2)
    vecs = rng.standard_normal((3, len(basis)))
    theta = gram_form(vecs.T @ vecs, n)
    cert = sos_decompose(theta)
    assert isinstance(cert, GramCertificate)
    assert cert.residual <= 1e-6 * max(1.0, np.max(np.abs(theta.coeffs)))


def test_zero_form_is_trivially_sos():
    theta = Form(n=2, degree=4, coeffs=np.zeros(5))
    cert = sos_decompose(theta)
    assert isinstance(cert, GramCertificate)
    assert np.allclose(cert.gram, 0.0)


def test_odd_degree_rejected():
    with pytest.raises(ValueError):
        sos_decompose(Form(n=2, degree=3, coeffs=np.ones(4)))


def test_form_dict_roundtrip():
    theta = _form(3, 4, {(2, 1, 1): 2.5, (0, 0, 4): -1.0})
    data = theta.to_dict()
    assert "(2,1,1)" in data["coeffs"]
    back = Form.from_dict(data)
    assert back.n == 3 and back.degree == 4
    assert np.allclose(back.coeffs, theta.coeffs)


def test_form_from_dict_rejects_wrong_degree():
    with pytest.raises(ValueError):
        Form.from_dict({"n": 2, "degree": 4, "coeffs": {"(1,1)": 1.0}})
