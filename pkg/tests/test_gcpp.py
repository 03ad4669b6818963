import numpy as np
import pytest

from bdsep.models import INSIDE
from bdsep.oracle import separate
from conicsolver.models import OPTIMAL
from gcpp.bruteforce import misocp_bruteforce
from gcpp.burer import burer_reformulate, lift_positions, lifted_cone, rank_one_lift
from gcpp.exchange import cut_operator, fixed_idempotents, solve_bd_exchange
from gcpp.models import BD, NN, SDP, ZVP, ExchangeParams, MisocpInstance, RelaxationResult
from gcpp.relaxations import build_relaxation, solve_relaxation
from jordan.algebra import jordan_product, svec
from jordan.models import NONNEG, SOC


@pytest.fixture
def small_instance():
    return MisocpInstance(n=3, c=np.array([-1.0, 0.4, -0.7]), binary=(3,))


def test_instance_validation():
    with pytest.raises(ValueError):
        MisocpInstance(n=1, c=np.zeros(1))
    with pytest.raises(ValueError):
        MisocpInstance(n=3, c=np.zeros(3), binary=(1,))
    with pytest.raises(ValueError):
        MisocpInstance(n=3, c=np.zeros(2))
    with pytest.raises(ValueError):
        MisocpInstance(n=3, c=np.zeros(3), binary=(2, 2))


def test_instance_from_dict_missing_field():
    with pytest.raises(ValueError, match="c"):
        MisocpInstance.from_dict({"n": 3})


def test_instance_from_file(write_doc):
    path = write_doc("inst.yaml", {"n": 3, "c": [1.0, -1.0, 0.5], "binary": [3, 2]})
    inst = MisocpInstance.from_file(path)
    assert inst.binary == (2, 3)
    assert inst.binary_positions == [1, 2]
    assert np.allclose(inst.upper_bounds, [2.0, 1.0, 1.0])


def test_lift_layout():
    u, v, x = lift_positions(2)
    assert list(u) == [1, 2] and list(v) == [3, 4] and list(x) == [5, 6]
    cone = lifted_cone(2)
    assert [b.kind for b in cone.blocks] == [NONNEG, SOC]
    assert cone.ambient_dim == 7


def test_burer_counts():
    g = burer_reformulate(MisocpInstance(n=2, c=np.array([1.0, 1.0]), binary=(2,)))
    assert g.order == 7
    assert g.n_constraints == 10
    for A, _ in g.constraints:
        assert np.allclose(A, A.T)


def test_rank_one_lift_is_feasible(rng):
    inst = MisocpInstance(n=4, c=rng.standard_normal(4), binary=(2, 4))
    g = burer_reformulate(inst)
    x = np.array([1.8, 1.0, 0.3, 0.0])
    Y = rank_one_lift(inst, x)
    assert g.residual(Y) <= 1e-12
    assert np.sum(g.C * Y) == pytest.approx(inst.c @ x)


def test_rank_one_lift_flags_fractional_binary():
    inst = MisocpInstance(n=3, c=np.zeros(3), binary=(2,))
    g = burer_reformulate(inst)
    Y = rank_one_lift(inst, np.array([1.0, 0.5, 0.0]))
    assert g.residual(Y) == pytest.approx(0.25)


def test_rank_one_lift_shape_check():
    inst = MisocpInstance(n=3, c=np.zeros(3))
    with pytest.raises(ValueError):
        rank_one_lift(inst, np.zeros(2))


def test_bruteforce_examples():
    value, x = misocp_bruteforce(MisocpInstance(n=2, c=np.array([-1.0, -1.0]), binary=(2,)))
    assert value == pytest.approx(-3.0, abs=1e-6)
    assert np.allclose(x, [2.0, 1.0], atol=1e-5)
    value, _ = misocp_bruteforce(MisocpInstance(n=2, c=np.array([1.0, 2.0]), binary=(2,)))
    assert value == pytest.approx(0.0, abs=1e-6)


def test_bruteforce_workers_agree(small_instance):
    serial, _ = misocp_bruteforce(small_instance)
    threaded, _ = misocp_bruteforce(small_instance, workers=3)
    assert threaded == pytest.approx(serial, abs=1e-8)


def test_bruteforce_many_ones_branch():
    # all five tail coordinates binary and rewarded; at most four can be one
    inst = MisocpInstance(n=6, c=np.array([0.0, -1.0, -1.0, -1.0, -1.0, -1.0]), binary=(2, 3, 4, 5, 6))
    value, x = misocp_bruteforce(inst)
    assert value == pytest.approx(-4.0, abs=1e-6)
    assert x[0] == pytest.approx(2.0)


def test_build_relaxation_shapes(small_instance):
    g = burer_reformulate(small_instance)
    sdp = build_relaxation(g, SDP)
    assert sdp.cone.ambient_dim == g.order * (g.order + 1) // 2
    assert sdp.A.shape[0] == g.n_constraints
    zvp = build_relaxation(g, ZVP)
    n = small_instance.n
    # one J per second-order block plus the nonnegative pairs of I_{≥0}
    assert zvp.A.shape[0] - g.n_constraints == 1 + (2 * n + 2) * (2 * n + 3) // 2
    with pytest.raises(ValueError):
        build_relaxation(g, BD)


def test_sdp_regularisation_only_by_default(small_instance):
    g = burer_reformulate(small_instance)
    assert not np.allclose(build_relaxation(g, SDP).c, svec(g.C))
    assert np.allclose(build_relaxation(g, SDP, regularize=False).c, svec(g.C))
    assert np.allclose(build_relaxation(g, ZVP).c[: svec(g.C).size], svec(g.C))


def test_cut_operator_applies_matrix(rng):
    Y = rng.standard_normal((5, 5))
    Y = Y + Y.T
    s = rng.standard_normal(5)
    assert np.allclose(cut_operator(5, s) @ svec(Y), Y @ s)


def test_fixed_idempotents(spec_r1_l3, rng):
    S = fixed_idempotents(spec_r1_l3, 5, rng)
    assert S.shape == (4, 6)
    assert np.allclose(S[:, 0], [1.0, 0.0, 0.0, 0.0])
    for j in range(S.shape[1]):
        assert np.allclose(jordan_product(spec_r1_l3, S[:, j], S[:, j]), S[:, j])


def test_exchange_params():
    params = ExchangeParams.from_dict({"gamma_base": 0.25, "tau": 1e-4})
    assert params.gamma(2) == pytest.approx(0.0625)
    with pytest.raises(ValueError, match="bogus"):
        ExchangeParams.from_dict({"bogus": 1})
    with pytest.raises(ValueError):
        ExchangeParams(gamma_base=1.5)


def test_params_from_file(write_doc):
    params = ExchangeParams.from_file(write_doc("ex.yaml", {"n_random_idempotents": 10, "seed": 3}))
    assert params.n_random_idempotents == 10
    assert params.seed == 3


def test_result_to_dict_hides_matrix():
    result = RelaxationResult(SDP, 1.0, OPTIMAL, 0.1, Y=np.eye(2))
    assert "Y" not in result.to_dict()
    assert result.to_dict(include_matrix=True)["Y"] == [[1.0, 0.0], [0.0, 1.0]]


@pytest.mark.slow
def test_relaxation_orderings(small_instance):
    g = burer_reformulate(small_instance)
    best, _ = misocp_bruteforce(small_instance)
    sdp = solve_relaxation(g, SDP)
    zvp = solve_relaxation(g, ZVP)
    nn = solve_relaxation(g, NN)
    bd = solve_relaxation(g, BD, params=ExchangeParams(n_random_idempotents=50))
    for result in (sdp, zvp, nn, bd):
        assert result.status == OPTIMAL
    tol = 1e-5 * max(1.0, abs(best))
    assert sdp.value <= zvp.value + tol
    assert zvp.value <= nn.value + tol
    assert nn.value <= best + tol
    assert bd.value <= best + tol
    assert g.residual(zvp.Y) <= 1e-6


@pytest.mark.slow
def test_exchange_objective_never_decreases(small_instance):
    g = burer_reformulate(small_instance)
    params = ExchangeParams(n_random_idempotents=50)
    value, Y, trace = solve_bd_exchange(g, params)
    objectives = trace.objectives
    assert objectives
    for before, after in zip(objectives, objectives[1:]):
        assert after >= before - 1e-6 * max(1.0, abs(before))
    assert value == pytest.approx(np.sum(g.C * Y))
    assert np.linalg.eigvalsh(Y)[0] >= -1e-6
    assert separate(g.cone, Y, 2 * params.tau).kind == INSIDE
