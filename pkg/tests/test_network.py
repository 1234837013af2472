import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from slpinn import network, sampling
from slpinn.bundle import DerivativeBundle
from slpinn.errors import ConfigurationError, ContractViolation, NumericOverflowError
from slpinn.network import NetworkParams, activation_derivs, forward_bundle, init_params, loss_and_grad
from slpinn.pde import CollocationSets, PdeKind, make_problem, median_kappa
from slpinn.verify import gradient_fd_check


def test_activation_kinds_are_exactly_two():
    assert {a.value for a in network.ActivationKind} == {"tanh", "relu"}


def test_tanh_at_zero():
    assert activation_derivs("tanh", 0.0) == (0.0, 1.0, 0.0, -2.0, 0.0)


def test_relu_inactive():
    assert all(float(d) == 0.0 for d in activation_derivs("relu", -1.0))


def test_relu_kink_convention():
    vals = activation_derivs("relu", np.array([0.0]))
    assert [float(v[0]) for v in vals] == [0.0, 0.0, 0.0, 0.0, 0.0]


def _fd_chain(z, h=1e-5):
    out = []
    for k in range(1, 5):
        plus = activation_derivs("tanh", z + h)[k - 1]
        minus = activation_derivs("tanh", z - h)[k - 1]
        out.append((plus - minus) / (2 * h))
    return out


def test_tanh_half_matches_fd():
    z = 0.5
    exact = activation_derivs("tanh", z)
    assert exact[0] == pytest.approx(np.tanh(0.5), rel=1e-15)
    for k, fd in enumerate(_fd_chain(np.array(z)), start=1):
        assert abs(exact[k] - fd) <= 1e-7 * max(abs(exact[k]), 1.0)


@given(st.floats(-20, 20))
def test_tanh_chain_property(z):
    exact = activation_derivs("tanh", np.array(z))
    for k, fd in enumerate(_fd_chain(np.array(z)), start=1):
        assert abs(exact[k] - fd) <= 1e-6 * max(abs(float(exact[k])), 1e-3)


@given(st.floats(-50, 50).filter(lambda z: abs(z) > 1e-3))
def test_relu_chain_exact_off_kink(z):
    s, d1, d2, d3, d4 = (float(v) for v in activation_derivs("relu", np.array(z)))
    assert s == max(z, 0.0)
    assert d1 == (1.0 if z > 0 else 0.0)
    assert d2 == d3 == d4 == 0.0


def test_init_deterministic():
    a = init_params(4, 1, "tanh", 7)
    b = init_params(4, 1, "tanh", 7)
    assert np.array_equal(a.to_vector(), b.to_vector())


def test_init_glorot_bound():
    p = init_params(16, 2, "relu", 0)
    assert np.all(np.abs(p.W) <= np.sqrt(6 / 18))
    assert np.all(np.abs(p.v) <= np.sqrt(6 / 17))


def test_init_zero_biases():
    p = init_params(1, 1, "tanh", 99)
    assert p.b.tolist() == [0.0] and p.c == 0.0


@pytest.mark.parametrize("d", [0, 3])
def test_init_rejects_input_dim(d):
    with pytest.raises(ConfigurationError):
        init_params(4, d, "tanh", 0)


def test_param_vector_roundtrip(rng):
    p = init_params(5, 2, "tanh", 3)
    p.b = rng.normal(size=5)
    p.c = 0.7
    q = NetworkParams.from_vector(p.to_vector(), 5, 2)
    assert np.array_equal(q.to_vector(), p.to_vector())
    assert p.size == 5 * 2 + 5 + 5 + 1


def _unit_params():
    return NetworkParams(W=np.array([[1.0]]), b=np.array([0.0]), v=np.array([1.0]), c=0.0)


def test_forward_bundle_unit_tanh():
    b = forward_bundle(_unit_params(), "tanh", np.array([0.0]), {"u", "u_x", "u_xx", "u_xxx"})
    assert (b.u, b.u_x, b.u_xx, b.u_xxx) == (0.0, 1.0, 0.0, -2.0)


def test_forward_bundle_unit_relu():
    b = forward_bundle(_unit_params(), "relu", np.array([2.0]), {"u", "u_x", "u_xx", "u_xxx"})
    assert (b.u, b.u_x, b.u_xx, b.u_xxx) == (2.0, 1.0, 0.0, 0.0)


def test_forward_bundle_only_requested():
    b = forward_bundle(_unit_params(), "tanh", np.array([0.3]), {"u_x"})
    assert b.present == {"u_x"}
    with pytest.raises(ContractViolation):
        b["u"]


@pytest.mark.parametrize("name", ["u_t", "u_tt"])
def test_time_derivative_in_1d_is_violation(name):
    with pytest.raises(ContractViolation):
        forward_bundle(_unit_params(), "tanh", np.array([0.0]), {name})


def _random_params(rng, width=8, d=2, scale=1.0):
    return NetworkParams(W=scale * rng.normal(size=(width, d)), b=rng.normal(size=width),
                         v=rng.normal(size=width), c=float(rng.normal()))


def test_forward_bundle_matches_fd(rng):
    # each entry against a central difference of the entry one order below
    p = _random_params(rng)
    h = 1e-5
    lower = {"u_x": ("u", 0), "u_xx": ("u_x", 0), "u_xxx": ("u_xx", 0), "u_t": ("u", 1), "u_tt": ("u_t", 1)}
    names = ("u", "u_x", "u_xx", "u_xxx", "u_t", "u_tt")
    for _ in range(5):
        x = rng.uniform(-1, 1, size=2)
        b = forward_bundle(p, "tanh", x, names)
        for name, (base, axis) in lower.items():
            e = np.zeros(2)
            e[axis] = h
            plus = forward_bundle(p, "tanh", x + e, {base})[base]
            minus = forward_bundle(p, "tanh", x - e, {base})[base]
            fd = (plus - minus) / (2 * h)
            assert abs(b[name] - fd) <= 1e-6 * max(abs(b[name]), 1.0), name


def test_forward_batch_equals_pointwise(rng):
    p = _random_params(rng)
    X = rng.uniform(-1, 1, size=(7, 2))
    batch = forward_bundle(p, "tanh", X, {"u", "u_xx", "u_t"})
    for i, x in enumerate(X):
        single = forward_bundle(p, "tanh", x, {"u", "u_xx", "u_t"})
        assert single.u == pytest.approx(batch.u[i], rel=1e-13, abs=1e-14)
        assert single.u_xx == pytest.approx(batch.u_xx[i], rel=1e-13, abs=1e-14)


@given(st.floats(-4, 4).filter(lambda s: abs(s) > 1e-3), st.sampled_from(["tanh", "relu"]))
def test_output_weight_scaling(lam, act):
    rng = np.random.default_rng(0)
    p = _random_params(rng)
    p.c = 0.0
    q = NetworkParams(W=p.W, b=p.b, v=lam * p.v, c=0.0)
    X = rng.uniform(-1, 1, size=(6, 2))
    names = ("u", "u_x", "u_xx", "u_xxx", "u_t", "u_tt")
    a = forward_bundle(p, act, X, names)
    b = forward_bundle(q, act, X, names)
    for n in names:
        np.testing.assert_allclose(b[n], lam * a[n], rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("kind", list(PdeKind))
def test_gradient_matches_fd(kind):
    kappa = None if kind is PdeKind.POISSON else median_kappa(kind)
    assert gradient_fd_check(kind, kappa) < 1e-5


def test_kdv_kappa1_gradient_uses_fourth_derivative():
    assert gradient_fd_check("kdv", 1.0) < 1e-5


def test_fd_gap_shrinks_like_step_squared():
    # The analytic gradient is exact, so the gap is pure FD truncation: O(h^2).
    coarse = gradient_fd_check("sine_gordon", 2.0, seed=2, step=1e-3)
    fine = gradient_fd_check("sine_gordon", 2.0, seed=2, step=1e-4)
    assert fine < coarse / 50


def test_zero_residual_problem_has_zero_loss_and_grad():
    problem = make_problem("allen_cahn", 4.0)
    # u = 0 satisfies the PDE and periodicity; initial targets of 0 complete the setup
    p = NetworkParams(W=np.ones((3, 2)), b=np.zeros(3), v=np.zeros(3), c=0.0)
    pts = np.array([[0.1, 0.2], [0.5, 0.5]])
    colloc = CollocationSets(interior=pts, bc_points=np.array([[-1.0, 0.3]]), bc_partners=np.array([[1.0, 0.3]]),
                             ic_points=np.array([[0.2, 0.0]]), ic_u=np.array([0.0]))
    loss, grad = loss_and_grad(p, "tanh", problem, colloc)
    assert loss == 0.0
    # every residual is zero, so every gradient contribution carries a zero factor
    assert not np.any(grad.to_vector())


def test_loss_is_weighted_sum_of_means(rng):
    problem = make_problem("sine_gordon", 1.0)
    colloc = sampling.make_collocation(problem, sampling.RngStream(1), n_interior=32, n_boundary=8, n_initial=8)
    p = init_params(6, 2, "tanh", 1)
    terms, _ = network.loss_terms_and_grad(p, "tanh", problem, colloc, (2.0, 3.0, 0.5))
    assert terms["total"] == pytest.approx(2 * terms["pde"] + 3 * terms["bc"] + 0.5 * terms["ic"], rel=1e-15)


def test_missing_initial_set_is_configuration_error():
    problem = make_problem("kdv", 1.0)
    colloc = CollocationSets(interior=np.zeros((2, 2)), bc_points=np.array([[-5.0, 0.0]]),
                             bc_targets=np.array([0.0]))
    with pytest.raises(ConfigurationError):
        loss_and_grad(init_params(2, 2, "tanh", 0), "tanh", problem, colloc)


def test_overflow_names_term():
    problem = make_problem("poisson")
    colloc = sampling.make_collocation(problem, sampling.RngStream(0), n_interior=8)
    p = init_params(4, 1, "relu", 0)
    p.v[:] = np.inf
    with pytest.raises(NumericOverflowError) as info:
        loss_and_grad(p, "relu", problem, colloc)
    assert info.value.term in {"pde", "bc", "grad"}


def test_bit_reproducible_loss_and_grad():
    problem = make_problem("kdv", 2.0)
    colloc = sampling.make_collocation(problem, sampling.RngStream(5), n_interior=64, n_boundary=16, n_initial=16)
    p = init_params(16, 2, "tanh", 5)
    l1, g1 = loss_and_grad(p, "tanh", problem, colloc)
    l2, g2 = loss_and_grad(p, "tanh", problem, colloc)
    assert l1 == l2 and np.array_equal(g1.to_vector(), g2.to_vector())


def test_mutated_third_derivative_breaks_kdv_gradient(monkeypatch):
    chain = network.TANH_CHAIN.copy()
    chain[3] = -chain[3]
    monkeypatch.setattr(network, "TANH_CHAIN", chain)
    assert gradient_fd_check("kdv", 1.0) > 1e-3
