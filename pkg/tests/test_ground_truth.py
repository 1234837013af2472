import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from slpinn import ground_truth as gt
from slpinn.errors import AccuracyError, ConfigurationError
from slpinn.pde import kappa_grid


def _grid(x_domain, nx=40, nt=25):
    x = np.linspace(*x_domain, nx)
    t = np.linspace(0.0, 1.0, nt)
    T, X = np.meshgrid(t, x, indexing="ij")
    return np.column_stack([X.ravel(), T.ravel()])  # 1000 points


def _bundle_fn(kind, kappa):
    def fn(pts):
        return gt.analytic_bundle(kind, kappa, pts[:, 0], None if pts.shape[1] == 1 else pts[:, 1])
    return fn


def test_poisson_values():
    assert gt.poisson_exact(0.0) == 0.0
    assert gt.poisson_exact(1.0) == pytest.approx(0.0, abs=1e-16)
    assert gt.poisson_exact(0.5) == pytest.approx(0.1013211836, rel=1e-9)


@given(st.floats(0, 1))
def test_poisson_symmetry(x):
    assert gt.poisson_exact(x) == pytest.approx(gt.poisson_exact(1 - x), abs=1e-16)


def test_poisson_residual_oracle():
    x = np.linspace(0, 1, 1000)[:, None]
    assert gt.residual_oracle("poisson", None, _bundle_fn("poisson", None), x) < 1e-12


@pytest.mark.parametrize("kappa", kappa_grid("kdv"))
def test_kdv_residual(kappa):
    assert gt.residual_oracle("kdv", kappa, _bundle_fn("kdv", kappa), _grid((-5, 5))) < 1e-6


@pytest.mark.parametrize("kappa", kappa_grid("sine_gordon"))
def test_sine_gordon_residual(kappa):
    assert gt.residual_oracle("sine_gordon", kappa, _bundle_fn("sine_gordon", kappa), _grid((-5, 5))) < 1e-6


@given(st.sampled_from(kappa_grid("kdv")), st.floats(0, 1))
def test_kdv_peak(kappa, t):
    peak = gt.KDV_OFFSET + kappa**2 / 3 * t
    assert gt.kdv_soliton(peak, t, kappa) == pytest.approx(kappa, rel=1e-12)


def test_kdv_monotone_decay():
    kappa, t = 2.0, 0.3
    peak = gt.KDV_OFFSET + kappa**2 / 3 * t
    right = gt.kdv_soliton(peak + np.linspace(0, 40, 200), t, kappa)
    left = gt.kdv_soliton(peak - np.linspace(0, 40, 200), t, kappa)
    assert np.all(np.diff(right) <= 0) and np.all(np.diff(left) <= 0)
    assert right[-1] < 1e-10


def test_sine_gordon_centre_and_limits():
    v, x0 = gt.SINE_GORDON_VELOCITY, gt.SINE_GORDON_OFFSET
    u, _ = gt.sine_gordon_kink(v * 0.4 + x0, 0.4, 3.0)
    assert u == pytest.approx(np.pi, rel=1e-14)
    lo, _ = gt.sine_gordon_kink(-1e3, 0.0, 1.0)
    hi, _ = gt.sine_gordon_kink(1e3, 0.0, 1.0)
    assert lo == pytest.approx(0.0, abs=1e-12) and hi == pytest.approx(2 * np.pi, rel=1e-14)


@given(st.floats(-5, 5), st.floats(0.01, 0.99), st.sampled_from(kappa_grid("sine_gordon")))
def test_sine_gordon_ut_matches_fd(x, t, kappa):
    h = 1e-5
    _, ut = gt.sine_gordon_kink(x, t, kappa)
    fd = (gt.sine_gordon_kink(x, t + h, kappa)[0] - gt.sine_gordon_kink(x, t - h, kappa)[0]) / (2 * h)
    assert abs(ut - fd) <= 1e-8 * max(abs(ut), 1.0)


def test_kdv_bundle_matches_soliton():
    x = np.linspace(-5, 5, 50)
    t = np.full_like(x, 0.4)
    b = gt.kdv_bundle(x, t, 4.0)
    np.testing.assert_allclose(b.u, gt.kdv_soliton(x, t, 4.0), rtol=1e-13, atol=1e-300)


def test_initial_coefficients_reconstruct_condition():
    # two-sided series: u = c_0 + 2 sum_{n>=1} c_n cos(n pi x)
    n = np.arange(4000)
    c = gt.allen_cahn_initial_coefficients(n)
    c[1:] *= 2.0
    x = np.linspace(-1, 1, 9)
    series = (c[:, None] * np.cos(np.pi * n[:, None] * x)).sum(axis=0)
    err = np.abs(series - gt.allen_cahn_initial(x))
    assert err[1:-1].max() < 1e-6
    assert err.max() < 1e-3  # slower at the kink of the periodic extension


@pytest.fixture(scope="module")
def ac32():
    return gt.allen_cahn_solve(32.0)


def test_allen_cahn_initial_snapshot_exact(ac32):
    np.testing.assert_array_equal(ac32.values[0], ac32.x**2 * np.cos(np.pi * ac32.x))


def test_allen_cahn_shape_and_meta(ac32):
    assert ac32.values.shape == (101, 256)
    assert ac32.provenance == "spectral"
    assert ac32.solver_meta["modes"] == 512 and ac32.solver_meta["dt"] == 1e-3
    assert ac32.solver_meta["self_convergence"] < 1e-6
    assert np.all(np.diff(ac32.x) > 0) and np.all(np.isfinite(ac32.values))


@pytest.mark.parametrize("kappa", kappa_grid("allen_cahn"))
def test_allen_cahn_maximum_principle(kappa):
    ref = gt.allen_cahn_solve(kappa)
    assert ref.values.min() >= -1.05 and ref.values.max() <= 1.05


@pytest.mark.parametrize("kappa", [4.0, 256.0])
def test_allen_cahn_mode_doubling(kappa):
    _, base = gt._integrate_allen_cahn(kappa, 512, 1e-3, 2, 1.0)
    _, fine = gt._integrate_allen_cahn(kappa, 1024, 1e-3, 2, 1.0)
    diff = np.linalg.norm(fine[-1, ::2] - base[-1]) / np.linalg.norm(base[-1])
    assert diff < 1e-8


def test_allen_cahn_accuracy_error():
    with pytest.raises(AccuracyError):
        gt.allen_cahn_solve(4.0, dt=0.01, tolerance=1e-14)


def test_allen_cahn_rejects_bad_kappa():
    with pytest.raises(ConfigurationError):
        gt.allen_cahn_solve(0.0)


def test_field_cache_roundtrip(tmp_path, ac32):
    path = gt.cache_path(tmp_path, "allen_cahn", 32.0)
    gt.save_field(ac32, path)
    back = gt.load_field(path)
    assert back.kappa == 32.0 and back.solver_meta == ac32.solver_meta
    np.testing.assert_array_equal(back.values, ac32.values)
    np.testing.assert_array_equal(back.x, ac32.x)


def test_mutated_soliton_speed_fails_oracle(monkeypatch):
    monkeypatch.setattr(gt, "kdv_speed", lambda kappa: 1.1 * kappa * gt.kdv_amplitude(kappa) / 3.0)
    assert gt.residual_oracle("kdv", 4.0, _bundle_fn("kdv", 4.0), _grid((-5, 5))) > 1e-3


@pytest.mark.parametrize("kind,kappa", [("poisson", None), ("kdv", 0.25), ("kdv", 4.0), ("kdv", 16.0),
                                        ("sine_gordon", 0.25), ("sine_gordon", 16.0)])
def test_analytic_bundles_match_fd_of_solution(kind, kappa):
    # derivative formulas checked against the undifferentiated solution
    h = 1e-4
    if kind == "poisson":
        x = np.linspace(0.05, 0.95, 19)
        u = gt.poisson_exact
        b = gt.poisson_bundle(x)
        np.testing.assert_allclose(b.u_x, (u(x + h) - u(x - h)) / (2 * h), atol=1e-8)
        np.testing.assert_allclose(b.u_xx, (u(x + h) - 2 * u(x) + u(x - h)) / h**2, atol=1e-6)
        return
    x = np.linspace(-4.5, 4.5, 37)
    t = np.full_like(x, 0.3)
    sol = (lambda X, T: gt.kdv_soliton(X, T, kappa)) if kind == "kdv" else \
        (lambda X, T: gt.sine_gordon_kink(X, T, kappa)[0])
    b = gt.analytic_bundle(kind, kappa, x, t)
    scale = max(1.0, float(np.max(np.abs(b.u_xx))))
    np.testing.assert_allclose(b.u, sol(x, t), rtol=1e-13, atol=1e-13)
    np.testing.assert_allclose(b.u_x, (sol(x + h, t) - sol(x - h, t)) / (2 * h), atol=1e-6 * scale)
    np.testing.assert_allclose(b.u_t, (sol(x, t + h) - sol(x, t - h)) / (2 * h), atol=1e-6 * scale * kappa)
    np.testing.assert_allclose(b.u_xx, (sol(x + h, t) - 2 * sol(x, t) + sol(x - h, t)) / h**2, atol=1e-5 * scale)
    if kind == "kdv":
        h3 = 1e-3
        fd3 = (sol(x + 2 * h3, t) - 2 * sol(x + h3, t) + 2 * sol(x - h3, t) - sol(x - 2 * h3, t)) / (2 * h3**3)
        np.testing.assert_allclose(b.u_xxx, fd3, atol=1e-4 * max(1.0, float(np.max(np.abs(b.u_xxx)))))
    else:
        np.testing.assert_allclose(b.u_tt, (sol(x, t + h) - 2 * sol(x, t) + sol(x, t - h)) / h**2,
                                   atol=1e-5 * scale)
