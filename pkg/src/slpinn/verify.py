"""Self-checks against independent oracles; backs the ``verify`` subcommand."""

from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from . import ground_truth, network, sampling, scaling_fit
from .errors import AccuracyError, SolverBlowupError
from .network import NetworkParams, init_params, loss_and_grad
from .pde import PdeKind, kappa_grid, make_problem, median_kappa

FD_STEP = 1e-4
FD_TOLERANCE = 1e-5
CHAIN_TOLERANCE = 1e-7
RESIDUAL_TOLERANCE = 1e-6
RECOVERY_TOLERANCE = 1e-10
TCDF_TOLERANCE = 1e-8
AC_CHECK_KAPPAS = (4.0, 32.0, 256.0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


def relative_discrepancy(analytic, numeric, floor=1e-8):
    """Per-coordinate |a - n| / max(|a|, |n|, floor)."""
    analytic = np.asarray(analytic, dtype=float)
    numeric = np.asarray(numeric, dtype=float)
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return np.abs(analytic - numeric) / scale


def check_activation_chain(n=2001, step=1e-5):
    """tanh orders 1..4 against central differences of the order below."""
    z = np.linspace(-5.0, 5.0, n)
    derivs = network.activation_derivs("tanh", z)
    worst = 0.0
    for k in range(1, 5):
        plus = network.activation_derivs("tanh", z + step)[k - 1]
        minus = network.activation_derivs("tanh", z - step)[k - 1]
        fd = (plus - minus) / (2 * step)
        worst = max(worst, float(np.max(np.abs(fd - derivs[k]))))
    relu = network.activation_derivs("relu", np.array([-1.0, 0.0, 2.0]))
    relu_ok = (np.array_equal(relu[0], [0.0, 0.0, 2.0]) and np.array_equal(relu[1], [0.0, 0.0, 1.0])
               and all(not np.any(d) for d in relu[2:]))
    ok = worst < CHAIN_TOLERANCE and relu_ok
    return CheckResult("activation_chain", ok, f"max |fd - analytic| = {worst:.2e}; relu a.e. convention {'ok' if relu_ok else 'BROKEN'}")


def gradient_fd_check(kind, kappa=None, width=8, n_points=16, seed=0, step=FD_STEP):
    """Max per-coordinate relative gap between the analytic and FD loss gradient."""
    problem = make_problem(kind, kappa)
    stream = sampling.RngStream(seed)
    colloc = sampling.make_collocation(problem, stream, n_interior=n_points,
                                       n_boundary=n_points // 2, n_initial=n_points // 2)
    params = init_params(width, problem.input_dim, "tanh", stream.substream_seed("init"))
    _, grad = loss_and_grad(params, "tanh", problem, colloc)
    g = grad.to_vector()
    theta = params.to_vector()
    fd = np.empty_like(theta)
    d = problem.input_dim
    for j in range(theta.size):
        tp = theta.copy()
        tp[j] += step
        tm = theta.copy()
        tm[j] -= step
        lp, _ = loss_and_grad(NetworkParams.from_vector(tp, width, d), "tanh", problem, colloc)
        lm, _ = loss_and_grad(NetworkParams.from_vector(tm, width, d), "tanh", problem, colloc)
        fd[j] = (lp - lm) / (2 * step)
    return float(np.max(relative_discrepancy(g, fd)))


def check_gradients():
    out = []
    for kind in PdeKind:
        kappa = None if kind is PdeKind.POISSON else median_kappa(kind)
        worst = gradient_fd_check(kind, kappa)
        out.append(CheckResult(f"fd_gradient[{kind.value}]", worst < FD_TOLERANCE,
                               f"max relative gap {worst:.2e} (tol {FD_TOLERANCE:g})"))
    return out


def _analytic_grid(kind, nx=201, nt=51):
    problem = make_problem(kind, None if kind is PdeKind.POISSON else median_kappa(kind))
    x = np.linspace(*problem.x_domain, nx)
    if kind is PdeKind.POISSON:
        return x[:, None]
    t = np.linspace(*problem.t_domain, nt)
    T, X = np.meshgrid(t, x, indexing="ij")
    return np.column_stack([X.ravel(), T.ravel()])


def check_residuals():
    out = []
    for kind in (PdeKind.POISSON, PdeKind.KDV, PdeKind.SINE_GORDON):
        grid = _analytic_grid(kind)
        kappas = [None] if kind is PdeKind.POISSON else kappa_grid(kind)
        worst = 0.0
        for kappa in kappas:
            def bundle_fn(pts, kappa=kappa, kind=kind):
                t = None if pts.shape[1] == 1 else pts[:, 1]
                return ground_truth.analytic_bundle(kind, kappa, pts[:, 0], t)
            worst = max(worst, ground_truth.residual_oracle(kind, kappa, bundle_fn, grid))
        out.append(CheckResult(f"residual_oracle[{kind.value}]", worst < RESIDUAL_TOLERANCE,
                               f"max |residual| = {worst:.2e} over {len(kappas)} kappa value(s)"))
    return out


def check_allen_cahn(kappas=AC_CHECK_KAPPAS):
    out = []
    for kappa in kappas:
        try:
            ref = ground_truth.allen_cahn_solve(kappa)
            conv = ref.solver_meta["self_convergence"]
            out.append(CheckResult(f"allen_cahn_self_convergence[{kappa:g}]", conv < ground_truth.AC_TOLERANCE,
                                   f"dt vs dt/2 relative L2 = {conv:.2e}"))
        except (AccuracyError, SolverBlowupError) as exc:
            out.append(CheckResult(f"allen_cahn_self_convergence[{kappa:g}]", False, str(exc)))
    return out


def _power_law_ledger(nu=0.0):
    widths = (16, 32, 64, 128, 256, 512, 1024)
    kappas = (0.25, 1.0, 4.0, 16.0)
    recs = []
    for kappa in kappas:
        for width in widths:
            log_err = 1.0 - 0.3 * np.log(width) + 0.7 * np.log(kappa) + nu * np.log(width) * np.log(kappa)
            recs.append({"pde": "kdv", "activation": "tanh", "width": width, "kappa": kappa,
                         "seed": 0, "status": "ok", "rel_l2_error": float(np.exp(log_err))})
    return recs


def check_ols_recovery():
    ledger = _power_law_ledger()
    sep = scaling_fit.fit_separable(ledger, "kdv", "tanh")
    gaps = [abs(sep.alpha - 0.3), abs(sep.gamma - 0.7), abs(sep.log_A - 1.0)]
    inter = scaling_fit.fit_interaction(_power_law_ledger(nu=-0.05), "kdv", "tanh")
    gaps += [abs(inter["beta_0"] - 1.0), abs(inter["beta_N"] + 0.3), abs(inter["beta_kappa"] - 0.7),
             abs(inter["nu"] + 0.05)]
    uni = scaling_fit.fit_univariate_alpha(ledger, "kdv", "tanh", 4.0)
    gaps.append(abs(uni.alpha - 0.3))
    worst = max(gaps)
    return CheckResult("ols_noiseless_recovery", worst < RECOVERY_TOLERANCE,
                       f"max coefficient error {worst:.2e}")


def t_cdf_quadrature(t, df):
    """Independent oracle: integrate the t density from 0 to |t|."""
    log_norm = special.gammaln((df + 1) / 2) - special.gammaln(df / 2) - 0.5 * np.log(df * np.pi)
    density = lambda s: np.exp(log_norm - (df + 1) / 2 * np.log1p(s * s / df))
    half, _ = integrate.quad(density, 0.0, abs(t), epsabs=1e-14, epsrel=1e-13, limit=200)
    return 0.5 + half if t >= 0 else 0.5 - half


def check_t_cdf(dfs=(1, 2, 3, 5, 10, 30, 100, 200), ts=np.linspace(-10, 10, 41)):
    worst = 0.0
    for df in dfs:
        for t in ts:
            worst = max(worst, abs(float(scaling_fit.t_cdf(t, df)) - t_cdf_quadrature(float(t), df)))
    return CheckResult("t_cdf_accuracy", worst < TCDF_TOLERANCE, f"max |cdf - quadrature| = {worst:.2e}")


def run_all(include_allen_cahn=True):
    results = [check_activation_chain()]
    results += check_gradients()
    results += check_residuals()
    if include_allen_cahn:
        results += check_allen_cahn()
    results.append(check_ols_recovery())
    results.append(check_t_cdf())
    return results
