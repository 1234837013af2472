"""Reference solutions: closed forms and a Fourier/ETDRK4 Allen-Cahn solver.

Closed forms:

* Poisson ``-u_xx = sin(pi x)``: ``u = sin(pi x) / pi^2``.
* KdV ``u_t + k u u_x + u_xxx = 0``: the sech^2 soliton of amplitude ``A``
  travels at speed ``k A / 3`` with inverse width ``sqrt(k A / 12)``.  The
  amplitude is tied to the hardness, ``A = k``.
* Sine-Gordon ``u_tt - u_xx + k sin(u) = 0``: the kink
  ``4 arctan(exp(sqrt(k) (x - v t - x0) / sqrt(1 - v^2)))``.

Allen-Cahn (``u_t = u_xx / k + u - u^3``, periodic on [-1, 1)) has no closed
form and is integrated with the exponential time-differencing RK4 scheme of
Cox & Matthews, using the contour-integral coefficients of Kassam &
Trefethen (2005).
"""

import functools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bundle import DerivativeBundle
from .errors import AccuracyError, ConfigurationError, SolverBlowupError

KDV_OFFSET = -2.0
SINE_GORDON_VELOCITY = 0.5
SINE_GORDON_OFFSET = -2.0

AC_MODES = 512
AC_DT = 1e-3
AC_NX_OUT = 256
AC_NT_OUT = 101
AC_T_END = 1.0
AC_TOLERANCE = 1e-6

FIELD_SCHEMA = "slpinn-reference-field"
FIELD_SCHEMA_VERSION = 1


# -- Poisson -----------------------------------------------------------------

def poisson_exact(x):
    return np.sin(np.pi * np.asarray(x, dtype=float)) / np.pi**2


def poisson_bundle(x):
    x = np.asarray(x, dtype=float)
    s = np.sin(np.pi * x)
    return DerivativeBundle(u=s / np.pi**2, u_x=np.cos(np.pi * x) / np.pi, u_xx=-s)


# -- KdV ---------------------------------------------------------------------

def kdv_amplitude(kappa):
    return kappa


def kdv_speed(kappa):
    return kappa * kdv_amplitude(kappa) / 3.0


def kdv_wavenumber(kappa):
    return np.sqrt(kappa * kdv_amplitude(kappa) / 12.0)


def _sech(xi):
    e = np.exp(-np.abs(xi))
    return 2.0 * e / (1.0 + e * e)


def _kdv_phase(x, t, kappa):
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    return kdv_wavenumber(kappa) * (x - kdv_speed(kappa) * t - KDV_OFFSET)


def kdv_soliton(x, t, kappa):
    sech = _sech(_kdv_phase(x, t, kappa))
    return kdv_amplitude(kappa) * sech**2


def kdv_bundle(x, t, kappa):
    """Soliton value with exact x-derivatives up to third order and u_t."""
    xi = _kdv_phase(x, t, kappa)
    A = kdv_amplitude(kappa)
    k = kdv_wavenumber(kappa)
    c = kdv_speed(kappa)
    S2 = _sech(xi) ** 2
    T = np.tanh(xi)
    # derivatives of A sech^2(xi) with respect to xi
    d1 = -2.0 * A * S2 * T
    d2 = A * S2 * (4.0 - 6.0 * S2)
    d3 = A * S2 * T * (24.0 * S2 - 8.0)
    return DerivativeBundle(u=A * S2, u_x=k * d1, u_xx=k**2 * d2, u_xxx=k**3 * d3, u_t=-c * k * d1)


# -- Sine-Gordon -------------------------------------------------------------

def _sg_phase(x, t, kappa):
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    v = SINE_GORDON_VELOCITY
    return np.sqrt(kappa) * (x - v * t - SINE_GORDON_OFFSET) / np.sqrt(1.0 - v * v)


def _sg_u(xi):
    # 4 arctan(e^xi) == 2 pi - 4 arctan(e^-xi); pick the branch that cannot overflow
    e = np.exp(-np.abs(xi))
    return np.where(xi <= 0, 4.0 * np.arctan(e), 2.0 * np.pi - 4.0 * np.arctan(e))


def sine_gordon_kink(x, t, kappa):
    """Return the kink ``u`` and its exact time derivative ``u_t``."""
    b = sine_gordon_bundle(x, t, kappa)
    return b.u, b.u_t


def sine_gordon_bundle(x, t, kappa):
    v = SINE_GORDON_VELOCITY
    xi = _sg_phase(x, t, kappa)
    m = np.sqrt(kappa) / np.sqrt(1.0 - v * v)
    sech = _sech(xi)
    # d/dxi 4 arctan(e^xi) = 2 sech(xi)
    u_x = 2.0 * m * sech
    u_xx = -2.0 * m**2 * sech * np.tanh(xi)
    return DerivativeBundle(u=_sg_u(xi), u_x=u_x, u_t=-v * u_x, u_xx=u_xx, u_tt=v * v * u_xx)


# -- Allen-Cahn --------------------------------------------------------------

def allen_cahn_initial(x):
    x = np.asarray(x, dtype=float)
    return x**2 * np.cos(np.pi * x)


@dataclass(frozen=True)
class ReferenceField:
    """Solution samples on a tensor grid; ``values[j, i]`` is u(t_j, x_i)."""

    kind: str
    kappa: object
    x: np.ndarray
    t: np.ndarray
    values: np.ndarray
    provenance: str
    solver_meta: dict = field(default_factory=dict)

    def header(self):
        return {
            "schema": FIELD_SCHEMA,
            "version": FIELD_SCHEMA_VERSION,
            "kind": self.kind,
            "kappa": self.kappa,
            "shape": list(self.values.shape),
            "provenance": self.provenance,
            "solver_meta": self.solver_meta,
        }


def allen_cahn_initial_coefficients(n):
    """Exact Fourier coefficients c_n of x^2 cos(pi x) on the period [-1, 1).

    The initial condition is even but its slope jumps at x = +-1 under
    periodic extension, so c_n decays only like n^-2.  Sampling it on a grid
    would alias that tail into the resolved modes; starting from the exact
    coefficients keeps the resolved modes independent of the grid size.
    """
    n = np.asarray(n)

    def moment(m):
        # integral_0^1 x^2 cos(m pi x) dx
        m = np.abs(m)
        safe = np.where(m == 0, 1, m)
        return np.where(m == 0, 1.0 / 3.0, 2.0 * (-1.0) ** safe / (safe * np.pi) ** 2)

    return 0.5 * (moment(n + 1) + moment(n - 1))


def _etdrk4_coefficients(L, dt, n_contour=64):
    r = np.exp(1j * np.pi * (np.arange(1, n_contour + 1) - 0.5) / n_contour)
    LR = dt * L[:, None] + r[None, :]
    eLR = np.exp(LR)
    Q = dt * np.mean((np.exp(LR / 2) - 1.0) / LR, axis=1).real
    f1 = dt * np.mean((-4.0 - LR + eLR * (4.0 - 3.0 * LR + LR**2)) / LR**3, axis=1).real
    f2 = dt * np.mean((2.0 + LR + eLR * (LR - 2.0)) / LR**3, axis=1).real
    f3 = dt * np.mean((-4.0 - 3.0 * LR - LR**2 + eLR * (4.0 - LR)) / LR**3, axis=1).real
    return np.exp(dt * L), np.exp(dt * L / 2), Q, f1, f2, f3


def _integrate_allen_cahn(kappa, modes, dt, n_snapshots, t_end):
    x = -1.0 + 2.0 * np.arange(modes) / modes
    wavenumbers = np.pi * np.arange(modes // 2 + 1)
    L = 1.0 - wavenumbers**2 / kappa
    E, E2, Q, f1, f2, f3 = _etdrk4_coefficients(L, dt)
    # two-thirds rule on the cubic term
    keep = np.arange(modes // 2 + 1) <= modes // 3

    def nonlinear(v_hat):
        u = np.fft.irfft(v_hat, n=modes)
        return -np.fft.rfft(u**3) * keep

    snapshot_dt = t_end / (n_snapshots - 1)
    steps_per_snapshot = round(snapshot_dt / dt)
    if not np.isclose(steps_per_snapshot * dt, snapshot_dt, rtol=0, atol=1e-12):
        raise ConfigurationError(f"dt={dt} does not divide the snapshot spacing {snapshot_dt}")

    n = np.arange(modes // 2 + 1)
    # rfft convention on x_j = -1 + 2j/M: u_hat_n = M (-1)^n c_n; Nyquist dropped
    v = modes * (-1.0) ** n * allen_cahn_initial_coefficients(n) + 0j
    v[-1] = 0.0
    out = np.empty((n_snapshots, modes))
    out[0] = allen_cahn_initial(x)
    for j in range(1, n_snapshots):
        for _ in range(steps_per_snapshot):
            Nv = nonlinear(v)
            a = E2 * v + Q * Nv
            Na = nonlinear(a)
            b = E2 * v + Q * Na
            Nb = nonlinear(b)
            c = E2 * a + Q * (2.0 * Nb - Nv)
            Nc = nonlinear(c)
            v = E * v + f1 * Nv + 2.0 * f2 * (Na + Nb) + f3 * Nc
        out[j] = np.fft.irfft(v, n=modes)
        if not np.all(np.isfinite(out[j])):
            raise SolverBlowupError(f"Allen-Cahn field became non-finite at t={j * snapshot_dt:g}")
    return x, out


def allen_cahn_solve(kappa, modes=AC_MODES, dt=AC_DT, nx_out=AC_NX_OUT, nt_out=AC_NT_OUT,
                     tolerance=AC_TOLERANCE):
    """Spectral reference for Allen-Cahn with diffusion 1/kappa.

    Integrates twice (dt and dt/2) and reports the relative L2 change of the
    final snapshot as the self-convergence estimate; raises
    :class:`AccuracyError` when it is not below ``tolerance``.
    """
    if kappa <= 0:
        raise ConfigurationError(f"kappa must be positive, got {kappa}")
    if modes % nx_out:
        raise ConfigurationError("output x-grid must subsample the spectral grid")
    x, coarse = _integrate_allen_cahn(kappa, modes, dt, nt_out, AC_T_END)
    _, fine = _integrate_allen_cahn(kappa, modes, dt / 2, nt_out, AC_T_END)
    convergence = float(np.linalg.norm(coarse[-1] - fine[-1]) / np.linalg.norm(fine[-1]))
    if not convergence < tolerance:
        raise AccuracyError(f"self-convergence {convergence:.3e} >= {tolerance:g} at kappa={kappa}")
    stride = modes // nx_out
    return ReferenceField(
        kind="allen_cahn",
        kappa=float(kappa),
        x=x[::stride].copy(),
        t=np.linspace(0.0, AC_T_END, nt_out),
        values=coarse[:, ::stride].copy(),
        provenance="spectral",
        solver_meta={"modes": modes, "dt": dt, "self_convergence": convergence,
                     "scheme": "fourier-etdrk4", "dealias": "2/3"},
    )


# -- caching -----------------------------------------------------------------

def save_field(ref, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        np.savez(fh, header=np.array(json.dumps(ref.header())), x=ref.x, t=ref.t, values=ref.values)
    tmp.replace(path)


def load_field(path):
    with np.load(path) as data:
        header = json.loads(str(data["header"]))
        if header.get("schema") != FIELD_SCHEMA or header.get("version") != FIELD_SCHEMA_VERSION:
            raise ConfigurationError(f"{path}: unsupported reference-field header {header}")
        return ReferenceField(
            kind=header["kind"], kappa=header["kappa"], x=data["x"], t=data["t"],
            values=data["values"], provenance=header["provenance"],
            solver_meta=header["solver_meta"],
        )


def cache_path(cache_dir, kind, kappa):
    return Path(cache_dir) / f"{kind}_kappa{float(kappa):g}.npz"


@functools.lru_cache(maxsize=None)
def _allen_cahn_memo(kappa):
    return allen_cahn_solve(kappa)


def allen_cahn_reference(kappa, cache_dir=None):
    """Cached Allen-Cahn reference; consults ``cache_dir`` before solving."""
    kappa = float(kappa)
    if cache_dir is None:
        return _allen_cahn_memo(kappa)
    path = cache_path(cache_dir, "allen_cahn", kappa)
    if path.exists():
        return load_field(path)
    ref = _allen_cahn_memo(kappa)
    save_field(ref, path)
    return ref


# -- verification --------------------------------------------------------------

def analytic_bundle(kind, kappa, x, t=None):
    kind = str(getattr(kind, "value", kind))
    if kind == "poisson":
        return poisson_bundle(x)
    if kind == "kdv":
        return kdv_bundle(x, t, kappa)
    if kind == "sine_gordon":
        return sine_gordon_bundle(x, t, kappa)
    raise ConfigurationError(f"no closed-form solution for {kind!r}")


def residual_oracle(kind, kappa, bundle_fn, grid):
    """Largest |PDE residual| of ``bundle_fn`` over ``grid``.

    ``grid`` is an (n, d) array of points; ``bundle_fn(points)`` must return
    a :class:`DerivativeBundle` holding every order the PDE needs.
    """
    from .pde import make_problem, pde_residual

    problem = make_problem(kind, kappa)
    points = np.atleast_2d(np.asarray(grid, dtype=float))
    bundle = bundle_fn(points)
    return float(np.max(np.abs(pde_residual(problem, bundle, points))))
