"""The four benchmark problems: operators, domains, conditions, hardness grids."""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import ground_truth as gt
from .errors import ConfigurationError, ContractViolation


class PdeKind(str, Enum):
    POISSON = "poisson"
    KDV = "kdv"
    SINE_GORDON = "sine_gordon"
    ALLEN_CAHN = "allen_cahn"


REQUIRED_ORDERS = {
    PdeKind.POISSON: frozenset({"u_xx"}),
    PdeKind.KDV: frozenset({"u", "u_x", "u_t", "u_xxx"}),
    PdeKind.SINE_GORDON: frozenset({"u", "u_tt", "u_xx"}),
    PdeKind.ALLEN_CAHN: frozenset({"u", "u_t", "u_xx"}),
}

DOMAINS = {
    PdeKind.POISSON: ((0.0, 1.0), None),
    PdeKind.KDV: ((-5.0, 5.0), (0.0, 1.0)),
    PdeKind.SINE_GORDON: ((-5.0, 5.0), (0.0, 1.0)),
    PdeKind.ALLEN_CAHN: ((-1.0, 1.0), (0.0, 1.0)),
}

KAPPA_GRIDS = {
    PdeKind.KDV: (0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0),
    PdeKind.SINE_GORDON: (0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0),
    PdeKind.ALLEN_CAHN: (4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0),
}


@dataclass(frozen=True)
class PdeProblem:
    kind: PdeKind
    kappa: object  # float, or None for poisson
    x_domain: tuple
    t_domain: object  # (t0, t1) or None
    required_orders: frozenset
    bc_locations: tuple  # x positions of the boundary (both ends)
    periodic: bool
    ic_fields: tuple  # () | ("u",) | ("u", "u_t")

    @property
    def input_dim(self):
        return 1 if self.t_domain is None else 2

    @property
    def diffusion(self):
        if self.kind is not PdeKind.ALLEN_CAHN:
            raise AttributeError("diffusion is only defined for allen_cahn")
        return 1.0 / self.kappa

    def exact(self, x, t=None):
        """Closed-form solution, or ``None`` for Allen-Cahn (no closed form)."""
        if self.kind is PdeKind.ALLEN_CAHN:
            return None
        return gt.analytic_bundle(self.kind, self.kappa, x, t).u

    def boundary_target(self, x, t=None):
        if self.periodic:
            raise ContractViolation("periodic boundaries carry no target values")
        return self.exact(x, t)

    def initial_targets(self, x):
        """(u target, u_t target or None) at t = t0."""
        if self.t_domain is None:
            raise ContractViolation(f"{self.kind.value} has no initial condition")
        t0 = np.full_like(np.asarray(x, dtype=float), self.t_domain[0])
        if self.kind is PdeKind.ALLEN_CAHN:
            return gt.allen_cahn_initial(x), None
        if self.kind is PdeKind.SINE_GORDON:
            return gt.sine_gordon_kink(x, t0, self.kappa)
        return self.exact(x, t0), None


@dataclass(frozen=True)
class CollocationSets:
    """Fixed training points. Points are (n, d) arrays with columns (x[, t]).

    For a periodic problem ``bc_points`` holds the left ends and
    ``bc_partners`` the matching right ends; ``bc_targets`` is then ``None``.
    """

    interior: np.ndarray
    bc_points: np.ndarray
    bc_targets: object = None
    bc_partners: object = None
    ic_points: object = None
    ic_u: object = None
    ic_ut: object = None


def as_kind(kind):
    try:
        return PdeKind(getattr(kind, "value", kind))
    except ValueError:
        raise ConfigurationError(f"unknown PDE kind {kind!r}") from None


def make_problem(kind, kappa=None):
    kind = as_kind(kind)
    if kind is PdeKind.POISSON:
        if kappa is not None:
            raise ConfigurationError("poisson takes no hardness parameter")
    else:
        if kappa is None:
            raise ConfigurationError(f"{kind.value} requires a hardness kappa")
        kappa = float(kappa)
        if not (np.isfinite(kappa) and kappa > 0):
            raise ConfigurationError(f"kappa must be positive and finite, got {kappa}")
    x_domain, t_domain = DOMAINS[kind]
    ic_fields = {
        PdeKind.POISSON: (),
        PdeKind.KDV: ("u",),
        PdeKind.SINE_GORDON: ("u", "u_t"),
        PdeKind.ALLEN_CAHN: ("u",),
    }[kind]
    return PdeProblem(
        kind=kind,
        kappa=kappa,
        x_domain=x_domain,
        t_domain=t_domain,
        required_orders=REQUIRED_ORDERS[kind],
        bc_locations=x_domain,
        periodic=kind is PdeKind.ALLEN_CAHN,
        ic_fields=ic_fields,
    )


def _x_of(point):
    point = np.asarray(point, dtype=float)
    return point[..., 0]


def pde_residual(problem, bundle, point):
    """Interior residual of ``problem`` for the bundle evaluated at ``point``."""
    bundle.require(problem.required_orders)
    kind, k = problem.kind, problem.kappa
    if kind is PdeKind.POISSON:
        return -bundle.u_xx - np.sin(np.pi * _x_of(point))
    if kind is PdeKind.KDV:
        return bundle.u_t + k * bundle.u * bundle.u_x + bundle.u_xxx
    if kind is PdeKind.SINE_GORDON:
        return bundle.u_tt - bundle.u_xx + k * np.sin(bundle.u)
    return bundle.u_t - bundle.u_xx / k + bundle.u**3 - bundle.u


def residual_partials(problem, bundle, point):
    """d(residual)/d(entry) for each required entry, same shape as the residual."""
    bundle.require(problem.required_orders)
    kind, k = problem.kind, problem.kappa
    one = np.ones_like(np.asarray(_x_of(point), dtype=float))
    if kind is PdeKind.POISSON:
        return {"u_xx": -one}
    if kind is PdeKind.KDV:
        return {"u": k * bundle.u_x, "u_x": k * bundle.u, "u_t": one, "u_xxx": one}
    if kind is PdeKind.SINE_GORDON:
        return {"u": k * np.cos(bundle.u), "u_tt": one, "u_xx": -one}
    return {"u": 3.0 * bundle.u**2 - 1.0, "u_t": one, "u_xx": -one / k}


def condition_residuals(problem, which, bundle, targets=None):
    """Boundary or initial residuals as a list of arrays.

    ``which`` is ``"boundary"`` or ``"initial"``.  Dirichlet: ``[u - target]``.
    Periodic: the bundle is evaluated at the left ends followed by the right
    ends, giving ``[u_L - u_R, u_x,L - u_x,R]``.  Initial: ``[u - g]`` plus
    ``[u_t - h]`` when the problem constrains the initial velocity; ``targets``
    is then the pair ``(g, h)``.
    """
    if which == "boundary":
        if problem.periodic:
            bundle.require({"u", "u_x"})
            u = np.asarray(bundle.u)
            ux = np.asarray(bundle.u_x)
            m = u.shape[0] // 2
            return [u[:m] - u[m:], ux[:m] - ux[m:]]
        bundle.require({"u"})
        return [bundle.u - targets]
    if which == "initial":
        if not problem.ic_fields:
            raise ContractViolation(f"{problem.kind.value} has no initial condition")
        g, h = targets
        out = [bundle["u"] - g]
        if "u_t" in problem.ic_fields:
            out.append(bundle["u_t"] - h)
        return out
    raise ContractViolation(f"unknown condition set {which!r}")


def kappa_grid(kind):
    kind = as_kind(kind)
    if kind is PdeKind.POISSON:
        raise ConfigurationError("poisson has no hardness grid")
    return list(KAPPA_GRIDS[kind])


def median_kappa(kind):
    grid = kappa_grid(kind)
    return grid[len(grid) // 2]
