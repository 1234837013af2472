"""Single-hidden-layer network ``u(x) = c + sum_i v_i sigma(W_i . x + b_i)``.

Input derivatives are closed form: for input axis j,

    d^k u / dx_j^k = sum_i v_i sigma^(k)(z_i) W_ij^k

and the parameter gradient of any loss built from such entries follows by
the chain rule, which needs one more activation derivative than the highest
entry order (sigma'''' for KdV's u_xxx).
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .bundle import ENTRY_AXES, DerivativeBundle
from .errors import ConfigurationError, ContractViolation, NumericOverflowError
from .pde import condition_residuals, pde_residual, residual_partials


class ActivationKind(str, Enum):
    TANH = "tanh"
    RELU = "relu"


def as_activation(kind):
    try:
        return ActivationKind(getattr(kind, "value", kind))
    except ValueError:
        raise ConfigurationError(f"unknown activation {kind!r}") from None


# Row m: coefficients (ascending powers of s = tanh z) of the m-th derivative.
#   s' = 1 - s^2,  s'' = -2 s s',  s''' = s'(6 s^2 - 2),  s'''' = 8 s s'(2 - 3 s^2)
TANH_CHAIN = np.array([
    [0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 0.0, -1.0, 0.0, 0.0, 0.0],
    [0.0, -2.0, 0.0, 2.0, 0.0, 0.0],
    [-2.0, 0.0, 8.0, 0.0, -6.0, 0.0],
    [0.0, 16.0, 0.0, -40.0, 0.0, 24.0],
])


def activation_derivs(kind, z):
    """(sigma, sigma', sigma'', sigma''', sigma'''') at ``z`` (scalar or array).

    relu uses the almost-everywhere convention: sigma'(0) = 0 and every
    higher derivative is identically zero.
    """
    kind = as_activation(kind)
    z = np.asarray(z, dtype=float)
    if kind is ActivationKind.TANH:
        s = np.tanh(z)
        chain = TANH_CHAIN
        out = []
        for m in range(5):
            acc = np.full_like(s, chain[m, 5])
            for c in chain[m, 4::-1]:
                acc = acc * s + c
            out.append(acc)
        return tuple(out)
    zero = np.zeros_like(z)
    return (np.maximum(z, 0.0), (z > 0).astype(float), zero, zero.copy(), zero.copy())


@dataclass
class NetworkParams:
    """W: (N, d) hidden weights, b: (N,), v: (N,) output weights, c: output bias."""

    W: np.ndarray
    b: np.ndarray
    v: np.ndarray
    c: float

    @property
    def width(self):
        return self.W.shape[0]

    @property
    def input_dim(self):
        return self.W.shape[1]

    @property
    def size(self):
        return self.W.size + 2 * self.width + 1

    def to_vector(self):
        return np.concatenate([self.W.ravel(), self.b, self.v, [self.c]])

    @classmethod
    def from_vector(cls, theta, width, input_dim):
        theta = np.asarray(theta, dtype=float)
        nW = width * input_dim
        return cls(
            W=theta[:nW].reshape(width, input_dim),
            b=theta[nW:nW + width],
            v=theta[nW + width:nW + 2 * width],
            c=float(theta[-1]),
        )

    def zeros_like(self):
        return NetworkParams(np.zeros_like(self.W), np.zeros_like(self.b), np.zeros_like(self.v), 0.0)

    def all_finite(self):
        return bool(np.all(np.isfinite(self.to_vector())))


# Gradients share the parameter layout.
ParamGradient = NetworkParams


def init_params(width, input_dim, activation, seed):
    """Glorot-uniform W and v, zero biases; deterministic in ``seed``.

    ``activation`` does not change the draw; it is accepted so every
    initialisation call names the network it is for.
    """
    as_activation(activation)
    if input_dim not in (1, 2):
        raise ConfigurationError(f"input_dim must be 1 or 2, got {input_dim}")
    if int(width) < 1:
        raise ConfigurationError(f"width must be positive, got {width}")
    width = int(width)
    rng = np.random.default_rng(seed)
    hidden_bound = np.sqrt(6.0 / (input_dim + width))
    out_bound = np.sqrt(6.0 / (width + 1))
    W = rng.uniform(-hidden_bound, hidden_bound, size=(width, input_dim))
    v = rng.uniform(-out_bound, out_bound, size=width)
    return NetworkParams(W=W, b=np.zeros(width), v=v, c=0.0)


# -- batched evaluation ---------------------------------------------------------

def _act_code(activation):
    return _kernels.TANH if as_activation(activation) is ActivationKind.TANH else _kernels.RELU


def _hidden(params, activation, X):
    """Kernel input: tanh(Z) for tanh, Z for relu, as a C-contiguous (n, N) array."""
    Z = _kernels.preactivation(np.ascontiguousarray(X, dtype=float),
                               np.ascontiguousarray(params.W.T), np.ascontiguousarray(params.b))
    if as_activation(activation) is ActivationKind.TANH:
        np.tanh(Z, out=Z)
    return Z


def _check_entries(params, names):
    for name in names:
        if name not in ENTRY_AXES:
            raise ContractViolation(f"unknown bundle entry {name!r}")
        axis, _ = ENTRY_AXES[name]
        if axis >= params.input_dim:
            raise ContractViolation(f"{name} requested from a {params.input_dim}-D network")


def _evaluate(params, activation, X, names):
    names = tuple(names)
    _check_entries(params, names)
    A = _hidden(params, activation, X)
    orders = np.array([ENTRY_AXES[n][1] for n in names], dtype=np.int64)
    U = np.empty((len(names), params.width))
    for e, name in enumerate(names):
        axis, k = ENTRY_AXES[name]
        U[e] = params.v * params.W[:, axis] ** k
    E = _kernels.forward_sums(A, _act_code(activation), TANH_CHAIN, U, orders)
    values = {}
    for e, name in enumerate(names):
        values[name] = E[:, e] + params.c if name == "u" else E[:, e]
    return A, values


def _backprop(params, activation, X, A, lam):
    """Gradient of sum_p sum_e lam[e][p] * entry_e(p) with respect to the params."""
    d = params.input_dim
    cols, orders, uses = [], [], []
    for name, weight in lam.items():
        axis, k = ENTRY_AXES[name]
        cols.append(weight)
        orders.append(k)
        uses.append((name, "same", None))
        cols.append(weight)
        orders.append(k + 1)
        uses.append((name, "bias", None))
        for l in range(d):
            cols.append(weight * X[:, l])
            orders.append(k + 1)
            uses.append((name, "weight", l))
    C = np.ascontiguousarray(np.column_stack(cols))
    G = _kernels.backward_sums(A, _act_code(activation), TANH_CHAIN, C,
                               np.array(orders, dtype=np.int64))
    grad = params.zeros_like()
    v, W = params.v, params.W
    for row, (name, use, l) in enumerate(uses):
        axis, k = ENTRY_AXES[name]
        Wk = W[:, axis] ** k
        g = G[row]
        if use == "same":
            grad.v += g * Wk
            if k > 0:
                grad.W[:, axis] += v * k * W[:, axis] ** (k - 1) * g
        elif use == "bias":
            grad.b += v * Wk * g
        else:
            grad.W[:, l] += v * Wk * g
    for name, weight in lam.items():
        if name == "u":
            grad.c += float(np.sum(weight))
    return grad


def forward_bundle(params, activation, point, orders):
    """Evaluate the requested entries at one point (shape (d,)) or a batch (n, d)."""
    point = np.asarray(point, dtype=float)
    single = point.ndim == 1
    X = np.atleast_2d(point)
    if X.shape[1] != params.input_dim:
        raise ContractViolation(f"point dimension {X.shape[1]} != network input_dim {params.input_dim}")
    _, values = _evaluate(params, activation, X, sorted(set(orders)))
    if single:
        values = {k: float(a[0]) for k, a in values.items()}
    return DerivativeBundle(**values)


def predict(params, activation, X):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return _evaluate(params, activation, X, ("u",))[1]["u"]


# -- composite loss ------------------------------------------------------------

def _add(grad, part):
    grad.W += part.W
    grad.b += part.b
    grad.v += part.v
    grad.c += part.c


def _finite_or_raise(term, *arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NumericOverflowError(term)


def loss_terms_and_grad(params, activation, problem, colloc, weights=(1.0, 1.0, 1.0)):
    """Per-term mean squared residuals and the exact gradient of their weighted sum.

    Returns ``({"pde": L_pde, "bc": L_bc, "ic": L_ic, "total": L}, grad)``.
    Each term is the mean over all of its residuals (periodic and
    initial-velocity residuals are pooled with the others of the same set).
    """
    w_pde, w_bc, w_ic = (float(w) for w in weights)
    if colloc.interior is None or len(colloc.interior) == 0:
        raise ConfigurationError("interior collocation set is empty")
    if colloc.bc_points is None or len(colloc.bc_points) == 0:
        raise ConfigurationError("boundary collocation set is empty")
    if problem.ic_fields and (colloc.ic_points is None or len(colloc.ic_points) == 0):
        raise ConfigurationError(f"{problem.kind.value} needs an initial collocation set")

    grad = params.zeros_like()
    terms = {}

    # interior
    X = colloc.interior
    A, vals = _evaluate(params, activation, X, sorted(problem.required_orders))
    bundle = DerivativeBundle(**vals)
    r = pde_residual(problem, bundle, X)
    _finite_or_raise("pde", r)
    terms["pde"] = float(np.mean(r * r))
    scale = 2.0 * w_pde / r.size
    partials = residual_partials(problem, bundle, X)
    _add(grad, _backprop(params, activation, X, A, {n: scale * r * partials[n] for n in partials}))

    # boundary
    if problem.periodic:
        X = np.vstack([colloc.bc_points, colloc.bc_partners])
        A, vals = _evaluate(params, activation, X, ("u", "u_x"))
        r_u, r_ux = condition_residuals(problem, "boundary", DerivativeBundle(**vals))
        _finite_or_raise("bc", r_u, r_ux)
        count = r_u.size + r_ux.size
        terms["bc"] = float((np.sum(r_u * r_u) + np.sum(r_ux * r_ux)) / count)
        scale = 2.0 * w_bc / count
        lam = {"u": scale * np.concatenate([r_u, -r_u]), "u_x": scale * np.concatenate([r_ux, -r_ux])}
    else:
        X = colloc.bc_points
        A, vals = _evaluate(params, activation, X, ("u",))
        (r_u,) = condition_residuals(problem, "boundary", DerivativeBundle(**vals), colloc.bc_targets)
        _finite_or_raise("bc", r_u)
        terms["bc"] = float(np.mean(r_u * r_u))
        lam = {"u": (2.0 * w_bc / r_u.size) * r_u}
    _add(grad, _backprop(params, activation, X, A, lam))

    # initial
    if problem.ic_fields:
        X = colloc.ic_points
        A, vals = _evaluate(params, activation, X, problem.ic_fields)
        res = condition_residuals(problem, "initial", DerivativeBundle(**vals), (colloc.ic_u, colloc.ic_ut))
        _finite_or_raise("ic", *res)
        count = sum(a.size for a in res)
        terms["ic"] = float(sum(np.sum(a * a) for a in res) / count)
        scale = 2.0 * w_ic / count
        _add(grad, _backprop(params, activation, X, A,
                             {name: scale * a for name, a in zip(problem.ic_fields, res)}))
    else:
        terms["ic"] = 0.0

    terms["total"] = w_pde * terms["pde"] + w_bc * terms["bc"] + w_ic * terms["ic"]
    if not grad.all_finite():
        raise NumericOverflowError("grad")
    return terms, grad


def loss_and_grad(params, activation, problem, colloc, weights=(1.0, 1.0, 1.0)):
    terms, grad = loss_terms_and_grad(params, activation, problem, colloc, weights)
    return terms["total"], grad
