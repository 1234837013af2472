"""Collocation points: Sobol for Poisson, seeded uniform draws otherwise."""

import hashlib

import numpy as np

from .errors import ConfigurationError
from .pde import CollocationSets, PdeKind

SOBOL_BITS = 52

# Joe & Kuo (new-joe-kuo-6.21201) entries for the first two dimensions.
# Dimension 1 is the van der Corput sequence (all m_k = 1); dimension 2 has
# primitive polynomial x + 1 (degree s = 1, a = 0) and initial m_1 = 1.
_JOE_KUO = ((0, 0, ()), (1, 0, (1,)))

N_INTERIOR = {"poisson": 1024, "time_dependent": 2048}
N_BOUNDARY = 256
N_INITIAL = 256


def _direction_numbers(dim_index, bits=SOBOL_BITS):
    s, a, m_init = _JOE_KUO[dim_index]
    V = np.zeros(bits + 1, dtype=object)
    if s == 0:
        for k in range(1, bits + 1):
            V[k] = 1 << (bits - k)
        return V
    m = [0] + list(m_init)
    for k in range(s + 1, bits + 1):
        new = m[k - s] ^ (m[k - s] << s)
        for j in range(1, s):
            if (a >> (s - 1 - j)) & 1:
                new ^= m[k - j] << j
        m.append(new)
    for k in range(1, bits + 1):
        V[k] = m[k] << (bits - k)
    return V


def sobol_points(n, dim):
    """First ``n`` Sobol points in [0, 1)^dim, skipping the all-zero origin.

    Gray-code construction; the k-th point uses direction number
    ``V[c]`` where ``c`` is the position of the lowest zero bit of k - 1.
    """
    if dim not in (1, 2):
        raise ConfigurationError(f"Sobol dimension must be 1 or 2, got {dim}")
    n = int(n)
    if n < 1:
        raise ConfigurationError(f"n must be positive, got {n}")
    if n >= 2**SOBOL_BITS:
        raise ConfigurationError("too many Sobol points requested")
    dirs = [_direction_numbers(j) for j in range(dim)]
    out = np.empty((n, dim))
    state = [0] * dim
    scale = 2.0**-SOBOL_BITS
    for i in range(n):
        c = 1
        k = i
        while k & 1:
            k >>= 1
            c += 1
        for j in range(dim):
            state[j] ^= dirs[j][c]
            out[i, j] = state[j] * scale
    return out


def run_seed(pde, activation, width, kappa, seed_index):
    """64-bit seed for one sweep cell, from a hash of the cell identity."""
    key = f"{getattr(pde, 'value', pde)}|{getattr(activation, 'value', activation)}|{int(width)}|" \
          f"{'none' if kappa is None else repr(float(kappa))}|{int(seed_index)}"
    return int.from_bytes(hashlib.sha256(key.encode()).digest()[:8], "little")


class RngStream:
    """Named, independent substreams of one 64-bit seed.

    ``generator(name)`` seeds numpy's PCG64 with the pair (seed, hash(name))
    through a SeedSequence, so substreams never overlap in practice and the
    same (seed, name) always reproduces the same draws.
    """

    def __init__(self, seed):
        self.seed = int(seed) & (2**64 - 1)

    def generator(self, name):
        tag = int.from_bytes(hashlib.sha256(name.encode()).digest()[:8], "little")
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence([self.seed, tag])))

    def substream_seed(self, name):
        return int(self.generator(name).integers(0, 2**63))


def uniform_points(n, domain, rng):
    """``n`` i.i.d. uniform points in the box ``domain`` = [(lo, hi), ...]."""
    lo = np.array([d[0] for d in domain], dtype=float)
    hi = np.array([d[1] for d in domain], dtype=float)
    if not np.all(hi > lo):
        raise ConfigurationError(f"empty domain {domain}")
    if int(n) < 1:
        raise ConfigurationError(f"n must be positive, got {n}")
    return lo + (hi - lo) * rng.uniform(size=(int(n), len(domain)))


def boundary_initial_points(problem, counts, rng):
    """Boundary and initial sets with ground-truth targets.

    ``counts`` is ``(n_boundary, n_initial)``.  Returns the tuple
    ``(bc_points, bc_targets, bc_partners, ic_points, ic_u, ic_ut)``.
    Dirichlet boundaries alternate between the two x-ends at uniform random
    times; periodic boundaries get ``n_boundary // 2`` matched pairs.
    """
    n_bc, n_ic = (int(c) for c in counts)
    (x0, x1) = problem.x_domain
    if problem.kind is PdeKind.POISSON:
        bc = np.array([[x0], [x1]])
        return bc, problem.boundary_target(bc[:, 0]), None, None, None, None
    if n_bc < 2 or n_ic < 1:
        raise ConfigurationError(f"boundary/initial counts must be positive, got {counts}")
    t0, t1 = problem.t_domain
    if problem.periodic:
        t = t0 + (t1 - t0) * rng.uniform(size=n_bc // 2)
        left = np.column_stack([np.full_like(t, x0), t])
        right = np.column_stack([np.full_like(t, x1), t])
        bc_points, bc_targets, bc_partners = left, None, right
    else:
        t = t0 + (t1 - t0) * rng.uniform(size=n_bc)
        xs = np.where(np.arange(n_bc) % 2 == 0, x0, x1)
        bc_points = np.column_stack([xs, t])
        bc_targets = problem.boundary_target(xs, t)
        bc_partners = None
    x = x0 + (x1 - x0) * rng.uniform(size=n_ic)
    ic_points = np.column_stack([x, np.full_like(x, t0)])
    ic_u, ic_ut = problem.initial_targets(x)
    return bc_points, bc_targets, bc_partners, ic_points, ic_u, ic_ut


def make_collocation(problem, stream, n_interior=None, n_boundary=N_BOUNDARY, n_initial=N_INITIAL):
    """Full collocation sets for one run, drawn once and held fixed."""
    if problem.kind is PdeKind.POISSON:
        n = n_interior or N_INTERIOR["poisson"]
        (x0, x1) = problem.x_domain
        interior = x0 + (x1 - x0) * sobol_points(n, 1)
    else:
        n = n_interior or N_INTERIOR["time_dependent"]
        interior = uniform_points(n, [problem.x_domain, problem.t_domain], stream.generator("interior"))
    bc, bc_t, bc_p, ic, ic_u, ic_ut = boundary_initial_points(
        problem, (n_boundary, n_initial), stream.generator("boundary-initial"))
    return CollocationSets(interior=interior, bc_points=bc, bc_targets=bc_t, bc_partners=bc_p,
                           ic_points=ic, ic_u=ic_u, ic_ut=ic_ut)


def star_discrepancy_1d(points):
    """Exact star discrepancy of a 1-D point set in [0, 1)."""
    x = np.sort(np.asarray(points, dtype=float).ravel())
    n = x.size
    i = np.arange(1, n + 1)
    return float(1.0 / (2 * n) + np.max(np.abs(x - (2 * i - 1) / (2 * n))))
