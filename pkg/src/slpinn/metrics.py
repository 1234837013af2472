"""Relative L2 error of a trained network on a fixed test grid."""

from dataclasses import dataclass

import numpy as np

from . import ground_truth as gt
from .errors import DegenerateReferenceError
from .network import predict
from .pde import PdeKind

POISSON_TEST_POINTS = 1024
TEST_NX = 256
TEST_NT = 101


@dataclass(frozen=True)
class TestGrid:
    """Evaluation points; for time-dependent problems a (t, x) tensor grid."""

    __test__ = False  # not a pytest class

    x: np.ndarray
    t: object = None

    @property
    def points(self):
        if self.t is None:
            return self.x[:, None]
        T, X = np.meshgrid(self.t, self.x, indexing="ij")
        return np.column_stack([X.ravel(), T.ravel()])


def test_grid(problem):
    if problem.kind is PdeKind.POISSON:
        return TestGrid(x=np.linspace(*problem.x_domain, POISSON_TEST_POINTS))
    if problem.kind is PdeKind.ALLEN_CAHN:
        # must coincide with the spectral reference's output grid
        x0, x1 = problem.x_domain
        x = x0 + (x1 - x0) * np.arange(TEST_NX) / TEST_NX
    else:
        x = np.linspace(*problem.x_domain, TEST_NX)
    return TestGrid(x=x, t=np.linspace(*problem.t_domain, TEST_NT))


test_grid.__test__ = False


def reference_values(problem, grid, cache_dir=None):
    """Ground-truth samples at ``grid.points`` (flattened in the same order)."""
    if problem.kind is PdeKind.ALLEN_CAHN:
        ref = gt.allen_cahn_reference(problem.kappa, cache_dir)
        if ref.values.shape != (grid.t.size, grid.x.size) or not np.allclose(ref.x, grid.x):
            raise ValueError("Allen-Cahn reference grid does not match the test grid")
        return ref.values.ravel()
    pts = grid.points
    if problem.kind is PdeKind.POISSON:
        return gt.poisson_exact(pts[:, 0])
    return problem.exact(pts[:, 0], pts[:, 1])


def relative_l2(predicted, reference):
    predicted = np.asarray(predicted, dtype=float).ravel()
    reference = np.asarray(reference, dtype=float).ravel()
    if predicted.shape != reference.shape:
        raise ValueError(f"length mismatch: {predicted.shape} vs {reference.shape}")
    denom = np.linalg.norm(reference)
    if denom == 0.0:
        raise DegenerateReferenceError("reference field has zero norm")
    return float(np.linalg.norm(predicted - reference) / denom)


def evaluate_run(params, activation, problem, cache_dir=None):
    grid = test_grid(problem)
    return relative_l2(predict(params, activation, grid.points), reference_values(problem, grid, cache_dir))
