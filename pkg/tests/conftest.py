"""Shared fixtures and random-object helpers for the test suite."""

import numpy as np
import pytest

from grassfoil.geometry import cst_evaluate, default_baselines, perturb_cst
from grassfoil.grassmann import GrassmannPoint, TangentVector, la_standardize


def random_point(rng: np.random.Generator, n: int) -> GrassmannPoint:
    """Uniform-ish random point of G(n, 2) from a Gaussian matrix."""
    return GrassmannPoint(rng.normal(size=(n, 2)))


def random_horizontal(rng: np.random.Generator, point: GrassmannPoint,
                      scale: float = 1.0) -> TangentVector:
    """Random horizontal tangent at ``point`` with Frobenius norm ``scale``."""
    raw = rng.normal(size=(point.n, 2))
    raw -= point.rep @ (point.rep.T @ raw)
    norm = np.linalg.norm(raw)
    if norm == 0.0:
        raise ValueError("degenerate random draw")
    return TangentVector(raw * (scale / norm), point)


@pytest.fixture(scope="session")
def airfoil_points():
    """Standardized Grassmann points for a small airfoil family, n = 101."""
    points = []
    for k in range(12):
        params = perturb_cst(default_baselines()[k % 16], 0.15, seed=900 + k)
        points.append(la_standardize(cst_evaluate(params, 101)).point)
    return points
