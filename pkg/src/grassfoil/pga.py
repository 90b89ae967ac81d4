"""Intrinsic mean and principal-geodesic design spaces.

Given standardized shapes as points on the subspace manifold, this module
finds their Karcher mean by fixed-point iteration, fits an ``r``-dimensional
tangent-space basis by eigendecomposition of the second-moment matrix of
the logarithms at that mean, and exposes the resulting normal-coordinate
design space: coordinates of shapes, synthesis of new shapes, straight-line
sweeps, and a membership test for the region covered by training data.

Tangent matrices flatten column-major (all first coordinates, then all
second coordinates), and the convention is recorded in serialized models.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, IterationLimitError, ParameterError
from .geometry import AffineMap, LandmarkMatrix, validate_shape
from .grassmann import (
    GrassmannPoint,
    TangentVector,
    exp_map,
    la_reconstruct,
    LaDecomposition,
    log_map,
)

logger = logging.getLogger(__name__)

#: Flattening convention for tangent matrices in models and files.
FLATTEN_ORDER = "column-major"

_DOMAIN_MARGIN = 1.1


def flatten_tangent(mat: np.ndarray) -> np.ndarray:
    return mat.ravel(order="F")


def unflatten_tangent(vec: np.ndarray, n: int) -> np.ndarray:
    return vec.reshape((n, 2), order="F")


@dataclass(frozen=True, eq=False)
class CoordinateDomain:
    """Region of normal-coordinate space covered by the training set.

    Axis-aligned bounds plus an origin-centered ellipsoid whose semi-axes
    put every training sample inside with a 1.1x margin.
    """

    bounds_min: np.ndarray
    bounds_max: np.ndarray
    ellipsoid_radii: np.ndarray

    def __post_init__(self):
        for name in ("bounds_min", "bounds_max", "ellipsoid_radii"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.ndim != 1:
                raise DimensionError(f"{name} must be one-dimensional")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (self.bounds_min.shape == self.bounds_max.shape
                == self.ellipsoid_radii.shape):
            raise DimensionError("domain arrays must share one length")


@dataclass(frozen=True, eq=False)
class PgaModel:
    """Fitted design space: mean, tangent basis, spectrum, domain, coords."""

    mean: GrassmannPoint
    basis: tuple[TangentVector, ...]
    eigenvalues: np.ndarray
    domain: CoordinateDomain
    training_coords: np.ndarray

    def __post_init__(self):
        ev = np.array(self.eigenvalues, dtype=float)
        tc = np.array(self.training_coords, dtype=float)
        if ev.shape != (len(self.basis),):
            raise DimensionError("one eigenvalue per basis direction required")
        if tc.ndim != 2 or tc.shape[1] != len(self.basis):
            raise DimensionError(
                "training coordinates must be (N, r) with r basis directions")
        ev.setflags(write=False)
        tc.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)
        object.__setattr__(self, "training_coords", tc)
        object.__setattr__(self, "basis", tuple(self.basis))

    @property
    def r(self) -> int:
        return len(self.basis)

    @property
    def n(self) -> int:
        return self.mean.n

    def basis_matrix(self) -> np.ndarray:
        """Basis stacked as an (r, 2n) array of flattened tangents."""
        return np.array([flatten_tangent(b.mat) for b in self.basis])


# ---------------------------------------------------------------------------
# intrinsic mean


def _mean_tangent(mean: GrassmannPoint,
                  shapes: list[GrassmannPoint]) -> np.ndarray:
    logs = np.array([log_map(mean, s).mat for s in shapes])
    return logs.mean(axis=0)


def karcher_mean(shapes: list[GrassmannPoint], tol: float = 1e-10,
                 max_iter: int = 200) -> GrassmannPoint:
    """Fixed-point intrinsic mean: repeatedly exponentiate the mean logarithm.

    Starts from the first shape; stops when the mean tangent's norm (the
    gradient of the summed squared distance, up to a factor) drops below
    ``tol``. Summation order over shapes is fixed, so reruns agree exactly.
    """
    if not shapes:
        raise ParameterError("cannot average an empty set of shapes")
    mean = shapes[0]
    residual = np.inf
    for _ in range(max_iter):
        grad = _mean_tangent(mean, shapes)
        residual = float(np.linalg.norm(grad))
        if residual < tol:
            return mean
        mean = exp_map(mean, TangentVector(grad, mean))
    grad = _mean_tangent(mean, shapes)
    residual = float(np.linalg.norm(grad))
    if residual < tol:
        return mean
    raise IterationLimitError(
        f"intrinsic mean did not converge in {max_iter} iterations "
        f"(residual {residual:.3e}, tol {tol:.1e})",
        residual=residual, iterations=max_iter)


# ---------------------------------------------------------------------------
# principal geodesic fit


def pga_fit(shapes: list[GrassmannPoint], mean: GrassmannPoint, r: int, *,
            method: str = "auto") -> PgaModel:
    """Principal directions of the logarithms of ``shapes`` at ``mean``.

    Eigendecomposes the second-moment matrix ``sum_i v_i v_i' / N`` of the
    flattened logarithms; the mean itself is the centering, so no further
    subtraction happens and the eigenvalue sum equals the mean squared
    logarithm norm exactly. When fewer samples than ambient dimensions are
    given, the N x N Gram matrix yields the same spectrum cheaper; both
    routes are available explicitly for cross-checking.
    """
    if method not in ("auto", "gram", "direct"):
        raise ParameterError(f"unknown eigendecomposition method {method!r}")
    if not shapes:
        raise ParameterError("cannot fit a model to an empty set of shapes")
    n = mean.n
    n_samples = len(shapes)
    ambient = 2 * n
    max_r = min(n_samples, 2 * (n - 2))
    if not (1 <= r <= max_r):
        raise DimensionError(
            f"requested {r} directions; at most {max_r} are identifiable "
            f"from {n_samples} samples on a manifold of dimension {2 * (n - 2)}")
    logs = np.array([flatten_tangent(log_map(mean, s).mat) for s in shapes])
    use_gram = n_samples < ambient if method == "auto" else method == "gram"
    if use_gram:
        gram = (logs @ logs.T) / n_samples
        vals, vecs = np.linalg.eigh(gram)
        vals = vals[::-1][:r]
        vecs = vecs[:, ::-1][:, :r]
        safe = np.sqrt(np.where(vals > 0.0, vals, 1.0) * n_samples)
        basis_flat = ((logs.T @ vecs) / safe).T
    else:
        moment = (logs.T @ logs) / n_samples
        vals, vecs = np.linalg.eigh(moment)
        vals = vals[::-1][:r]
        basis_flat = vecs[:, ::-1][:, :r].T
    eigenvalues = np.clip(vals, 0.0, None)
    mats = _clean_directions(basis_flat, eigenvalues, mean)
    basis = tuple(TangentVector(m, mean) for m in mats)
    basis_flat = np.array([flatten_tangent(m) for m in mats])
    coords = logs @ basis_flat.T
    domain = _fit_domain(coords, eigenvalues)
    return PgaModel(mean, basis, eigenvalues, domain, coords)


def _clean_directions(basis_flat: np.ndarray, eigenvalues: np.ndarray,
                      mean: GrassmannPoint) -> list[np.ndarray]:
    """Project directions horizontal, zero out numerically dead ones, fix signs.

    Eigenvectors with eigenvalue at rounding level (relative 1e-12) carry no
    information and, from the dense route, may even leave the horizontal
    space; they become zero matrices. Live directions get re-unitized after
    projection and a sign convention (largest-magnitude entry positive) so
    the Gram and dense routes produce identical bases.
    """
    cutoff = max(float(eigenvalues[0]) * 1e-12, 1e-24) if eigenvalues.size else 0.0
    n = mean.n
    out = []
    for val, row in zip(eigenvalues, basis_flat):
        mat = unflatten_tangent(np.array(row, dtype=float), n)
        mat -= mean.rep @ (mean.rep.T @ mat)
        norm = float(np.linalg.norm(mat))
        if val <= cutoff or norm <= 0.5:
            out.append(np.zeros((n, 2)))
            continue
        mat /= norm
        flat = mat.ravel(order="F")
        if flat[np.argmax(np.abs(flat))] < 0.0:
            mat = -mat
        out.append(mat)
    return out


def _fit_domain(coords: np.ndarray, eigenvalues: np.ndarray) -> CoordinateDomain:
    scale = np.sqrt(eigenvalues)
    with np.errstate(divide="ignore", invalid="ignore"):
        normalized = np.where(scale > 0.0, coords / scale, 0.0)
    max_radius = float(np.max(np.linalg.norm(normalized, axis=1))) if len(coords) else 0.0
    return CoordinateDomain(
        bounds_min=coords.min(axis=0),
        bounds_max=coords.max(axis=0),
        ellipsoid_radii=_DOMAIN_MARGIN * max(max_radius, 1.0e-12) * scale,
    )


# ---------------------------------------------------------------------------
# the design space


def coords_of(model: PgaModel, shape: GrassmannPoint) -> np.ndarray:
    """Normal coordinates: projections of the shape's logarithm on the basis."""
    v = flatten_tangent(log_map(model.mean, shape).mat)
    return model.basis_matrix() @ v


def synthesize(model: PgaModel, t: np.ndarray) -> GrassmannPoint:
    """Shape at normal coordinates ``t``: exponentiate the basis combination."""
    t = np.asarray(t, dtype=float)
    if t.shape != (model.r,):
        raise DimensionError(
            f"expected {model.r} coordinates, got shape {t.shape}")
    mat = np.tensordot(t, np.array([b.mat for b in model.basis]), axes=(0, 0))
    return exp_map(model.mean, TangentVector(mat, model.mean))


def domain_contains(model: PgaModel, t: np.ndarray) -> bool:
    """Whether coordinates fall inside the training-data ellipsoid."""
    t = np.asarray(t, dtype=float)
    if t.shape != (model.r,):
        raise DimensionError(
            f"expected {model.r} coordinates, got shape {t.shape}")
    radii = model.domain.ellipsoid_radii
    degenerate = radii <= 0.0
    if np.any(degenerate & (np.abs(t) > 1e-12)):
        return False
    ratio = np.where(degenerate, 0.0, t / np.where(degenerate, 1.0, radii))
    return float(np.sum(ratio**2)) <= 1.0


def corner_sweep(model: PgaModel, corner_a: np.ndarray, corner_b: np.ndarray,
                 steps: int,
                 reference_affine: AffineMap | None = None) -> list[GrassmannPoint]:
    """Shapes along the straight segment between two coordinate corners.

    With a reference affine factor supplied, every synthesized shape is
    reconstructed and checked; failures are logged, never raised, so sweeps
    stay inspectable end to end.
    """
    if steps < 2:
        raise ParameterError(f"a sweep needs at least 2 steps, got {steps}")
    corner_a = np.asarray(corner_a, dtype=float)
    corner_b = np.asarray(corner_b, dtype=float)
    points = []
    for i in range(steps):
        s = i / (steps - 1)
        points.append(synthesize(model, (1.0 - s) * corner_a + s * corner_b))
    if reference_affine is not None:
        for i, point in enumerate(points):
            shape = reconstruct_with(point, reference_affine)
            diag = validate_shape(shape)
            if not (diag.rank_ok and diag.simple):
                logger.warning(
                    "sweep step %d is not a valid shape (rank_ok=%s, "
                    "simple=%s)", i, diag.rank_ok, diag.simple)
            elif not diag.ordering_ok:
                # The reference affine fixes one orientation for the whole
                # sweep; shapes whose own affine factor had the opposite
                # handedness come back mirrored. Expected, so not a warning.
                logger.info("sweep step %d reconstructs mirrored", i)
    return points


def reconstruct_with(point: GrassmannPoint,
                     affine: AffineMap) -> LandmarkMatrix:
    """Physical shape from a representative and a reference affine factor."""
    return la_reconstruct(LaDecomposition(point, affine))
