"""Airfoil synthesis, affine deformations, and dataset generation.

Shapes are discrete boundaries: ``n`` landmarks stacked as an ``(n, 2)``
matrix, ordered trailing edge -> upper surface -> leading edge -> lower
surface -> trailing edge. Surfaces come from a class/shape transformation:
each surface height is ``C(psi) * S(psi)`` with class function
``C(psi) = psi**0.5 * (1 - psi)**1.0`` and ``S`` a degree-8 Bernstein
expansion of that surface's 9 coefficients, evaluated on cosine-spaced
chord stations shared by every shape of a given landmark count.

Affine deformations act on the right, ``X @ M + outer(1, b)``, so that the
linear factor composes with the subspace representation downstream.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainError,
    GenerationError,
    Gl2ViolationError,
    ParameterError,
    SamplingError,
)

logger = logging.getLogger(__name__)

#: Class-function exponents: square-root leading edge, sharp trailing edge.
CLASS_EXPONENT_LE = 0.5
CLASS_EXPONENT_TE = 1.0

#: Bernstein degree per surface; 9 coefficients each side, 18 free in total.
BERNSTEIN_DEGREE = 8
COEFFS_PER_SURFACE = BERNSTEIN_DEGREE + 1

#: Default landmark count: 201 points per surface sharing the leading edge.
DEFAULT_LANDMARK_COUNT = 401

_RANK_RATIO_TOL = 1e-10
_DET_TOL = 1e-12


# ---------------------------------------------------------------------------
# value types


@dataclass(frozen=True, eq=False)
class LandmarkMatrix:
    """An ``(n, 2)`` matrix of boundary landmarks, immutable after creation."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ParameterError(
                f"expected an (n, 2) array, got shape {pts.shape}")
        if pts.shape[0] < 3:
            raise ParameterError(
                f"landmark matrix needs at least 3 rows, got {pts.shape[0]}")
        if not np.all(np.isfinite(pts)):
            raise ParameterError("landmark matrix contains non-finite values")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True, eq=False)
class AffineMap:
    """Right-acting affine deformation ``X -> X @ linear + outer(1, translation)``."""

    linear: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        m = np.array(self.linear, dtype=float)
        b = np.array(self.translation, dtype=float)
        if m.shape != (2, 2):
            raise ParameterError(f"linear factor must be 2x2, got {m.shape}")
        if b.shape != (2,):
            raise ParameterError(
                f"translation must have shape (2,), got {b.shape}")
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(b))):
            raise ParameterError("affine map contains non-finite values")
        if abs(float(np.linalg.det(m))) <= _DET_TOL:
            raise Gl2ViolationError(
                "linear factor is rank deficient (|det| <= 1e-12); the "
                "deformation would collapse landmarks onto a line")
        m.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "linear", m)
        object.__setattr__(self, "translation", b)

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.linear))

    def inverse(self) -> "AffineMap":
        """The affine map undoing this one under the right action."""
        inv = np.linalg.inv(self.linear)
        return AffineMap(inv, -self.translation @ inv)


def identity_affine() -> AffineMap:
    return AffineMap(np.eye(2), np.zeros(2))


def compose_affine(first: AffineMap, second: AffineMap) -> AffineMap:
    """Map equivalent to applying ``first`` then ``second``."""
    return AffineMap(first.linear @ second.linear,
                     first.translation @ second.linear + second.translation)


@dataclass(frozen=True, eq=False)
class CstParams:
    """Coefficients of one airfoil: 9 per surface plus trailing-edge thickness.

    The trailing-edge thickness stays 0 throughout the shipped dataset; the
    field exists so externally supplied airfoils round-trip faithfully.
    """

    upper: np.ndarray
    lower: np.ndarray
    te_thickness: float = 0.0

    def __post_init__(self):
        for name in ("upper", "lower"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (COEFFS_PER_SURFACE,):
                raise ParameterError(
                    f"{name} surface needs exactly {COEFFS_PER_SURFACE} "
                    f"coefficients, got shape {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise ParameterError(f"{name} coefficients are not finite")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not np.isfinite(self.te_thickness):
            raise ParameterError("trailing-edge thickness is not finite")

    def as_vector(self) -> np.ndarray:
        """The 18 free coefficients, upper surface first."""
        return np.concatenate([self.upper, self.lower])

    @classmethod
    def from_vector(cls, vec: np.ndarray, te_thickness: float = 0.0) -> "CstParams":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (2 * COEFFS_PER_SURFACE,):
            raise ParameterError(
                f"coefficient vector needs {2 * COEFFS_PER_SURFACE} entries, "
                f"got shape {vec.shape}")
        return cls(vec[:COEFFS_PER_SURFACE], vec[COEFFS_PER_SURFACE:],
                   te_thickness)


@dataclass(frozen=True)
class ShapeDiagnostics:
    """Validity report for one landmark matrix; advisory, never raised."""

    rank_ratio: float
    rank_ok: bool
    simple: bool
    single_le_extremum: bool
    positive_orientation: bool

    @property
    def ordering_ok(self) -> bool:
        return self.single_le_extremum and self.positive_orientation

    @property
    def passed(self) -> bool:
        return self.rank_ok and self.simple and self.ordering_ok


# ---------------------------------------------------------------------------
# evaluation


def chord_stations(n: int) -> np.ndarray:
    """Cosine-spaced chord stations for one surface of an ``n``-landmark shape.

    Returns ``(1 - cos(pi * j / m)) / 2`` for ``j = 0..m`` with
    ``m = (n - 1) // 2``: leading edge at 0, trailing edge at 1, points
    clustered toward both ends where curvature concentrates.
    """
    if n % 2 == 0:
        raise SamplingError(f"landmark count must be odd, got {n}")
    if n < 7:
        raise SamplingError(f"landmark count must be at least 7, got {n}")
    m = (n - 1) // 2
    return (1.0 - np.cos(np.pi * np.arange(m + 1) / m)) / 2.0


def _bernstein_design(psi: np.ndarray) -> np.ndarray:
    """Design matrix of degree-8 Bernstein polynomials at the stations."""
    j = np.arange(COEFFS_PER_SURFACE)
    binom = np.array([math.comb(BERNSTEIN_DEGREE, k) for k in j], dtype=float)
    p = psi[:, None]
    return binom * p ** j * (1.0 - p) ** (BERNSTEIN_DEGREE - j)


def _class_function(psi: np.ndarray) -> np.ndarray:
    return psi ** CLASS_EXPONENT_LE * (1.0 - psi) ** CLASS_EXPONENT_TE


def cst_evaluate(params: CstParams, n: int = DEFAULT_LANDMARK_COUNT) -> LandmarkMatrix:
    """Evaluate an airfoil boundary at ``n`` landmarks.

    The boundary runs trailing edge -> upper surface -> leading edge ->
    lower surface -> trailing edge, with the leading-edge point shared, so
    each surface carries ``(n + 1) // 2`` of the ``n`` landmarks. All shapes
    with the same ``n`` share identical chordwise station values, which is
    what makes landmark-wise correspondence across a dataset meaningful.
    """
    psi = chord_stations(n)
    design = _bernstein_design(psi)
    c = _class_function(psi)
    te_half = params.te_thickness / 2.0
    y_upper = c * (design @ params.upper) + psi * te_half
    y_lower = c * (design @ params.lower) - psi * te_half
    x = np.concatenate([psi[::-1], psi[1:]])
    y = np.concatenate([y_upper[::-1], y_lower[1:]])
    return LandmarkMatrix(np.column_stack([x, y]))


def perturb_cst(params: CstParams, fraction: float, seed: int) -> CstParams:
    """Scale every free coefficient by ``1 + fraction * u`` with ``u ~ U[-1, 1]``.

    Each coefficient moves by at most ``fraction`` of its own magnitude, so
    sign patterns survive. Identical seeds reproduce identical draws.
    """
    if not (0.0 <= fraction <= 1.0):
        raise ParameterError(
            f"perturbation fraction must lie in [0, 1], got {fraction}")
    rng = np.random.default_rng(seed)
    u = rng.uniform(-1.0, 1.0, size=2 * COEFFS_PER_SURFACE)
    return CstParams(params.upper * (1.0 + fraction * u[:COEFFS_PER_SURFACE]),
                     params.lower * (1.0 + fraction * u[COEFFS_PER_SURFACE:]),
                     params.te_thickness)


# ---------------------------------------------------------------------------
# affine deformations

SUBGROUP_KINDS = ("thickness", "camber", "chord", "twist")


def affine_subgroup(kind: str, t: float) -> AffineMap:
    """One-parameter family of named deformations, ``t`` in the open (0, 1).

    thickness  diag(1, t)            scales heights only
    camber     2 * diag(1 - t, t)    rebalances the two coordinates
    chord      diag(t, 1)            scales the chordwise coordinate
    twist      rotation by t * pi/2
    """
    if kind not in SUBGROUP_KINDS:
        raise ParameterError(
            f"unknown deformation kind {kind!r}; expected one of "
            f"{', '.join(SUBGROUP_KINDS)}")
    if not (0.0 < t < 1.0):
        raise DomainError(
            f"deformation parameter must lie strictly inside (0, 1), got {t}")
    if kind == "thickness":
        m = np.diag([1.0, t])
    elif kind == "camber":
        m = 2.0 * np.diag([1.0 - t, t])
    elif kind == "chord":
        m = np.diag([t, 1.0])
    else:
        angle = t * np.pi / 2.0
        c, s = np.cos(angle), np.sin(angle)
        m = np.array([[c, -s], [s, c]])
    return AffineMap(m, np.zeros(2))


def affine_apply(shape: LandmarkMatrix, affine: AffineMap) -> LandmarkMatrix:
    """Apply the right action ``X @ M + outer(1, b)``."""
    return LandmarkMatrix(shape.points @ affine.linear + affine.translation)


# ---------------------------------------------------------------------------
# validity


def _signed_area(pts: np.ndarray) -> float:
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _single_le_extremum(x: np.ndarray) -> bool:
    """True when x descends once to a single minimum and ascends back.

    Exactly the profile of a well-ordered boundary: trailing edge down the
    upper surface to the leading edge, then back along the lower surface.
    """
    d = np.diff(x)
    d = d[d != 0.0]
    if d.size < 2:
        return False
    s = np.sign(d)
    changes = int(np.count_nonzero(s[1:] != s[:-1]))
    return bool(changes == 1 and s[0] < 0)


def _has_proper_crossing(pts: np.ndarray) -> bool:
    """O(n^2) proper-crossing test over the closed polyline.

    Zero-length segments and segments that merely touch at an endpoint never
    count: an orientation within rounding distance of zero (relative to the
    squared coordinate span) reads as collinear, so shapes whose surfaces
    meet at a shared endpoint survive reconstruction noise.
    """
    a = pts
    b = np.roll(pts, -1, axis=0)
    d = b - a
    # cross[i, j] = d_i x (p_j - a_i), expanded into outer products so no
    # (n, n, 2) temporaries get built
    offset = d[:, 0] * a[:, 1] - d[:, 1] * a[:, 0]
    cross_start = (np.outer(d[:, 0], a[:, 1]) - np.outer(d[:, 1], a[:, 0])
                   - offset[:, None])
    cross_end = (np.outer(d[:, 0], b[:, 1]) - np.outer(d[:, 1], b[:, 0])
                 - offset[:, None])
    span = float(np.max(np.abs(pts - pts.mean(axis=0)), initial=0.0))
    tol = 1e-12 * span * span
    straddle = (((cross_start > tol) & (cross_end < -tol))
                | ((cross_start < -tol) & (cross_end > tol)))
    proper = straddle & straddle.T
    nseg = len(pts)
    idx = np.arange(nseg)
    gap = np.abs(idx[:, None] - idx[None, :])
    adjacent = (gap <= 1) | (gap == nseg - 1)
    return bool(np.any(proper & ~adjacent))


def validate_shape(shape: LandmarkMatrix) -> ShapeDiagnostics:
    """Diagnose a landmark matrix; reports findings instead of raising.

    Checks the effective rank of the centered landmarks (collinear inputs,
    anywhere in the plane, are what make the downstream decomposition
    unstable), boundary simplicity of the closed polyline, and ordering
    sanity: a single leading-edge extremum in the first coordinate plus
    positive boundary orientation.
    """
    pts = shape.points
    centered = pts - pts.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    ratio = float(sv[1] / sv[0]) if sv[0] > 0.0 else 0.0
    return ShapeDiagnostics(
        rank_ratio=ratio,
        rank_ok=ratio > _RANK_RATIO_TOL,
        simple=not _has_proper_crossing(pts),
        single_le_extremum=_single_le_extremum(pts[:, 0]),
        positive_orientation=_signed_area(pts) > 0.0,
    )


# ---------------------------------------------------------------------------
# baseline family

# Thickness distributions (always positive) and camber distributions, as
# unit profiles over the 9 Bernstein coefficients; each baseline scales one
# of each. Keeping every |camber| strictly below the local thickness keeps
# the family and its bounded perturbations free of surface crossings.
_THICKNESS_PROFILES = {
    "flat": np.ones(9),
    "front": np.array([1.25, 1.15, 1.05, 1.00, 0.95, 0.90, 0.88, 0.86, 0.85]),
    "aft": np.array([0.85, 0.88, 0.92, 0.96, 1.00, 1.05, 1.08, 1.10, 1.12]),
}

_CAMBER_PROFILES = {
    "none": np.zeros(9),
    "mid": np.array([0.15, 0.35, 0.60, 0.80, 0.90, 0.85, 0.70, 0.50, 0.30]),
    "aft": np.array([0.08, 0.18, 0.32, 0.50, 0.68, 0.85, 0.95, 1.00, 0.90]),
    "reflex": np.array([0.20, 0.50, 0.80, 0.90, 0.80, 0.50, 0.10, -0.20, -0.35]),
}

# name, thickness profile, thickness scale, camber profile, camber scale
_BASELINE_RECIPES = (
    ("sym-thin-07", "flat", 0.07, "none", 0.0),
    ("sym-10", "flat", 0.10, "none", 0.0),
    ("sym-front-15", "front", 0.15, "none", 0.0),
    ("sym-21", "flat", 0.21, "none", 0.0),
    ("sym-front-24", "front", 0.24, "none", 0.0),
    ("camber-thin-09", "flat", 0.09, "mid", 0.030),
    ("camber-front-11", "front", 0.11, "mid", 0.045),
    ("camber-aft-12", "flat", 0.12, "aft", 0.050),
    ("camber-front-15", "front", 0.15, "mid", 0.060),
    ("camber-aft-18", "aft", 0.18, "aft", 0.060),
    ("camber-21", "flat", 0.21, "mid", 0.050),
    ("thick-aft-24", "aft", 0.24, "aft", 0.070),
    ("reflex-front-12", "front", 0.12, "reflex", 0.050),
    ("reflex-18", "flat", 0.18, "reflex", 0.060),
    ("thin-aft-08", "flat", 0.08, "aft", 0.028),
    ("thick-front-30", "front", 0.30, "mid", 0.080),
)


def baseline_names() -> list[str]:
    return [name for name, *_ in _BASELINE_RECIPES]


def default_baselines() -> list[CstParams]:
    """The 16 built-in baseline airfoils, thin-to-thick and symmetric-to-cambered."""
    out = []
    for _, t_name, t_scale, c_name, c_scale in _BASELINE_RECIPES:
        thick = t_scale * _THICKNESS_PROFILES[t_name]
        camber = c_scale * _CAMBER_PROFILES[c_name]
        out.append(CstParams(thick + camber, camber - thick))
    return out


# ---------------------------------------------------------------------------
# dataset generation


@dataclass(frozen=True, eq=False)
class DatasetShape:
    """One generated shape with its provenance."""

    index: int
    baseline_index: int
    params: CstParams
    landmarks: LandmarkMatrix
    attempts: int


def _derived_seed(seed: int, *key: int) -> int:
    """Per-shape integer seed; independent of generation order."""
    return int(np.random.SeedSequence([seed, *key]).generate_state(1)[0])


def _perturbation_counts(n_baselines: int, n_perturbations: int,
                         per_baseline: bool) -> list[int]:
    if per_baseline:
        return [n_perturbations] * n_baselines
    base, extra = divmod(n_perturbations, n_baselines)
    return [base + (1 if i < extra else 0) for i in range(n_baselines)]


def gen_dataset_detailed(baselines: list[CstParams], n_perturbations: int,
                         fraction: float, seed: int,
                         n: int = DEFAULT_LANDMARK_COUNT, *,
                         per_baseline: bool = False,
                         max_attempts: int = 50) -> list[DatasetShape]:
    """Baselines plus seeded perturbations, each validated on the way out.

    ``n_perturbations`` is the total across all baselines, distributed as
    evenly as possible; with ``per_baseline=True`` it applies to each
    baseline instead. Shapes failing :func:`validate_shape` are resampled
    with a fresh derived seed (logged); generation is reproducible because
    every draw's seed depends only on ``(seed, baseline, index, attempt)``.
    """
    if not baselines:
        raise ParameterError("need at least one baseline")
    if n_perturbations < 0:
        raise ParameterError("perturbation count cannot be negative")
    counts = _perturbation_counts(len(baselines), n_perturbations, per_baseline)
    shapes: list[DatasetShape] = []
    for b_idx, params in enumerate(baselines):
        landmarks = cst_evaluate(params, n)
        diag = validate_shape(landmarks)
        if not diag.passed:
            raise GenerationError(
                f"baseline {b_idx} fails validation (rank_ok={diag.rank_ok}, "
                f"simple={diag.simple}, ordering_ok={diag.ordering_ok})")
        shapes.append(DatasetShape(len(shapes), b_idx, params, landmarks, 1))
    for b_idx, params in enumerate(baselines):
        for k in range(counts[b_idx]):
            shape = None
            for attempt in range(max_attempts):
                child = _derived_seed(seed, b_idx, k, attempt)
                candidate = perturb_cst(params, fraction, child)
                landmarks = cst_evaluate(candidate, n)
                if validate_shape(landmarks).passed:
                    shape = DatasetShape(len(shapes), b_idx, candidate,
                                         landmarks, attempt + 1)
                    break
                logger.warning(
                    "rejected perturbation (baseline %d, index %d, attempt %d);"
                    " resampling", b_idx, k, attempt)
            if shape is None:
                raise GenerationError(
                    f"no valid perturbation of baseline {b_idx} after "
                    f"{max_attempts} attempts")
            shapes.append(shape)
    return shapes


def gen_dataset(baselines: list[CstParams], n_perturbations: int,
                fraction: float, seed: int,
                n: int = DEFAULT_LANDMARK_COUNT, *,
                per_baseline: bool = False) -> list[LandmarkMatrix]:
    """Landmark matrices of the baselines followed by their perturbations."""
    detailed = gen_dataset_detailed(baselines, n_perturbations, fraction,
                                    seed, n, per_baseline=per_baseline)
    return [s.landmarks for s in detailed]


# ---------------------------------------------------------------------------
# coefficient-space sweeps (for comparison against subspace-space sweeps)


def coefficient_bounds(params_list: list[CstParams]) -> tuple[np.ndarray, np.ndarray]:
    """Entrywise min/max over the 18 free coefficients of a family."""
    if not params_list:
        raise ParameterError("need at least one coefficient set")
    stack = np.array([p.as_vector() for p in params_list])
    return stack.min(axis=0), stack.max(axis=0)


def cst_sweep(corner_a: CstParams, corner_b: CstParams, steps: int,
              n: int = DEFAULT_LANDMARK_COUNT) -> list[LandmarkMatrix]:
    """Shapes along the straight segment between two coefficient vectors.

    Linear interpolation in raw coefficient space; unlike sweeps in the
    learned design space, intermediate shapes carry no validity guarantee.
    """
    if steps < 2:
        raise ParameterError(f"a sweep needs at least 2 steps, got {steps}")
    va, vb = corner_a.as_vector(), corner_b.as_vector()
    out = []
    for i in range(steps):
        s = i / (steps - 1)
        params = CstParams.from_vector((1.0 - s) * va + s * vb,
                                       corner_a.te_thickness)
        out.append(cst_evaluate(params, n))
    return out
