"""Blade assembly from ordered cross-sections.

A blade is a sequence of airfoil sections at increasing normalized span
positions eta in [0, 1]. Each section is standardized to a subspace
representative plus an affine factor; representatives are clustered by
optimal rotations so that adjacent sections connect smoothly, spans are
filled in by piecewise geodesics, and the affine factors follow
monotone-preserving cubic profiles in eta. Perturbations move every
section along parallel-transported copies of one tangent direction, so a
single coordinate vector deforms the whole blade consistently.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import (
    BladeDefinitionError,
    ConsistencyError,
    CutLocusError,
    DimensionError,
    ParameterError,
    SpanRangeError,
)
from .geometry import AffineMap, LandmarkMatrix
from .grassmann import (
    GrassmannPoint,
    TangentVector,
    _geodesic_from_factors,
    _transport_many,
    exp_map,
    geodesic_point,
    la_standardize,
    log_map,
    procrustes_rotation,
)
from .pga import PgaModel

AFFINE_COMPONENT_NAMES = ("m00", "m01", "m10", "m11", "b0", "b1")


def _affine_components(affine: AffineMap) -> np.ndarray:
    return np.concatenate([affine.linear.ravel(), affine.translation])


@dataclass(frozen=True, eq=False)
class BladeStation:
    """One cross-section: span position, landmarks, and its affine factor.

    The affine factor is expressed against the clustered representative,
    so section = aligned_rep @ linear + translation per row holds exactly.
    """

    eta: float
    section: LandmarkMatrix
    affine: AffineMap

    def __post_init__(self):
        eta = float(self.eta)
        if not np.isfinite(eta):
            raise BladeDefinitionError(f"span position must be finite, got {eta}")
        object.__setattr__(self, "eta", eta)


class AffineProfiles:
    """Componentwise monotone cubic profiles of the affine factor over span.

    One interpolant per entry of the 2x2 matrix and the offset pair,
    exact at the knots.
    """

    def __init__(self, etas: np.ndarray, values: np.ndarray):
        etas = np.array(etas, dtype=float)
        values = np.array(values, dtype=float)
        if etas.ndim != 1 or len(etas) < 2:
            raise BladeDefinitionError("profiles need at least 2 span knots")
        if np.any(np.diff(etas) <= 0.0):
            raise BladeDefinitionError(
                "span knots must be strictly increasing (duplicates included)")
        if values.shape != (len(etas), 6):
            raise DimensionError(
                f"expected ({len(etas)}, 6) component values, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise BladeDefinitionError("profile knot values must be finite")
        etas.setflags(write=False)
        values.setflags(write=False)
        self.etas = etas
        self.values = values
        self._spline = PchipInterpolator(etas, values, axis=0)

    def components_at(self, eta: float) -> np.ndarray:
        return np.asarray(self._spline(eta), dtype=float)

    def affine_at(self, eta: float) -> AffineMap:
        vals = self.components_at(eta)
        return AffineMap(vals[:4].reshape(2, 2), vals[4:])

    @property
    def varying(self) -> np.ndarray:
        """Mask over the six components: does the profile actually change?

        Variation below 1e-12 relative to the component's magnitude reads
        as constant; aligning identical sections leaves rotation residue
        around 1e-16 that must not count as a design parameter.
        """
        scale = np.maximum(np.abs(self.values).max(axis=0), 1.0)
        return np.ptp(self.values, axis=0) > 1e-12 * scale

    def varying_count(self) -> int:
        return int(np.count_nonzero(self.varying))


@dataclass(frozen=True, eq=False)
class BladeDefinition:
    """Ordered stations, their clustered representatives, affine profiles."""

    stations: tuple[BladeStation, ...]
    aligned: tuple[GrassmannPoint, ...]
    profiles: AffineProfiles

    def __post_init__(self):
        stations = tuple(self.stations)
        aligned = tuple(self.aligned)
        if len(stations) < 2:
            raise BladeDefinitionError("a blade needs at least 2 stations")
        if len(aligned) != len(stations):
            raise BladeDefinitionError(
                "one aligned representative per station required")
        etas = np.array([s.eta for s in stations])
        if np.any(np.diff(etas) <= 0.0):
            raise BladeDefinitionError("station spans must be strictly increasing")
        n = stations[0].section.n
        for s, a in zip(stations, aligned):
            if s.section.n != n or a.n != n:
                raise DimensionError("all stations must share one landmark count")
        object.__setattr__(self, "stations", stations)
        object.__setattr__(self, "aligned", aligned)

    @property
    def etas(self) -> np.ndarray:
        return np.array([s.eta for s in self.stations])

    @property
    def n(self) -> int:
        return self.stations[0].section.n

    @property
    def n_stations(self) -> int:
        return len(self.stations)


def procrustes_cluster(points: Sequence[GrassmannPoint],
                       tip_to_hub: bool = True) -> list[GrassmannPoint]:
    """Rotate each representative onto its already-aligned neighbor.

    Every station keeps its subspace; only the in-plane rotation gauge
    changes, which is what makes adjacent geodesic segments meet without
    spurious twisting. ``tip_to_hub`` fixes the last station and walks
    down; otherwise the first is fixed and the walk goes up.
    """
    if len(points) < 2:
        raise ParameterError("clustering needs at least 2 points")
    aligned = list(points)
    if tip_to_hub:
        order = range(len(points) - 2, -1, -1)
        neighbor = +1
    else:
        order = range(1, len(points))
        neighbor = -1
    for k in order:
        rot = procrustes_rotation(aligned[k + neighbor], aligned[k])
        aligned[k] = GrassmannPoint(aligned[k].rep @ rot)
    return aligned


def fit_affine_splines(stations: Sequence[BladeStation]) -> AffineProfiles:
    """Interpolating profiles through the stations' affine components."""
    if len(stations) < 2:
        raise BladeDefinitionError("profiles need at least 2 stations")
    etas = np.array([s.eta for s in stations])
    values = np.array([_affine_components(s.affine) for s in stations])
    return AffineProfiles(etas, values)


def build_blade(etas: Sequence[float], sections: Sequence,
                tip_to_hub: bool = True) -> BladeDefinition:
    """Standardize, cluster, and spline a sequence of sections into a blade.

    The affine factor stored per station is re-expressed against the
    clustered representative (the clustering rotation is folded into the
    matrix part), so reconstruction from stored pieces is exact.
    """
    if len(etas) != len(sections):
        raise BladeDefinitionError(
            f"{len(etas)} span positions for {len(sections)} sections")
    if len(sections) < 2:
        raise BladeDefinitionError("a blade needs at least 2 stations")
    shapes = [s if isinstance(s, LandmarkMatrix) else LandmarkMatrix(s)
              for s in sections]
    decomps = [la_standardize(s) for s in shapes]
    aligned = procrustes_cluster([d.point for d in decomps], tip_to_hub)
    stations = []
    for eta, shape, decomp, rep in zip(etas, shapes, decomps, aligned):
        offset = decomp.affine.translation
        linear = rep.rep.T @ (shape.points - offset)
        stations.append(BladeStation(float(eta), shape, AffineMap(linear, offset)))
    return BladeDefinition(tuple(stations), tuple(aligned),
                           fit_affine_splines(stations))


def _locate_segment(etas: np.ndarray, eta: float) -> tuple[int, float]:
    if not np.isfinite(eta) or eta < etas[0] or eta > etas[-1]:
        raise SpanRangeError(
            f"span {eta!r} outside [{etas[0]:g}, {etas[-1]:g}]; "
            "extrapolation is not supported")
    idx = int(np.searchsorted(etas, eta, side="right")) - 1
    idx = min(max(idx, 0), len(etas) - 2)
    s = (eta - etas[idx]) / (etas[idx + 1] - etas[idx])
    return idx, s


def interpolate_section(blade: BladeDefinition, eta: float) -> LandmarkMatrix:
    """Physical cross-section at any span inside the blade.

    Piecewise geodesic between the bracketing aligned representatives with
    a segment-local parameter linear in eta, rendered through the affine
    profiles. At a knot this reproduces the stored section.
    """
    etas = blade.etas
    idx, s = _locate_segment(etas, float(eta))
    point = geodesic_point(blade.aligned[idx], blade.aligned[idx + 1], s)
    affine = blade.profiles.affine_at(float(eta))
    return LandmarkMatrix(point.rep @ affine.linear + affine.translation)


def perturb_blade(blade: BladeDefinition, model: PgaModel, t: np.ndarray,
                  consistency_tol: float = 1e-9) -> BladeDefinition:
    """Deform every station along one transported tangent direction.

    The coordinate vector t picks a tangent at the model mean; parallel
    transport carries it along the geodesic to each station, where it is
    re-expressed in that station's rotation gauge and exponentiated. Being
    an isometry, transport preserves the coordinates against the
    transported basis; that is checked per station and per direction.
    Affine factors and profiles are untouched: only subspaces move.
    """
    t = np.asarray(t, dtype=float)
    if t.shape != (model.r,):
        raise DimensionError(f"expected {model.r} coordinates, got shape {t.shape}")
    if model.n != blade.n:
        raise DimensionError(
            f"model landmarks ({model.n}) do not match blade ({blade.n})")
    if not np.any(t):
        return blade
    basis_mats = [b.mat for b in model.basis]
    v = np.tensordot(t, np.array(basis_mats), axes=(0, 0))
    new_stations = []
    new_aligned = []
    for k, (station, rep) in enumerate(zip(blade.stations, blade.aligned)):
        try:
            direction = log_map(model.mean, rep)
        except CutLocusError as err:
            raise CutLocusError(
                f"station {k} is at the cut locus of the model mean",
                max_angle=err.max_angle, station_index=k) from err
        moved = _transport_many(model.mean, direction, [v] + basis_mats, 1.0)
        end = _geodesic_from_factors(model.mean, direction, 1.0)
        proj = end.rep @ (end.rep.T @ np.array(moved))
        moved = [m - p for m, p in zip(moved, proj)]
        tau_v, tau_basis = moved[0], moved[1:]
        coords = np.array([float(np.sum(tau_v * tb)) for tb in tau_basis])
        drift = np.max(np.abs(coords - t))
        if drift > consistency_tol:
            raise ConsistencyError(
                f"transported coordinates at station {k} drifted by {drift:.3e} "
                f"(tolerance {consistency_tol:.1e})")
        gauge = end.rep.T @ rep.rep
        delta = TangentVector(tau_v @ gauge, rep)
        moved_rep = exp_map(rep, delta)
        section = LandmarkMatrix(
            moved_rep.rep @ station.affine.linear + station.affine.translation)
        new_aligned.append(moved_rep)
        new_stations.append(BladeStation(station.eta, section, station.affine))
    return BladeDefinition(tuple(new_stations), tuple(new_aligned), blade.profiles)


def export_wireframe(blade: BladeDefinition, spans: int,
                     samples_per_section: int | None = None) -> np.ndarray:
    """Interpolated sections on a uniform span grid, stacked as (spans, n, 3).

    The third coordinate is the span position itself, giving a plottable
    wireframe. ``samples_per_section`` thins each section to an evenly
    spaced landmark subset.
    """
    if spans < 2:
        raise ParameterError(f"a wireframe needs at least 2 spans, got {spans}")
    n = blade.n
    if samples_per_section is None:
        take = np.arange(n)
    else:
        if not (3 <= samples_per_section <= n):
            raise ParameterError(
                f"samples per section must be in [3, {n}], got {samples_per_section}")
        take = np.round(np.linspace(0.0, n - 1, samples_per_section)).astype(int)
    etas = blade.etas
    grid_etas = np.linspace(etas[0], etas[-1], spans)
    grid = np.empty((spans, len(take), 3))
    for i, eta in enumerate(grid_etas):
        section = interpolate_section(blade, float(eta))
        grid[i, :, :2] = section.points[take]
        grid[i, :, 2] = eta
    return grid


def design_parameter_count(blade: BladeDefinition, model: PgaModel) -> int:
    """Independent design parameters: model coordinates plus varying profiles."""
    return model.r + blade.profiles.varying_count()
