"""Tests for standardization, geodesics, transport, and Procrustes."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grassfoil.errors import (CutLocusError, DegenerateShapeError,
                              TangencyError)
from grassfoil.geometry import AffineMap, LandmarkMatrix, cst_evaluate
from grassfoil.geometry import default_baselines
from grassfoil.grassmann import (GrassmannPoint, TangentVector, distance,
                                 exp_map, geodesic_point, inner,
                                 la_reconstruct, la_standardize, log_map,
                                 mean_affine, orthonormalize,
                                 parallel_transport, principal_angles,
                                 procrustes_rotation)

from conftest import random_horizontal, random_point


def plane(n, i, j):
    """Coordinate 2-plane spanned by axes i and j of R^n."""
    rep = np.zeros((n, 2))
    rep[i, 0] = 1.0
    rep[j, 1] = 1.0
    return GrassmannPoint(rep)


def rotation(phi):
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, -s], [s, c]])


# ---------------------------------------------------------------------------
# representatives and tangents


def test_orthonormalize_is_deterministic_projection():
    rng = np.random.default_rng(0)
    raw = rng.normal(size=(30, 2))
    q = orthonormalize(raw)
    np.testing.assert_allclose(q.T @ q, np.eye(2), atol=1e-14)
    assert np.array_equal(q, orthonormalize(raw))
    # already-orthonormal input is preserved up to roundoff, not re-gauged
    np.testing.assert_allclose(orthonormalize(q), q, atol=1e-14)


def test_point_requires_full_rank():
    with pytest.raises(DegenerateShapeError):
        GrassmannPoint(np.ones((10, 2)))


def test_tangent_must_be_horizontal():
    rng = np.random.default_rng(1)
    p = random_point(rng, 20)
    with pytest.raises(TangencyError):
        TangentVector(p.rep.copy(), p)
    # the projected residual is horizontal by construction
    v = random_horizontal(rng, p)
    assert np.max(np.abs(p.rep.T @ v.mat)) < 1e-12
    assert v.norm == pytest.approx(1.0)


def test_inner_is_the_trace_metric():
    rng = np.random.default_rng(2)
    p = random_point(rng, 20)
    u = random_horizontal(rng, p)
    w = random_horizontal(rng, p, scale=2.0)
    assert inner(u, u) == pytest.approx(1.0)
    assert inner(u, w) == pytest.approx(inner(w, u))
    assert inner(u, w) == pytest.approx(float(np.trace(u.mat.T @ w.mat)))


# ---------------------------------------------------------------------------
# LA standardization


def test_square_example_standardizes_to_scaled_identity():
    x = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    d = la_standardize(LandmarkMatrix(x))
    np.testing.assert_allclose(d.affine.translation, np.zeros(2), atol=1e-15)
    np.testing.assert_allclose(d.point.rep, x / np.sqrt(2.0), atol=1e-14)
    np.testing.assert_allclose(d.affine.linear, np.sqrt(2.0) * np.eye(2),
                               atol=1e-14)


def test_standardize_properties():
    shape = cst_evaluate(default_baselines()[2], 101)
    d = la_standardize(shape)
    rep = d.point.rep
    np.testing.assert_allclose(rep.T @ rep, np.eye(2), atol=1e-13)
    np.testing.assert_allclose(rep.mean(axis=0), np.zeros(2), atol=1e-14)
    np.testing.assert_allclose(d.affine.translation,
                               shape.points.mean(axis=0), atol=1e-14)
    back = la_reconstruct(d)
    assert np.max(np.abs(back.points - shape.points)) < 1e-10


def test_standardize_idempotent_on_representative():
    shape = cst_evaluate(default_baselines()[2], 101)
    rep = la_standardize(shape).point.rep
    again = la_standardize(LandmarkMatrix(rep))
    sigma = np.linalg.svd(again.affine.linear, compute_uv=False)
    np.testing.assert_allclose(sigma, np.ones(2), atol=1e-12)


def test_standardize_rejects_rank_deficient():
    pts = np.column_stack([np.linspace(0, 1, 20), np.linspace(0, 3, 20)])
    with pytest.raises(DegenerateShapeError):
        la_standardize(LandmarkMatrix(pts))


def test_gl2_invariance_including_reflections():
    rng = np.random.default_rng(3)
    shape = cst_evaluate(default_baselines()[1], 101)
    base = la_standardize(shape).point
    for k in range(30):
        m = rng.normal(size=(2, 2))
        while abs(np.linalg.det(m)) < 0.05:
            m = rng.normal(size=(2, 2))
        if k % 3 == 0:
            m[:, 0] *= -1.0  # force a reflection
        b = rng.normal(size=2)
        moved = LandmarkMatrix(shape.points @ m + b)
        other = la_standardize(moved).point
        assert distance(base, other) < 1e-10


def test_mean_affine_is_componentwise():
    a1 = AffineMap(np.array([[2.0, 0.0], [0.0, 1.0]]), np.array([1.0, 0.0]))
    a2 = AffineMap(np.array([[4.0, 2.0], [0.0, 3.0]]), np.array([3.0, 2.0]))
    m = mean_affine([a1, a2])
    np.testing.assert_allclose(m.linear, [[3.0, 1.0], [0.0, 2.0]])
    np.testing.assert_allclose(m.translation, [2.0, 1.0])


# ---------------------------------------------------------------------------
# principal angles and distance


def test_planted_principal_angles():
    n = 10
    p = plane(n, 0, 1)
    theta = 0.3
    rep = np.zeros((n, 2))
    rep[0, 0] = np.cos(theta)
    rep[2, 0] = np.sin(theta)
    rep[1, 1] = 1.0
    q = GrassmannPoint(rep)
    angles = principal_angles(p, q)
    np.testing.assert_allclose(np.sort(angles), [0.0, theta], atol=1e-12)
    assert distance(p, q) == pytest.approx(theta, abs=1e-12)


def test_tiny_angles_resolved_by_sine_path():
    n, eps = 16, 1e-9
    p = plane(n, 0, 1)
    rep = p.rep.copy()
    rep[2, 0] = eps
    q = GrassmannPoint(orthonormalize(rep))
    angles = principal_angles(p, q)
    assert np.max(angles) == pytest.approx(eps, rel=1e-6)


def test_orthogonal_planes_distance():
    p = plane(4, 0, 1)
    q = plane(4, 2, 3)
    assert distance(p, q) == pytest.approx(np.pi / np.sqrt(2.0), abs=1e-12)


def test_distance_ignores_representative_rotation():
    rng = np.random.default_rng(4)
    p, q = random_point(rng, 25), random_point(rng, 25)
    rotated = GrassmannPoint(q.rep @ rotation(1.1))
    assert abs(distance(p, q) - distance(p, rotated)) < 1e-12


# ---------------------------------------------------------------------------
# exp / log


def test_exp_of_zero_is_identity():
    rng = np.random.default_rng(5)
    p = random_point(rng, 30)
    out = exp_map(p, TangentVector(np.zeros((30, 2)), p))
    assert out is p


def test_log_exp_round_trip_subspace():
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(100):
        p, q = random_point(rng, 40), random_point(rng, 40)
        try:
            delta = log_map(p, q)
        except CutLocusError:
            continue
        back = exp_map(p, delta)
        worst = max(worst, distance(back, q))
    assert worst < 1e-9


def test_exp_log_tangent_round_trip():
    rng = np.random.default_rng(7)
    for _ in range(50):
        p = random_point(rng, 40)
        v = random_horizontal(rng, p, scale=rng.uniform(0.05, 1.2))
        q = exp_map(p, v)
        back = log_map(p, q)
        assert np.max(np.abs(back.mat - v.mat)) < 1e-9


def test_exp_generated_pairs_round_trip_representatives():
    # when the cross-Gram is symmetric positive definite the log/exp pair
    # reproduces the exact representative, not just its span
    rng = np.random.default_rng(8)
    for _ in range(25):
        p = random_point(rng, 40)
        v = random_horizontal(rng, p, scale=rng.uniform(0.1, 1.3))
        q = exp_map(p, v)
        again = exp_map(p, log_map(p, q))
        assert np.max(np.abs(again.rep - q.rep)) < 1e-9


def test_log_distance_consistency():
    rng = np.random.default_rng(9)
    for _ in range(25):
        p, q = random_point(rng, 30), random_point(rng, 30)
        assert log_map(p, q).norm == pytest.approx(distance(p, q), abs=1e-10)


def test_log_invariant_to_target_rotation():
    rng = np.random.default_rng(10)
    p, q = random_point(rng, 30), random_point(rng, 30)
    delta = log_map(p, q)
    delta2 = log_map(p, GrassmannPoint(q.rep @ rotation(0.7)))
    assert np.max(np.abs(delta.mat - delta2.mat)) < 1e-12


def test_cut_locus_raises():
    p = plane(4, 0, 1)
    q = plane(4, 2, 3)
    with pytest.raises(CutLocusError) as err:
        log_map(p, q)
    assert err.value.max_angle == pytest.approx(np.pi / 2.0, abs=1e-12)
    # sharing one direction still pins the other angle at pi/2
    with pytest.raises(CutLocusError):
        log_map(plane(4, 0, 1), plane(4, 1, 2))


def test_near_cut_locus_is_still_usable():
    theta = np.pi / 2.0 - 1e-5
    p = plane(6, 0, 1)
    rep = np.zeros((6, 2))
    rep[0, 0] = np.cos(theta)
    rep[2, 0] = np.sin(theta)
    rep[1, 1] = 1.0
    q = GrassmannPoint(rep)
    delta = log_map(p, q)
    assert delta.norm == pytest.approx(theta, abs=1e-9)
    assert distance(exp_map(p, delta), q) < 1e-9


# ---------------------------------------------------------------------------
# geodesics


def test_geodesic_endpoints_and_midpoint():
    rng = np.random.default_rng(11)
    p, q = random_point(rng, 35), random_point(rng, 35)
    assert distance(geodesic_point(p, q, 0.0), p) < 1e-12
    assert distance(geodesic_point(p, q, 1.0), q) < 1e-9
    mid = geodesic_point(p, q, 0.5)
    d = distance(p, q)
    assert distance(p, mid) == pytest.approx(d / 2.0, abs=1e-9)
    assert distance(mid, q) == pytest.approx(d / 2.0, abs=1e-9)


def test_geodesic_is_unit_speed_linear():
    rng = np.random.default_rng(12)
    p, q = random_point(rng, 35), random_point(rng, 35)
    d = distance(p, q)
    for t in (0.2, 0.4, 0.7):
        assert distance(p, geodesic_point(p, q, t)) == pytest.approx(
            t * d, abs=1e-9)


# ---------------------------------------------------------------------------
# parallel transport


def test_transport_at_zero_returns_input():
    rng = np.random.default_rng(13)
    p = random_point(rng, 30)
    v = random_horizontal(rng, p)
    w = random_horizontal(rng, p, scale=0.5)
    out = parallel_transport(p, v, w, 0.0)
    assert np.array_equal(out.mat, w.mat)


def test_transport_isometry():
    rng = np.random.default_rng(14)
    worst = 0.0
    for _ in range(60):
        p = random_point(rng, 30)
        v = random_horizontal(rng, p, scale=rng.uniform(0.1, 1.2))
        w1 = random_horizontal(rng, p, scale=rng.uniform(0.2, 2.0))
        w2 = random_horizontal(rng, p, scale=rng.uniform(0.2, 2.0))
        t1 = parallel_transport(p, v, w1, 1.0)
        t2 = parallel_transport(p, v, w2, 1.0)
        worst = max(worst, abs(inner(t1, t2) - inner(w1, w2)))
    assert worst < 1e-10


def test_transport_lands_horizontal_at_endpoint():
    rng = np.random.default_rng(15)
    p = random_point(rng, 30)
    v = random_horizontal(rng, p, scale=0.8)
    w = random_horizontal(rng, p, scale=1.5)
    out = parallel_transport(p, v, w, 1.0)
    end = exp_map(p, v)
    assert np.max(np.abs(end.rep.T @ out.mat)) < 1e-9


def test_transported_velocity_matches_finite_difference():
    rng = np.random.default_rng(16)
    p = random_point(rng, 30)
    v = random_horizontal(rng, p, scale=0.9)
    t, h = 0.6, 1e-6
    moved = parallel_transport(p, v, v, t)
    ahead = exp_map(p, TangentVector((t + h) * v.mat, p))
    behind = exp_map(p, TangentVector((t - h) * v.mat, p))
    fd = (ahead.rep - behind.rep) / (2.0 * h)
    assert np.max(np.abs(fd - moved.mat)) < 1e-6


# ---------------------------------------------------------------------------
# Procrustes


def test_procrustes_recovers_planted_rotation():
    rng = np.random.default_rng(17)
    for phi in (-2.5, -0.4, 0.0, 0.9, 3.0):
        p = random_point(rng, 25)
        q = GrassmannPoint(p.rep @ rotation(phi))
        r = procrustes_rotation(p, q)
        assert np.linalg.det(r) == pytest.approx(1.0, abs=1e-12)
        assert np.max(np.abs(p.rep - q.rep @ r)) < 1e-12


def test_procrustes_never_beaten_by_grid_search():
    rng = np.random.default_rng(18)
    grid = np.linspace(0.0, 2.0 * np.pi, 3600, endpoint=False)
    for _ in range(10):
        p, q = random_point(rng, 20), random_point(rng, 20)
        r = procrustes_rotation(p, q)
        best = np.linalg.norm(p.rep - q.rep @ r)
        grid_best = min(
            np.linalg.norm(p.rep - q.rep @ rotation(phi)) for phi in grid)
        assert best <= grid_best + 1e-12


def test_procrustes_stays_special_orthogonal():
    # even when a reflection would fit better, the result is a rotation
    rng = np.random.default_rng(19)
    p = random_point(rng, 25)
    q = GrassmannPoint(p.rep @ np.array([[1.0, 0.0], [0.0, -1.0]]))
    r = procrustes_rotation(p, q)
    assert np.linalg.det(r) == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# properties


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=40, deadline=None)
def test_distance_symmetry(seed):
    rng = np.random.default_rng(seed)
    p, q = random_point(rng, 15), random_point(rng, 15)
    assert abs(distance(p, q) - distance(q, p)) < 1e-10


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=40, deadline=None)
def test_distance_triangle_inequality(seed):
    rng = np.random.default_rng(seed)
    p, q, s = (random_point(rng, 15) for _ in range(3))
    assert distance(p, q) <= distance(p, s) + distance(s, q) + 1e-10


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=40, deadline=None)
def test_standardization_quotient_property(seed):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(12, 2))
    if abs(np.linalg.det(pts.T @ pts)) < 1e-8:
        return
    m = rng.normal(size=(2, 2))
    if abs(np.linalg.det(m)) < 1e-2:
        return
    b = rng.normal(size=2)
    base = la_standardize(LandmarkMatrix(pts)).point
    moved = la_standardize(LandmarkMatrix(pts @ m + b)).point
    assert distance(base, moved) < 1e-9
