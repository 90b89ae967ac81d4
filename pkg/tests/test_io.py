"""Tests for coordinate, model, blade, and wireframe serialization."""

import json

import numpy as np
import pytest

from grassfoil.blade import build_blade, export_wireframe
from grassfoil.errors import (BladeDefinitionError, FileFormatError,
                              FileParseError, SchemaError, TooFewPointsError,
                              VersionError)
from grassfoil.geometry import (AffineMap, affine_apply, affine_subgroup,
                                cst_evaluate, default_baselines, perturb_cst)
from grassfoil.grassmann import la_standardize
from grassfoil.io import (read_affine, read_blade, read_coordinates,
                          read_model, read_wireframe, write_affine,
                          write_blade, write_coordinates, write_model,
                          write_table, write_wireframe)
from grassfoil.pga import karcher_mean, pga_fit


@pytest.fixture(scope="module")
def fitted_model():
    points = [
        la_standardize(
            cst_evaluate(perturb_cst(default_baselines()[k % 16], 0.15,
                                     seed=70 + k), 101)).point
        for k in range(8)
    ]
    mean = karcher_mean(points)
    return pga_fit(points, mean, 3)


@pytest.fixture(scope="module")
def small_blade():
    etas = [0.0, 0.5, 1.0]
    sections = []
    for k, eta in enumerate(etas):
        shape = cst_evaluate(default_baselines()[k], 51)
        sections.append(
            affine_apply(shape, affine_subgroup("chord", 0.9 - 0.3 * eta)))
    return build_blade(etas, sections)


# ---------------------------------------------------------------------------
# coordinates


def test_coordinates_round_trip_bit_exact(tmp_path):
    shape = cst_evaluate(default_baselines()[0], 401)
    path = tmp_path / "shape.dat"
    write_coordinates(path, shape, "test-shape zeta")
    name, back = read_coordinates(path)
    assert name == "test-shape zeta"
    assert np.array_equal(back.points, shape.points)


def test_coordinates_rewrite_byte_identical(tmp_path):
    shape = cst_evaluate(default_baselines()[1], 101)
    a, b = tmp_path / "a.dat", tmp_path / "b.dat"
    write_coordinates(a, shape)
    write_coordinates(b, shape)
    assert a.read_bytes() == b.read_bytes()


def test_coordinates_name_must_be_single_line(tmp_path):
    shape = cst_evaluate(default_baselines()[0], 101)
    with pytest.raises(FileFormatError):
        write_coordinates(tmp_path / "x.dat", shape, "two\nlines")


def test_parse_error_cites_line_and_column(tmp_path):
    lines = ["bad-file"]
    for i in range(8):
        lines.append(f"{i}.0 {i * 2}.0")
    lines[7] = "0.5 oops"  # line 8 after the name line... line index check
    path = tmp_path / "bad.dat"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(FileParseError) as err:
        read_coordinates(path)
    assert err.value.line == 8
    assert err.value.column == 5


def test_wrong_token_count_rejected(tmp_path):
    path = tmp_path / "bad.dat"
    path.write_text("name\n1.0 2.0\n3.0\n4.0 5.0\n")
    with pytest.raises(FileParseError) as err:
        read_coordinates(path)
    assert err.value.line == 3


def test_non_finite_rejected(tmp_path):
    path = tmp_path / "bad.dat"
    path.write_text("name\n1.0 2.0\n3.0 nan\n4.0 5.0\n")
    with pytest.raises(FileParseError):
        read_coordinates(path)


def test_too_few_points(tmp_path):
    path = tmp_path / "tiny.dat"
    path.write_text("name\n1.0 2.0\n3.0 4.0\n")
    with pytest.raises(TooFewPointsError):
        read_coordinates(path)


# ---------------------------------------------------------------------------
# model files


def test_model_round_trip_bit_exact(tmp_path, fitted_model):
    path = tmp_path / "model.json"
    write_model(path, fitted_model)
    back = read_model(path)
    assert back.n == fitted_model.n
    assert back.r == fitted_model.r
    assert np.array_equal(back.mean.rep, fitted_model.mean.rep)
    assert np.array_equal(back.eigenvalues, fitted_model.eigenvalues)
    for u, v in zip(back.basis, fitted_model.basis):
        assert np.array_equal(u.mat, v.mat)
    assert np.array_equal(back.training_coords, fitted_model.training_coords)
    assert np.array_equal(back.domain.bounds_min,
                          fitted_model.domain.bounds_min)
    assert np.array_equal(back.domain.ellipsoid_radii,
                          fitted_model.domain.ellipsoid_radii)


def test_model_rewrite_byte_identical(tmp_path, fitted_model):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    write_model(a, fitted_model)
    write_model(b, read_model(a))
    assert a.read_bytes() == b.read_bytes()


def test_model_missing_key_names_it(tmp_path, fitted_model):
    path = tmp_path / "model.json"
    write_model(path, fitted_model)
    data = json.loads(path.read_text())
    del data["eigenvalues"]
    path.write_text(json.dumps(data))
    with pytest.raises(SchemaError) as err:
        read_model(path)
    assert "eigenvalues" in str(err.value)


def test_model_nested_key_path_reported(tmp_path, fitted_model):
    path = tmp_path / "model.json"
    write_model(path, fitted_model)
    data = json.loads(path.read_text())
    del data["domain"]["bounds_min"]
    path.write_text(json.dumps(data))
    with pytest.raises(SchemaError) as err:
        read_model(path)
    assert "domain.bounds_min" in str(err.value)


def test_model_version_checked(tmp_path, fitted_model):
    path = tmp_path / "model.json"
    write_model(path, fitted_model)
    data = json.loads(path.read_text())
    data["format_version"] = 99
    path.write_text(json.dumps(data))
    with pytest.raises(VersionError):
        read_model(path)


def test_model_bad_json_cites_position(tmp_path):
    path = tmp_path / "model.json"
    path.write_text('{\n "n": 5,\n broken\n}')
    with pytest.raises(FileParseError) as err:
        read_model(path)
    assert err.value.line == 3


# ---------------------------------------------------------------------------
# affine files


def test_affine_round_trip(tmp_path):
    affine = AffineMap(np.array([[1.25, -0.5], [0.125, 2.0]]),
                       np.array([0.75, -1.5]))
    path = tmp_path / "affine.json"
    write_affine(path, affine)
    back = read_affine(path)
    assert np.array_equal(back.linear, affine.linear)
    assert np.array_equal(back.translation, affine.translation)


# ---------------------------------------------------------------------------
# blade files


def test_blade_round_trip_bit_exact(tmp_path, small_blade):
    path = tmp_path / "blade.json"
    write_blade(path, small_blade)
    back = read_blade(path)
    assert back.n == small_blade.n
    for sa, sb in zip(back.stations, small_blade.stations):
        assert sa.eta == sb.eta
        assert np.array_equal(sa.section.points, sb.section.points)
        assert np.array_equal(sa.affine.linear, sb.affine.linear)
    for ra, rb in zip(back.aligned, small_blade.aligned):
        assert np.array_equal(ra.rep, rb.rep)


def test_blade_bare_stations_rebuilt(tmp_path, small_blade):
    path = tmp_path / "blade.json"
    write_blade(path, small_blade)
    data = json.loads(path.read_text())
    for station in data["stations"]:
        del station["affine"]
        del station["representative"]
    path.write_text(json.dumps(data))
    rebuilt = read_blade(path)
    for sa, sb in zip(rebuilt.stations, small_blade.stations):
        assert np.array_equal(sa.section.points, sb.section.points)
        np.testing.assert_allclose(sa.affine.linear, sb.affine.linear,
                                   atol=1e-12)
    for ra, rb in zip(rebuilt.aligned, small_blade.aligned):
        np.testing.assert_allclose(ra.rep, rb.rep, atol=1e-12)


def test_blade_mixed_station_detail_rejected(tmp_path, small_blade):
    path = tmp_path / "blade.json"
    write_blade(path, small_blade)
    data = json.loads(path.read_text())
    del data["stations"][1]["representative"]
    del data["stations"][1]["affine"]
    path.write_text(json.dumps(data))
    with pytest.raises(SchemaError):
        read_blade(path)


def test_blade_non_increasing_eta_rejected(tmp_path, small_blade):
    path = tmp_path / "blade.json"
    write_blade(path, small_blade)
    data = json.loads(path.read_text())
    data["stations"][1]["eta"] = -0.5
    path.write_text(json.dumps(data))
    with pytest.raises(BladeDefinitionError):
        read_blade(path)


# ---------------------------------------------------------------------------
# tables and wireframes


def test_write_table_layout(tmp_path):
    path = tmp_path / "t.csv"
    write_table(path, ["i", "value"], [[0, 0.5], [1, 0.25]])
    lines = path.read_text().splitlines()
    assert lines[0] == "i,value"
    assert lines[1] == "0,0.5"
    assert len(lines) == 3


def test_wireframe_round_trip(tmp_path, small_blade):
    grid = export_wireframe(small_blade, 4, samples_per_section=13)
    path = tmp_path / "wf.csv"
    write_wireframe(path, grid)
    back = read_wireframe(path)
    assert back.shape == grid.shape
    assert np.array_equal(back, grid)


def test_wireframe_missing_record_detected(tmp_path, small_blade):
    grid = export_wireframe(small_blade, 3, samples_per_section=5)
    path = tmp_path / "wf.csv"
    write_wireframe(path, grid)
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(FileParseError):
        read_wireframe(path)
