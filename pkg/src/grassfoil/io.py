"""Deterministic text formats for shapes, models, blades, and tables.

Everything here is line-oriented or JSON text, written atomically
(create-then-rename) and byte-identical for identical input. Floats are
written with enough digits that reading recovers the exact bits, so
round trips are lossless. Readers reject malformed input with the line
or key that offended; nothing is repaired silently.
"""
from __future__ import annotations

import json
import os
import re
import tempfile
from pathlib import Path

import numpy as np

from .blade import BladeDefinition, BladeStation, build_blade, fit_affine_splines
from .errors import (
    FileFormatError,
    FileParseError,
    SchemaError,
    TooFewPointsError,
    VersionError,
)
from .geometry import AffineMap, LandmarkMatrix
from .grassmann import GrassmannPoint, TangentVector
from .pga import FLATTEN_ORDER, CoordinateDomain, PgaModel, unflatten_tangent

FORMAT_VERSION = 1

_FLOAT_FMT = "%.16e"
_TOKEN = re.compile(r"\S+")


def _write_text(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=str(path.parent) or ".",
                               prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


# ---------------------------------------------------------------------------
# coordinate listings


def write_coordinates(path, shape: LandmarkMatrix, name: str = "section") -> None:
    """Name line followed by one "x y" pair per landmark."""
    if "\n" in name or "\r" in name:
        raise FileFormatError("coordinate name must be a single line")
    lines = [name]
    for x, y in shape.points:
        lines.append(f"{_FLOAT_FMT % x} {_FLOAT_FMT % y}")
    _write_text(path, "\n".join(lines) + "\n")


def read_coordinates(path) -> tuple[str, LandmarkMatrix]:
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines:
        raise FileParseError("empty coordinate file", line=1)
    name = lines[0]
    points = []
    for lineno, line in enumerate(lines[1:], start=2):
        tokens = list(_TOKEN.finditer(line))
        if len(tokens) != 2:
            raise FileParseError(
                f"expected 2 values per line, found {len(tokens)}", line=lineno)
        pair = []
        for tok in tokens:
            try:
                value = float(tok.group())
            except ValueError:
                raise FileParseError(
                    f"not a number: {tok.group()!r}", line=lineno,
                    column=tok.start() + 1) from None
            if not np.isfinite(value):
                raise FileParseError(
                    f"non-finite value: {tok.group()!r}", line=lineno,
                    column=tok.start() + 1)
            pair.append(value)
        points.append(pair)
    if len(points) < 3:
        raise TooFewPointsError(
            f"a shape needs at least 3 points, file has {len(points)}")
    return name, LandmarkMatrix(np.array(points))


# ---------------------------------------------------------------------------
# JSON plumbing


def write_json(path, payload) -> None:
    _write_text(path, json.dumps(payload, indent=1, sort_keys=True) + "\n")


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as err:
        raise FileParseError(f"invalid JSON: {err.msg}", line=err.lineno,
                             column=err.colno) from None


def _get(mapping, key: str, path: str = ""):
    full = f"{path}.{key}" if path else key
    if not isinstance(mapping, dict):
        raise SchemaError(f"expected an object at {path or 'top level'!r}")
    if key not in mapping:
        raise SchemaError(f"missing key {full!r}")
    return mapping[key]


def _as_array(value, shape, key: str) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise SchemaError(f"key {key!r} is not a numeric array") from None
    if arr.shape != shape:
        raise SchemaError(
            f"key {key!r} has shape {arr.shape}, expected {shape}")
    if not np.all(np.isfinite(arr)):
        raise SchemaError(f"key {key!r} contains non-finite values")
    return arr


def _check_version(data, kind: str) -> None:
    version = _get(data, "format_version")
    if version != FORMAT_VERSION:
        raise VersionError(
            f"unsupported {kind} format_version {version!r}; "
            f"this build reads version {FORMAT_VERSION}")


# ---------------------------------------------------------------------------
# model files


def write_model(path, model: PgaModel) -> None:
    payload = {
        "format_version": FORMAT_VERSION,
        "n": model.n,
        "r": model.r,
        "flatten_order": FLATTEN_ORDER,
        "mean": model.mean.rep.ravel(order="F").tolist(),
        "eigenvalues": model.eigenvalues.tolist(),
        "basis": model.basis_matrix().tolist(),
        "domain": {
            "bounds_min": model.domain.bounds_min.tolist(),
            "bounds_max": model.domain.bounds_max.tolist(),
            "ellipsoid_radii": model.domain.ellipsoid_radii.tolist(),
        },
        "training_coords": model.training_coords.tolist(),
    }
    write_json(path, payload)


def read_model(path) -> PgaModel:
    data = read_json(path)
    _check_version(data, "model")
    n = _get(data, "n")
    r = _get(data, "r")
    if not (isinstance(n, int) and n >= 3):
        raise SchemaError(f"key 'n' must be an integer >= 3, got {n!r}")
    if not (isinstance(r, int) and r >= 1):
        raise SchemaError(f"key 'r' must be a positive integer, got {r!r}")
    order = _get(data, "flatten_order")
    if order != FLATTEN_ORDER:
        raise SchemaError(
            f"key 'flatten_order' is {order!r}; this build reads {FLATTEN_ORDER!r}")
    mean_vec = _as_array(_get(data, "mean"), (2 * n,), "mean")
    eigenvalues = _as_array(_get(data, "eigenvalues"), (r,), "eigenvalues")
    basis_rows = _as_array(_get(data, "basis"), (r, 2 * n), "basis")
    domain_data = _get(data, "domain")
    domain = CoordinateDomain(
        bounds_min=_as_array(_get(domain_data, "bounds_min", "domain"), (r,),
                             "domain.bounds_min"),
        bounds_max=_as_array(_get(domain_data, "bounds_max", "domain"), (r,),
                             "domain.bounds_max"),
        ellipsoid_radii=_as_array(_get(domain_data, "ellipsoid_radii", "domain"),
                                  (r,), "domain.ellipsoid_radii"),
    )
    coords_raw = _get(data, "training_coords")
    try:
        n_train = len(coords_raw)
    except TypeError:
        raise SchemaError("key 'training_coords' is not an array") from None
    coords = _as_array(coords_raw, (n_train, r), "training_coords")
    mean = GrassmannPoint(unflatten_tangent(mean_vec, n))
    basis = tuple(TangentVector(unflatten_tangent(row, n), mean)
                  for row in basis_rows)
    return PgaModel(mean, basis, eigenvalues, domain, coords)


# ---------------------------------------------------------------------------
# affine maps


def write_affine(path, affine: AffineMap) -> None:
    write_json(path, {
        "format_version": FORMAT_VERSION,
        "linear": affine.linear.tolist(),
        "translation": affine.translation.tolist(),
    })


def read_affine(path) -> AffineMap:
    data = read_json(path)
    _check_version(data, "affine")
    return AffineMap(_as_array(_get(data, "linear"), (2, 2), "linear"),
                     _as_array(_get(data, "translation"), (2,), "translation"))


# ---------------------------------------------------------------------------
# blade files


def write_blade(path, blade: BladeDefinition) -> None:
    """Full-fidelity blade listing: every station keeps its clustered
    representative and corrected affine factor, so reading restores the
    exact object without re-running standardization."""
    stations = []
    for station, rep in zip(blade.stations, blade.aligned):
        stations.append({
            "eta": station.eta,
            "section": station.section.points.tolist(),
            "affine": {
                "linear": station.affine.linear.tolist(),
                "translation": station.affine.translation.tolist(),
            },
            "representative": rep.rep.tolist(),
        })
    write_json(path, {
        "format_version": FORMAT_VERSION,
        "n": blade.n,
        "stations": stations,
    })


def read_blade(path) -> BladeDefinition:
    """Restore a blade; stations must be all-explicit or all-bare.

    Explicit stations carry representative and affine and are trusted
    bit-for-bit. Bare stations carry only eta and section and go through
    standardization and clustering again. Mixing the two styles would make
    the result depend on which stations were trusted, so it is rejected.
    """
    data = read_json(path)
    _check_version(data, "blade")
    n = _get(data, "n")
    stations_raw = _get(data, "stations")
    if not isinstance(stations_raw, list) or len(stations_raw) < 2:
        raise SchemaError("key 'stations' must list at least 2 stations")
    explicit_flags = []
    for i, st in enumerate(stations_raw):
        if not isinstance(st, dict):
            raise SchemaError(f"key 'stations[{i}]' must be an object")
        explicit_flags.append("representative" in st or "affine" in st)
    if any(explicit_flags) and not all(explicit_flags):
        raise SchemaError(
            "stations mix explicit representative/affine entries with bare "
            "ones; supply them for every station or for none")
    etas = []
    sections = []
    for i, st in enumerate(stations_raw):
        key = f"stations[{i}]"
        eta = _get(st, "eta", key)
        if not isinstance(eta, (int, float)):
            raise SchemaError(f"key '{key}.eta' must be a number")
        etas.append(float(eta))
        raw = _get(st, "section", key)
        try:
            count = len(raw)
        except TypeError:
            raise SchemaError(f"key '{key}.section' is not an array") from None
        if count != n:
            raise SchemaError(
                f"key '{key}.section' has {count} points, expected n = {n}")
        sections.append(LandmarkMatrix(_as_array(raw, (n, 2), f"{key}.section")))
    if not all(explicit_flags):
        return build_blade(etas, sections)
    stations = []
    aligned = []
    for i, (st, eta, section) in enumerate(zip(stations_raw, etas, sections)):
        key = f"stations[{i}]"
        affine_data = _get(st, "affine", key)
        affine = AffineMap(
            _as_array(_get(affine_data, "linear", f"{key}.affine"), (2, 2),
                      f"{key}.affine.linear"),
            _as_array(_get(affine_data, "translation", f"{key}.affine"), (2,),
                      f"{key}.affine.translation"))
        rep = _as_array(_get(st, "representative", key), (n, 2),
                        f"{key}.representative")
        stations.append(BladeStation(eta, section, affine))
        aligned.append(GrassmannPoint(rep))
    return BladeDefinition(tuple(stations), tuple(aligned),
                           fit_affine_splines(stations))


# ---------------------------------------------------------------------------
# tables and wireframes


def write_table(path, header: list[str], rows) -> None:
    """CSV with shortest-exact float formatting."""
    lines = [",".join(header)]
    width = len(header)
    for row in rows:
        if len(row) != width:
            raise FileFormatError(
                f"row has {len(row)} fields, header has {width}")
        lines.append(",".join(
            repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)
            for v in row))
    _write_text(path, "\n".join(lines) + "\n")


_WIREFRAME_HEADER = ["section", "landmark", "x", "y", "eta"]


def write_wireframe(path, grid: np.ndarray) -> None:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 3 or grid.shape[2] != 3:
        raise FileFormatError(
            f"wireframe grid must be (spans, n, 3), got {grid.shape}")
    rows = []
    for i in range(grid.shape[0]):
        for j in range(grid.shape[1]):
            x, y, eta = grid[i, j]
            rows.append([i, j, float(x), float(y), float(eta)])
    write_table(path, _WIREFRAME_HEADER, rows)


def read_wireframe(path) -> np.ndarray:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].split(",") != _WIREFRAME_HEADER:
        raise FileParseError(
            "wireframe header must be " + ",".join(_WIREFRAME_HEADER), line=1)
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != 5:
            raise FileParseError(
                f"expected 5 fields, found {len(fields)}", line=lineno)
        try:
            records.append((int(fields[0]), int(fields[1]), float(fields[2]),
                            float(fields[3]), float(fields[4])))
        except ValueError:
            raise FileParseError("malformed record", line=lineno) from None
    if not records:
        raise FileParseError("wireframe file has no records", line=2)
    spans = max(r[0] for r in records) + 1
    per = max(r[1] for r in records) + 1
    if len(records) != spans * per:
        raise FileParseError(
            f"expected {spans * per} records for a {spans} x {per} grid, "
            f"found {len(records)}", line=len(lines))
    grid = np.full((spans, per, 3), np.nan)
    for sec, lm, x, y, eta in records:
        grid[sec, lm] = (x, y, eta)
    if np.any(np.isnan(grid)):
        raise FileParseError("grid has missing (section, landmark) records",
                             line=len(lines))
    return grid
