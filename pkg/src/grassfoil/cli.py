"""Batch command line for the full pipeline.

Each subcommand is a thin composition of module operations: generate a
dataset, standardize it, fit a mean or a full model, synthesize or sweep
shapes, interpolate or perturb blades, and render SVG views. Every run
writes a manifest.json next to its outputs echoing the parsed
configuration, so any artifact can be regenerated byte-identically.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import io as gio
from . import svg
from .blade import (
    design_parameter_count,
    export_wireframe,
    interpolate_section,
    perturb_blade,
)
from .errors import FileFormatError, GrassfoilError, ParameterError
from .geometry import (
    CstParams,
    LandmarkMatrix,
    baseline_names,
    cst_sweep,
    default_baselines,
    gen_dataset_detailed,
    validate_shape,
)
from .grassmann import (LaDecomposition, la_reconstruct,
                        la_standardize, log_map, mean_affine)
from .pga import (
    corner_sweep,
    domain_contains,
    karcher_mean,
    pga_fit,
    synthesize,
)

_COEFF_COLUMNS = [f"u{i}" for i in range(9)] + [f"l{i}" for i in range(9)]


def _env_float(name: str, default: float) -> float:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        raise ParameterError(
            f"environment override {name} is not a number: {raw!r}") from None


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _manifest(out: Path, args: argparse.Namespace, extra: dict | None = None) -> None:
    config = {}
    for key, value in vars(args).items():
        if key == "func":
            continue
        config[key] = str(value) if isinstance(value, Path) else value
    payload = {"package_version": __version__, "config": config}
    if extra:
        payload["results"] = extra
    gio.write_json(out / "manifest.json", payload)


def _load_shapes(source) -> list[tuple[str, "LandmarkMatrix"]]:
    src = Path(source)
    if src.is_dir():
        files = sorted(src.glob("*.dat"))
        if not files:
            raise FileFormatError(f"no .dat coordinate files under {src}")
    elif src.is_file():
        files = [src]
    else:
        raise FileFormatError(f"no such file or directory: {src}")
    return [gio.read_coordinates(f) for f in files]


def _parse_coord_vector(text: str, r: int) -> np.ndarray:
    try:
        values = np.array([float(tok) for tok in text.split(",")])
    except ValueError:
        raise ParameterError(f"could not parse coordinates {text!r}") from None
    if values.shape != (r,):
        raise ParameterError(
            f"model has {r} coordinates, got {len(values)} in {text!r}")
    return values


def _read_csv_columns(path, wanted: list[str]) -> np.ndarray:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise FileFormatError(f"{path} is empty")
    header = lines[0].split(",")
    try:
        idx = [header.index(w) for w in wanted]
    except ValueError as err:
        raise FileFormatError(f"{path} lacks column: {err}") from None
    rows = []
    for line in lines[1:]:
        fields = line.split(",")
        rows.append([float(fields[i]) for i in idx])
    if not rows:
        raise FileFormatError(f"{path} has a header but no data rows")
    return np.array(rows)


def _standardized(named_shapes):
    return [(name, la_standardize(shape)) for name, shape in named_shapes]


def _mean_residual(mean, points) -> float:
    logs = np.array([log_map(mean, p).mat for p in points])
    return float(np.linalg.norm(logs.mean(axis=0)))


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen_dataset(args) -> None:
    recipes = default_baselines()
    names = baseline_names()
    if not (1 <= args.baselines <= len(recipes)):
        raise ParameterError(
            f"--baselines must be in [1, {len(recipes)}], got {args.baselines}")
    count = args.per_baseline if args.per_baseline is not None else args.total
    out = _out_dir(args.out)
    detail = gen_dataset_detailed(
        recipes[:args.baselines], count, args.fraction, args.seed, args.n,
        per_baseline=args.per_baseline is not None)
    shape_dir = _out_dir(out / "shapes")
    rows = []
    for item in detail:
        kind = "baseline" if item.index < args.baselines else "perturb"
        label = f"shape-{item.index:04d} {kind} {names[item.baseline_index]}"
        gio.write_coordinates(shape_dir / f"shape-{item.index:04d}.dat",
                              item.landmarks, label)
        rows.append([item.index, item.baseline_index, kind,
                     *item.params.as_vector()])
    gio.write_table(out / "coefficients.csv",
                    ["index", "baseline", "kind", *_COEFF_COLUMNS], rows)
    _manifest(out, args, {"shapes_written": len(detail)})
    print(f"wrote {len(detail)} shapes to {shape_dir}")


def cmd_standardize(args) -> None:
    named = _load_shapes(args.shapes)
    out = _out_dir(args.out)
    rows = []
    affines = []
    for name, decomp in _standardized(named):
        a = decomp.affine
        affines.append(a)
        rows.append([name.split()[0], *a.linear.ravel(), *a.translation])
    gio.write_table(out / "affines.csv",
                    ["file", "m00", "m01", "m10", "m11", "b0", "b1"], rows)
    gio.write_affine(out / "mean_affine.json", mean_affine(affines))
    _manifest(out, args, {"shapes_standardized": len(named)})
    print(f"standardized {len(named)} shapes")


def cmd_mean(args) -> None:
    tol = _env_float("GRASSFOIL_KARCHER_TOL", args.tol)
    named = _load_shapes(args.shapes)
    out = _out_dir(args.out)
    decomps = _standardized(named)
    points = [d.point for _, d in decomps]
    mean = karcher_mean(points, tol=tol, max_iter=args.max_iter)
    affine = mean_affine([d.affine for _, d in decomps])
    gio.write_coordinates(out / "mean_rep.dat", LandmarkMatrix(mean.rep),
                          "karcher-mean-representative")
    gio.write_affine(out / "mean_affine.json", affine)
    gio.write_coordinates(out / "mean_shape.dat",
                          la_reconstruct(LaDecomposition(mean, affine)),
                          "karcher-mean-shape")
    residual = _mean_residual(mean, points)
    _manifest(out, args, {"residual": residual, "shapes": len(points),
                          "tolerance": tol})
    print(f"mean of {len(points)} shapes, gradient residual {residual:.3e}")


def cmd_pga_fit(args) -> None:
    tol = _env_float("GRASSFOIL_KARCHER_TOL", args.tol)
    named = _load_shapes(args.shapes)
    out = _out_dir(args.out)
    decomps = _standardized(named)
    points = [d.point for _, d in decomps]
    mean = karcher_mean(points, tol=tol, max_iter=args.max_iter)
    model = pga_fit(points, mean, args.r, method=args.method)
    gio.write_model(out / "model.json", model)
    gio.write_affine(out / "mean_affine.json",
                     mean_affine([d.affine for _, d in decomps]))
    coord_rows = [[i, name.split()[0], *model.training_coords[i]]
                  for i, (name, _) in enumerate(named)]
    gio.write_table(out / "normal_coords.csv",
                    ["index", "file", *[f"t{j}" for j in range(model.r)]],
                    coord_rows)
    ev = model.eigenvalues
    ev_rows = [[j, ev[j], ev[j] / ev[j - 1] if j and ev[j - 1] > 0 else 1.0]
               for j in range(model.r)]
    gio.write_table(out / "eigenvalues.csv",
                    ["component", "eigenvalue", "ratio_to_previous"], ev_rows)
    _manifest(out, args, {
        "residual": _mean_residual(mean, points),
        "eigenvalues": ev.tolist(), "shapes": len(points),
        "tolerance": tol})
    print(f"fitted r={model.r} model on {len(points)} shapes; "
          f"eigenvalues {np.array2string(ev, precision=3)}")


def cmd_synth(args) -> None:
    model = gio.read_model(args.model)
    t = _parse_coord_vector(args.coords, model.r)
    out = _out_dir(args.out)
    point = synthesize(model, t)
    inside = domain_contains(model, t)
    gio.write_coordinates(out / "representative.dat",
                          LandmarkMatrix(point.rep),
                          "synthesized-representative")
    results = {"in_domain": inside, "coords": t.tolist()}
    if args.affine is not None:
        affine = gio.read_affine(args.affine)
        shape = la_reconstruct(LaDecomposition(point, affine))
        gio.write_coordinates(out / "shape.dat", shape, "synthesized-shape")
        diag = validate_shape(shape)
        results["valid"] = bool(diag.rank_ok and diag.simple)
        results["rank_ok"] = bool(diag.rank_ok)
        results["simple"] = bool(diag.simple)
        results["ordering_ok"] = bool(diag.ordering_ok)
    _manifest(out, args, results)
    print(f"synthesized at t={t.tolist()}, in_domain={inside}")


def _sweep_corners(rng: np.random.Generator, lo: np.ndarray,
                   hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mask = rng.integers(0, 2, size=lo.shape).astype(bool)
    corner = np.where(mask, hi, lo)
    opposite = np.where(mask, lo, hi)
    return corner, opposite


# A sweep shape counts as valid when it is full rank and non-self-
# intersecting. Orientation is reported separately: the shared reference
# affine mirrors shapes whose own affine factor had opposite handedness.
_VALIDITY_COLUMNS = ["valid", "rank_ok", "simple", "ordering_ok"]


def _validity_flags(shape) -> list[int]:
    diag = validate_shape(shape)
    return [int(diag.rank_ok and diag.simple), int(diag.rank_ok),
            int(diag.simple), int(diag.ordering_ok)]


def cmd_sweep(args) -> None:
    if args.space == "pga" and (args.model is None or args.affine is None):
        raise ParameterError("--space pga needs --model and --affine")
    if args.space == "cst" and args.coefficients is None:
        raise ParameterError("--space cst needs --coefficients")
    summaries = []
    if args.space == "pga":
        model = gio.read_model(args.model)
        affine = gio.read_affine(args.affine)
        out = _out_dir(args.out)
        lo, hi = model.domain.bounds_min, model.domain.bounds_max
        for k in range(args.count):
            rng = np.random.default_rng(
                np.random.SeedSequence([args.seed, k]))
            a, b = _sweep_corners(rng, lo, hi)
            points = corner_sweep(model, a, b, args.steps,
                                  reference_affine=affine)
            shapes = [la_reconstruct(LaDecomposition(p, affine))
                      for p in points]
            fracs = np.linspace(0.0, 1.0, args.steps)
            rows = []
            for i, shape in enumerate(shapes):
                ti = (1 - fracs[i]) * a + fracs[i] * b
                rows.append([i, *ti, *_validity_flags(shape)])
            gio.write_table(out / f"sweep-{k}.csv",
                            ["step", *[f"t{j}" for j in range(model.r)],
                             *_VALIDITY_COLUMNS], rows)
            (out / f"sweep-{k}.svg").write_text(
                svg.render_strip([s.points for s in shapes]))
            summaries.append({
                "sweep": k,
                "valid": int(sum(r[-4] for r in rows)),
                "steps": args.steps})
    else:
        coeffs = _read_csv_columns(args.coefficients, _COEFF_COLUMNS)
        lo, hi = coeffs.min(axis=0), coeffs.max(axis=0)
        out = _out_dir(args.out)
        for k in range(args.count):
            rng = np.random.default_rng(
                np.random.SeedSequence([args.seed, k]))
            a, b = _sweep_corners(rng, lo, hi)
            shapes = cst_sweep(CstParams.from_vector(a),
                               CstParams.from_vector(b), args.steps, args.n)
            fracs = np.linspace(0.0, 1.0, args.steps)
            rows = []
            for i, shape in enumerate(shapes):
                ci = (1 - fracs[i]) * a + fracs[i] * b
                rows.append([i, *ci, *_validity_flags(shape)])
            gio.write_table(out / f"sweep-{k}.csv",
                            ["step", *_COEFF_COLUMNS, *_VALIDITY_COLUMNS],
                            rows)
            (out / f"sweep-{k}.svg").write_text(
                svg.render_strip([s.points for s in shapes]))
            summaries.append({
                "sweep": k,
                "valid": int(sum(r[-4] for r in rows)),
                "steps": args.steps})
    _manifest(out, args, {"sweeps": summaries})
    total = sum(s["valid"] for s in summaries)
    print(f"{args.count} sweeps x {args.steps} steps, "
          f"{total}/{args.count * args.steps} valid shapes")


def cmd_blade_interp(args) -> None:
    if args.eta is None and args.spans is None:
        raise ParameterError("give --eta (repeatable) or --spans")
    blade = gio.read_blade(args.blade)
    out = _out_dir(args.out)
    results = {}
    if args.eta is not None:
        section_dir = _out_dir(out / "sections")
        for i, eta in enumerate(args.eta):
            section = interpolate_section(blade, eta)
            gio.write_coordinates(section_dir / f"section-{i:03d}.dat",
                                  section, f"section eta={eta!r}")
        results["sections"] = len(args.eta)
    if args.spans is not None:
        grid = export_wireframe(blade, args.spans, args.samples_per_section)
        gio.write_wireframe(out / "wireframe.csv", grid)
        results["wireframe_shape"] = list(grid.shape)
    _manifest(out, args, results)
    print(f"interpolated blade: {results}")


def cmd_blade_perturb(args) -> None:
    tol = _env_float("GRASSFOIL_CONSISTENCY_TOL", args.consistency_tol)
    blade = gio.read_blade(args.blade)
    model = gio.read_model(args.model)
    t = _parse_coord_vector(args.coords, model.r)
    out = _out_dir(args.out)
    perturbed = perturb_blade(blade, model, t, consistency_tol=tol)
    gio.write_blade(out / "blade.json", perturbed)
    count = design_parameter_count(blade, model)
    _manifest(out, args, {
        "in_domain": domain_contains(model, t),
        "design_parameters": count, "tolerance": tol})
    print(f"perturbed {blade.n_stations} stations; "
          f"design parameter count {count}")


def cmd_render(args) -> None:
    out = _out_dir(args.out)
    if args.kind in ("shapes", "strip"):
        if args.shapes is None:
            raise ParameterError(f"--kind {args.kind} needs --shapes")
        named = _load_shapes(args.shapes)
        pts = [shape.points for _, shape in named]
        text = (svg.render_shapes(pts) if args.kind == "shapes"
                else svg.render_strip(pts))
    elif args.kind == "scatter":
        if args.table is None:
            raise ParameterError("--kind scatter needs --table")
        i, j = (int(v) for v in args.axes.split(","))
        data = _read_csv_columns(args.table, [f"t{i}", f"t{j}"])
        text = svg.render_scatter(data)
    else:
        if args.wireframe is None:
            raise ParameterError("--kind wireframe needs --wireframe")
        text = svg.render_wireframe(gio.read_wireframe(args.wireframe))
    target = out / f"{args.kind}.svg"
    target.write_text(text)
    _manifest(out, args, {"svg": target.name})
    print(f"rendered {target}")


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grassfoil",
        description="Airfoil shape spaces on the Grassmannian: dataset "
                    "generation, standardization, intrinsic statistics, "
                    "blade assembly, and rendering.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-dataset", help="generate baseline + perturbed shapes")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--baselines", type=int, default=16)
    p.add_argument("--total", type=int, default=1000,
                   help="total perturbations split across baselines")
    p.add_argument("--per-baseline", type=int, default=None,
                   help="perturbations per baseline instead of --total")
    p.add_argument("--fraction", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--n", type=int, default=401)
    p.set_defaults(func=cmd_gen_dataset)

    p = sub.add_parser("standardize", help="affine factors of a shape family")
    p.add_argument("--shapes", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_standardize)

    p = sub.add_parser("mean", help="Karcher mean of standardized shapes")
    p.add_argument("--shapes", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=200)
    p.set_defaults(func=cmd_mean)

    p = sub.add_parser("pga-fit", help="principal-geodesic model of a family")
    p.add_argument("--shapes", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--r", type=int, default=4)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--method", choices=("auto", "gram", "direct"),
                   default="auto")
    p.set_defaults(func=cmd_pga_fit)

    p = sub.add_parser("synth", help="shape at given normal coordinates")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--coords", required=True)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--affine", type=Path, default=None,
                   help="affine file for physical reconstruction")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("sweep", help="corner-to-corner design-space sweeps")
    p.add_argument("--space", choices=("pga", "cst"), default="pga")
    p.add_argument("--model", type=Path, default=None)
    p.add_argument("--affine", type=Path, default=None)
    p.add_argument("--coefficients", type=Path, default=None,
                   help="coefficients.csv for --space cst")
    p.add_argument("--count", type=int, default=4)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=401)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("blade-interp", help="sections or wireframe of a blade")
    p.add_argument("--blade", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--eta", type=float, action="append", default=None)
    p.add_argument("--spans", type=int, default=None)
    p.add_argument("--samples-per-section", type=int, default=None)
    p.set_defaults(func=cmd_blade_interp)

    p = sub.add_parser("blade-perturb", help="consistent blade deformation")
    p.add_argument("--blade", required=True, type=Path)
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--coords", required=True)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--consistency-tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_blade_perturb)

    p = sub.add_parser("render", help="SVG views of shapes, scatters, blades")
    p.add_argument("--kind", choices=("shapes", "strip", "scatter", "wireframe"),
                   required=True)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--shapes", type=Path, default=None)
    p.add_argument("--table", type=Path, default=None)
    p.add_argument("--axes", default="0,1")
    p.add_argument("--wireframe", type=Path, default=None)
    p.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 2
    try:
        args.func(args)
    except GrassfoilError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
