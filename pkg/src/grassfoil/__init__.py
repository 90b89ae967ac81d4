"""Airfoil shape statistics on the Grassmann manifold.

Landmark airfoils are standardized onto G(n, 2) so affine deformations
(thickness, camber, chord, twist) decouple from the residual shape
variation studied with Riemannian tools: Karcher means, principal
geodesic analysis, geodesic blade interpolation, and consistent
cross-section perturbation.
"""

from .errors import (
    BladeDefinitionError,
    ConsistencyError,
    CutLocusError,
    DegenerateShapeError,
    DimensionError,
    DomainError,
    FileFormatError,
    FileParseError,
    GenerationError,
    Gl2ViolationError,
    GrassfoilError,
    IterationLimitError,
    ParameterError,
    SamplingError,
    SchemaError,
    SpanRangeError,
    TangencyError,
    TooFewPointsError,
    VersionError,
)
from .geometry import (
    AffineMap,
    CstParams,
    LandmarkMatrix,
    ShapeDiagnostics,
    affine_apply,
    affine_subgroup,
    baseline_names,
    chord_stations,
    compose_affine,
    cst_evaluate,
    cst_sweep,
    default_baselines,
    gen_dataset,
    identity_affine,
    perturb_cst,
    validate_shape,
)
from .grassmann import (
    GrassmannPoint,
    LaDecomposition,
    TangentVector,
    distance,
    exp_map,
    geodesic_point,
    inner,
    la_reconstruct,
    la_standardize,
    log_map,
    mean_affine,
    parallel_transport,
    principal_angles,
    procrustes_rotation,
)
from .pga import (
    CoordinateDomain,
    PgaModel,
    coords_of,
    corner_sweep,
    domain_contains,
    karcher_mean,
    pga_fit,
    reconstruct_with,
    synthesize,
)
from .blade import (
    AffineProfiles,
    BladeDefinition,
    BladeStation,
    build_blade,
    design_parameter_count,
    export_wireframe,
    fit_affine_splines,
    interpolate_section,
    perturb_blade,
    procrustes_cluster,
)

__version__ = "0.1.0"

__all__ = [
    "AffineMap",
    "AffineProfiles",
    "BladeDefinition",
    "BladeDefinitionError",
    "BladeStation",
    "ConsistencyError",
    "CoordinateDomain",
    "CstParams",
    "CutLocusError",
    "DegenerateShapeError",
    "DimensionError",
    "DomainError",
    "FileFormatError",
    "FileParseError",
    "GenerationError",
    "Gl2ViolationError",
    "GrassfoilError",
    "GrassmannPoint",
    "IterationLimitError",
    "LaDecomposition",
    "LandmarkMatrix",
    "ParameterError",
    "PgaModel",
    "SamplingError",
    "SchemaError",
    "ShapeDiagnostics",
    "SpanRangeError",
    "TangencyError",
    "TangentVector",
    "TooFewPointsError",
    "VersionError",
    "affine_apply",
    "affine_subgroup",
    "baseline_names",
    "build_blade",
    "chord_stations",
    "compose_affine",
    "coords_of",
    "corner_sweep",
    "cst_evaluate",
    "cst_sweep",
    "default_baselines",
    "design_parameter_count",
    "distance",
    "domain_contains",
    "exp_map",
    "export_wireframe",
    "fit_affine_splines",
    "gen_dataset",
    "geodesic_point",
    "identity_affine",
    "inner",
    "interpolate_section",
    "karcher_mean",
    "la_reconstruct",
    "la_standardize",
    "log_map",
    "mean_affine",
    "parallel_transport",
    "perturb_blade",
    "perturb_cst",
    "pga_fit",
    "principal_angles",
    "procrustes_cluster",
    "procrustes_rotation",
    "reconstruct_with",
    "synthesize",
    "validate_shape",
    "__version__",
]
