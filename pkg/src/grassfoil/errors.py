"""Exception hierarchy shared across the package.

Everything raised deliberately by this package derives from
:class:`GrassfoilError`, so callers (and the CLI) can catch one type.
"""
from __future__ import annotations


class GrassfoilError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(GrassfoilError):
    """An argument value violates an operation's contract."""


class SamplingError(GrassfoilError):
    """Invalid landmark sampling request (e.g. even or too-small count)."""


class DomainError(GrassfoilError):
    """A scalar parameter lies outside its admissible open interval."""


class Gl2ViolationError(GrassfoilError):
    """A 2x2 linear factor is (numerically) rank deficient."""


class DegenerateShapeError(GrassfoilError):
    """Landmarks are too close to collinear for a stable decomposition."""


class DimensionError(GrassfoilError):
    """Mismatched or unsupported array dimensions."""


class TangencyError(GrassfoilError):
    """A purported tangent vector is not horizontal at its base point."""


class CutLocusError(GrassfoilError):
    """Endpoint at or beyond the cut locus; the geodesic is not unique.

    Recoverable: distances remain well defined, only Log is refused.
    """

    def __init__(self, message: str, *, max_angle: float | None = None,
                 station_index: int | None = None):
        super().__init__(message)
        self.max_angle = max_angle
        self.station_index = station_index


class IterationLimitError(GrassfoilError):
    """A fixed-point iteration hit its iteration cap before converging."""

    def __init__(self, message: str, *, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class ConsistencyError(GrassfoilError):
    """Transported quantities failed their invariance check."""


class GenerationError(GrassfoilError):
    """Dataset generation could not produce a valid shape."""


class SpanRangeError(GrassfoilError):
    """Requested span position lies outside the defined blade span."""


class BladeDefinitionError(GrassfoilError):
    """A blade definition is structurally invalid."""


class FileFormatError(GrassfoilError):
    """Base class for file reading/writing failures."""


class FileParseError(FileFormatError):
    """Malformed text input; carries the 1-based line (and column) hit."""

    def __init__(self, message: str, *, line: int | None = None,
                 column: int | None = None):
        super().__init__(message)
        self.line = line
        self.column = column


class SchemaError(FileFormatError):
    """Structured file misses a key or holds a malformed value."""


class VersionError(FileFormatError):
    """Structured file declares an unsupported format version."""


class TooFewPointsError(FileFormatError):
    """Coordinate input holds fewer landmarks than the minimum of 3."""
