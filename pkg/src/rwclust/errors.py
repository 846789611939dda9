"""Exception types shared across the package."""


class RwclustError(Exception):
    """Base class for all rwclust errors."""


class PanelFormatError(RwclustError):
    """Input file cannot be parsed; carries the 1-based line/column of the bad cell."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + loc)
        self.line = line
        self.column = column


class ValidationError(RwclustError):
    """Structurally invalid data: duplicate ids, missing cells, broken invariants."""


class InsufficientDataError(RwclustError):
    """Too few observations for the requested operation."""


class BinningRangeError(RwclustError):
    """An observation falls outside the histogram grid."""


class GridCompatibilityError(RwclustError):
    """Two binned densities do not share the same (origin, width, bin count) grid."""


class DimensionError(RwclustError):
    """Mismatched lengths between paired inputs."""


class ParameterError(RwclustError):
    """A parameter or configuration value is out of its allowed range."""


class DegenerateSampleError(RwclustError):
    """A resampled subsample is too small to be represented."""
