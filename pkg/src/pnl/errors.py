"""Exception hierarchy for the pnl package.

Three branches matter to callers: ``InputDataError`` covers malformed or
insufficient user input, ``DegenerateGeometryError`` covers configurations
the solver cannot resolve, and ``TooFewInliers`` signals outlier-rejection
breakdown.  The CLI maps these onto distinct exit codes.
"""


class PnlError(Exception):
    """Base class for all errors raised by this package."""


class InputDataError(PnlError):
    """Invalid, malformed, or insufficient input data."""


class DegenerateGeometryError(PnlError):
    """A geometric configuration the estimator cannot resolve."""


# --- input-side errors -------------------------------------------------

class CoincidentPoints(InputDataError):
    """The two endpoints describe the same projective point."""


class CoincidentEndpoints(InputDataError):
    """The two image endpoints coincide; no 2D line is defined."""


class InsufficientLines(InputDataError):
    """Fewer than the minimum number of active correspondences."""


class EmptyLineSet(InputDataError):
    """An operation that needs at least one 3D line received none."""


class ParseError(InputDataError):
    """A correspondence file could not be parsed.

    ``line_number`` is the 1-based line in the offending file, when known.
    """

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class ConstraintViolation(InputDataError):
    """Raw Plücker input violates the bilinear constraint."""


class JoinError(InputDataError):
    """A 2D line record has no matching 3D record."""


class SingularIntrinsics(InputDataError):
    """The intrinsic parameters do not define an invertible ray mapping."""


# --- solver-side degeneracies ------------------------------------------

class LineThroughCameraCenter(DegenerateGeometryError):
    """The line passes through the projection center; its image is undefined."""


class DegenerateNormalization(DegenerateGeometryError):
    """2D prenormalization is undefined (all dual points coincide)."""


class ConvergenceFailed(DegenerateGeometryError):
    """An iterative procedure exhausted its iteration budget."""


class RankDeficient(DegenerateGeometryError):
    """The measurement matrix has no unique nullspace direction."""


class SingularRotationBlock(DegenerateGeometryError):
    """The left 3x3 block of the estimate has (near-)zero determinant."""


class DegenerateTranslation(DegenerateGeometryError):
    """The translation is (near-)zero; its direction cannot be recovered."""


class AmbiguousPose(DegenerateGeometryError):
    """The in-front vote between the two pose candidates is tied."""


class SceneGenerationFailed(DegenerateGeometryError):
    """No camera placement kept the whole scene in the field of view."""


# --- outlier rejection --------------------------------------------------

class TooFewInliers(PnlError):
    """Outlier rejection reduced the active set below the minimum."""
