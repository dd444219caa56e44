"""Exception hierarchy shared by the filters, the data layer and the CLI.

The CLI maps :class:`NumericError` subclasses to exit status 3 and every
other :class:`FaceKFError` to exit status 2.
"""

from __future__ import annotations


class FaceKFError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(FaceKFError, ValueError):
    """Array shapes do not agree."""


class InvalidStateError(FaceKFError, ValueError):
    """A state vector contains NaN or Inf."""


class InvalidConfigError(FaceKFError, ValueError):
    """A configuration value violates its invariant."""


class AggregationError(FaceKFError, ValueError):
    """Series cannot be combined (empty input, ragged lengths, mixed labels)."""


class NumericError(FaceKFError, ArithmeticError):
    """A filter step produced a non-finite or otherwise unusable result."""


class EvaluationError(NumericError):
    """A user-supplied function returned non-finite values."""


class SingularUpdateError(NumericError):
    """The innovation covariance is too ill-conditioned to invert."""

    def __init__(self, message: str, condition: float):
        super().__init__(message)
        self.condition = condition


class NonPSDError(NumericError):
    """A covariance matrix is not positive semi-definite, even after jitter."""

    def __init__(self, message: str, min_eigenvalue: float):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class LandmarkFileError(FaceKFError, ValueError):
    """Base class for landmark file problems.

    ``line`` is the 1-based physical line number when the problem is local to
    one line, ``path`` is attached by :func:`facekf.dataio.load_trajectory`.
    """

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.message = message
        self.line = line
        self.path = path
        super().__init__(str(self))

    def __str__(self) -> str:
        where = []
        if self.path is not None:
            where.append(str(self.path))
        if self.line is not None:
            where.append(f"line {self.line}")
        prefix = ":".join(where)
        return f"{prefix}: {self.message}" if prefix else self.message


class LandmarkFormatError(LandmarkFileError):
    """Wrong number of landmark rows."""


class LandmarkParseError(LandmarkFileError):
    """A token is not a finite decimal number."""


class FieldCountError(LandmarkFileError):
    """A row does not have exactly three fields."""
