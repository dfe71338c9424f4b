"""
Exception hierarchy for the witness toolkit.

Every error derives from ValueError so the CLI and the HTTP layer can keep
one `except ValueError` path and refine it by subclass where the exit code
or status differs.
"""

from typing import Optional


class DimensionMismatch(ValueError):
    """Operands do not live on compatible spaces."""


class NotHermitian(ValueError):
    """An operator expected to be Hermitian is not."""


class StateValidationError(ValueError):
    """
    A density operator or pure state failed validation.

    The `invariant` attribute names the failed check
    ('shape', 'finite', 'hermitian', 'trace', 'psd' or 'norm').
    """

    def __init__(self, invariant: str, message: str):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


class ParameterOutOfRange(ValueError):
    """A scalar parameter (k, p, restarts, samples...) is outside its domain."""


class FrameError(ValueError):
    """Base class for SIC / MUB construction and verification failures."""


class OverlapViolation(FrameError):
    """A candidate frame does not have the required pairwise overlaps."""

    def __init__(self, message: str, max_deviation: float):
        super().__init__(message)
        self.max_deviation = max_deviation


class SearchFailed(FrameError):
    """The fiducial search exhausted its restart budget."""

    def __init__(self, message: str, best_residual: float):
        super().__init__(message)
        self.best_residual = best_residual


class NotPrime(FrameError):
    """The native MUB construction only covers prime dimensions."""


class InvalidRotation(FrameError):
    """A rotation matrix is not orthogonal or does not fix the all-ones axis."""


class FramesUnavailable(FrameError):
    """No SIC or MUB frame could be provided for the requested dimension."""


class FrameFileError(ValueError):
    """A frame or matrix JSON document could not be parsed."""

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
