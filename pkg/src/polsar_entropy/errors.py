"""Exception hierarchy.

Every error raised by the package derives from :class:`WishartError`. The CLI
maps :class:`InputError` subclasses to exit code 2 and :class:`NumericalError`
subclasses to exit code 3.
"""


class WishartError(Exception):
    """Base class for all package errors."""


class InputError(WishartError, ValueError):
    """Malformed or inconsistent input."""


class NumericalError(WishartError, ArithmeticError):
    """A computation could not be carried out numerically."""


class PoleError(NumericalError):
    """Gamma-family function evaluated at a non-positive integer."""


class NotPositiveDefiniteError(NumericalError):
    """Cholesky factorization failed."""


class DegenerateSampleError(NumericalError):
    """The likelihood equation for the looks has no root below the upper bound."""


class NoRootError(NumericalError):
    """Root finding failed on every candidate branch."""


class EntropyOverflowError(NumericalError, OverflowError):
    """A log-space quantity does not fit in a double once exponentiated."""


class ReplicaFailureError(NumericalError):
    """Too many Monte Carlo replicas failed to fit."""


class DimensionError(InputError):
    """Matrix dimensions do not agree."""


class UnsupportedKindError(InputError):
    """The requested entropy kind does not support the operation."""


class MixedKindError(InputError):
    """Estimates of different entropy kinds were combined."""


class FormatError(InputError):
    """Malformed covariance stack or mask file."""


class MagicMismatchError(FormatError):
    """File does not start with the expected magic bytes."""


class TruncatedPayloadError(FormatError):
    """File ends before the payload announced by its header."""


class RegionError(InputError):
    """Region outside the image or selecting no pixels."""
