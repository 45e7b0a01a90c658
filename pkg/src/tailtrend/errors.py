"""Exception types raised by the estimation routines.

Everything derives from :class:`EstimationError` (a ``ValueError``), so callers
that sweep over many candidate tail sizes can catch one type and record the
failure instead of aborting.
"""


class EstimationError(ValueError):
    """An estimator could not be evaluated on the given tail data."""


class NonPositiveDataError(EstimationError):
    """Log-based tail statistics need strictly positive order statistics."""


class DegenerateTailError(EstimationError):
    """The upper tail carries no usable spread (tied values, zero moments)."""


class IndexSignError(EstimationError):
    """A positive tail index is required but the estimate is not positive."""


class LogDomainError(EstimationError):
    """A log argument fell outside (0, inf); usually k is too small."""


class ZeroExceedanceError(EstimationError):
    """A group has no observations above the baseline threshold."""
