"""Exception hierarchy shared across the package.

Validation failures (bad shapes, invalid parameters, malformed files) and
numerical failures (singular models, diverged fits) are kept distinct so the
CLI can map them to different exit codes.
"""


class ValidationError(ValueError):
    """Input violates a documented precondition or type invariant."""


class DimensionMismatchError(ValidationError):
    """Operands have incompatible dimensions."""


class NumericalError(RuntimeError):
    """A numerical procedure failed beyond the documented regularization."""


class SingularModelError(NumericalError):
    """Covariance is numerically singular even after regularization."""


class FitError(NumericalError):
    """Mixture fitting failed for every attempted configuration."""
