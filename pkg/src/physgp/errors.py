"""Exception hierarchy shared across the package."""


class PhysGPError(Exception):
    """Base class for all package-specific errors."""


class DomainError(PhysGPError, ValueError):
    """Coordinate outside the beam domain (or FD stencil too close to an end)."""


class ParameterRangeError(PhysGPError, ValueError):
    """Physical parameters outside the representable range (hyperbolic overflow)."""


class CholeskyFailure(PhysGPError):
    """Covariance matrix not positive definite after jitter escalation."""


class OptimizationFailure(PhysGPError):
    """Every annealing proposal evaluated to -inf; the prior/config is pathological."""


class InsufficientData(PhysGPError, ValueError):
    """Fewer observations than the estimator requires."""


class SchemaError(PhysGPError, ValueError):
    """CSV file does not match a known schema."""


class PairingError(PhysGPError, ValueError):
    """Strain records with unmatched top/bottom rows."""


class MonotonicityError(PhysGPError, ValueError):
    """Time indices not strictly increasing within a sensor stream."""
