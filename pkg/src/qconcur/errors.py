"""Exception types shared across the package."""


class NonHermitian(ValueError):
    """Matrix fails the Hermitian symmetry check."""


class NoConvergence(ArithmeticError):
    """An iterative computation exceeded its iteration budget."""


class NegativeEigenvalue(ValueError):
    """A matrix expected to be positive semidefinite has a genuinely
    negative eigenvalue (below the round-off clamp)."""


class NotNormalized(ValueError):
    """A state vector, amplitude set or weight set is not unit-normalized."""


class Overflow(OverflowError):
    """Result (or a required intermediate) exceeds double-precision range."""


class InvalidParameters(ValueError):
    """Parameters violate a documented precondition."""


class FactorizationFailure(ArithmeticError):
    """Covariance matrix could not be Cholesky-factorized even after
    diagonal jitter."""


class StepTooLarge(RuntimeError):
    """Integrator norm drift exceeded its tolerance."""


class GridMismatch(ValueError):
    """Trajectory results do not share a common time grid."""


class NonPositiveWeight(ValueError):
    """A closed-form population came out non-positive; reported instead of
    being silently clamped."""


class ConfigError(ValueError):
    """Malformed configuration or input file."""
