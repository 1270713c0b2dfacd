"""Exception types shared across the package."""


class InforateError(Exception):
    """Base class for all package-specific errors."""


class OutOfDomainError(InforateError, ValueError):
    """Point lies outside the domain of a piecewise function."""


class ConstantBranchError(InforateError, ValueError):
    """Operation requires an injective branch but hit a constant piece."""


class RangeMismatchError(InforateError, ValueError):
    """Range of the inner function is not covered by the outer domain."""


class NotNormalizedError(InforateError, ValueError):
    """Density does not integrate to one within tolerance."""


class BadParameterError(InforateError, ValueError):
    """Parameter outside its admissible set."""


class TooFewSamplesError(InforateError, ValueError):
    """Sample size below the minimum required by an estimator."""


class NoConvergenceError(InforateError, RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class NotLumpableError(InforateError, RuntimeError):
    """Output process is not verifiably Markov; exact rate refused."""


class ParseError(InforateError, ValueError):
    """Malformed declarative configuration."""


class IncompatibleSpecError(InforateError, ValueError):
    """Function and process specs cannot be analyzed together."""
