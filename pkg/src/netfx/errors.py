"""Exception types shared across the package."""


class NetfxError(Exception):
    """Base class for all package errors."""


class GraphError(NetfxError, ValueError):
    """Malformed graph input, unknown nodes or invalid query sets."""


class IdentifiabilityError(NetfxError):
    """No valid adjustment set exists among the observed covariates."""


class SingularDesignError(NetfxError, ArithmeticError):
    """The regression design is (numerically) rank deficient."""

    def __init__(self, message, columns=()):
        super().__init__(message)
        self.columns = tuple(columns)


class NoClosedFormError(NetfxError):
    """A feature has no registered closed-form expectation."""


class ConfigError(NetfxError, ValueError):
    """Invalid experiment configuration or input schema."""
