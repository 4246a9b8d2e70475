"""Shared exception types."""


class DivergentTail(ArithmeticError):
    """The integrand grows at least as fast as the Gaussian decays.

    Raised before any nodes are evaluated; the truncation radius required by
    the tail bound does not exist.  Callers that treat divergence as data
    catch this and record an infinite value instead.
    """


class NonConvergence(RuntimeError):
    """Refinement hit its cap before successive values agreed."""

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class InvalidIntegrand(ValueError):
    """A sampled integrand value was NaN or infinite."""


class DegreeCap(ValueError):
    """A polynomial operation exceeded the supported degree."""


class ConfigError(ValueError):
    """A run configuration failed validation."""
