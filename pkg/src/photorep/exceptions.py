class DomainError(ValueError):
    """An argument lies outside the physical domain of a formula."""


class GridError(ValueError):
    """A time or mode grid is too coarse or too narrow for the requested run."""


class IntegrationError(RuntimeError):
    """The numerical integration produced an inconsistent result."""


class ConvergenceError(RuntimeError):
    """A run did not decay far enough to evaluate long-time quantities."""

    def __init__(self, message, tail_mass=None):
        super().__init__(message)
        self.tail_mass = tail_mass


class ConfigError(ValueError):
    """Invalid experiment configuration."""
