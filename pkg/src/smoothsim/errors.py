"""Exception types shared across modules."""

from .model import DimensionError, InfeasibleError


class ConfigurationError(ValueError):
    """Invalid parameters or configuration."""


class ProtocolError(RuntimeError):
    """The online protocol was used out of order or fed invalid losses."""


class EnumerationError(ValueError):
    """A projected class has more behaviors than the enumeration limit."""


class SmoothnessViolation(RuntimeError):
    """An adversary produced a distribution that is not sigma-smooth."""


__all__ = ["ConfigurationError", "ProtocolError", "SmoothnessViolation", "EnumerationError",
           "DimensionError", "InfeasibleError"]


class InvariantError(RuntimeError):
    """A bookkeeping invariant of the harness failed."""


__all__ += ["InvariantError"]
