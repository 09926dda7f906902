"""Shared exception types."""


class ConfigError(ValueError):
    """Invalid configuration value or inconsistent config fields."""


class DomainError(ValueError):
    """An operation was queried outside its valid input domain."""


class SingularBeamError(ValueError):
    """The effective pilot coefficient is too close to zero to invert."""


class RegimeError(ValueError):
    """Convergence-formula parameters outside the valid probability regime."""


class ProtocolError(RuntimeError):
    """Sample-exchange bookkeeping disagrees with the network graph."""
