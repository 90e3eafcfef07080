"""Exception types shared across the package."""


class SuperbandError(Exception):
    """Base class for all package errors."""


class GridError(SuperbandError, ValueError):
    """Grid parameters violate a precondition or the bandwidth headroom."""


class ParameterError(SuperbandError, ValueError):
    """Synthesis parameters outside their valid domain."""


class NumericalHealthError(SuperbandError, RuntimeError):
    """Two routes that must agree did not (norm drift, flux mismatch, ...)."""


class NoExtremumError(SuperbandError, LookupError):
    """The field carries no super/sub local-momentum pair."""


class NodeUnderflowError(SuperbandError, ArithmeticError):
    """Velocity requested where the field amplitude underflows."""


class ConfigError(SuperbandError, ValueError):
    """Invalid configuration file or command-line override."""
