"""Exception types shared across the package."""


class EquifdpError(Exception):
    """Base class for all package-specific errors."""


class DomainError(EquifdpError, ValueError):
    """Numeric input outside the mathematical domain of a function."""


class ParameterError(EquifdpError, ValueError):
    """Invalid model, procedure, or experiment parameters."""


class BracketingError(EquifdpError, RuntimeError):
    """Root search failed to bracket or verify a unique crossing."""


class DegenerateCrossingError(EquifdpError, RuntimeError):
    """Threshold functional crosses tangentially; its derivative does not exist."""


class RegimeError(EquifdpError, ValueError):
    """No normal limit exists for the requested correlation regime."""
