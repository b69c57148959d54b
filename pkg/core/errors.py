"""
Errors - Exception Hierarchy

Every failure raised by the sampler library derives from SamplerError so the
command-line front end can map it to an exit status.
"""

from typing import Optional


class SamplerError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(SamplerError, ValueError):
    """A numeric parameter lies outside its valid range."""


class InvalidSpecError(InvalidParameterError):
    """A proposal is inconsistent with the requested kernel."""


class DimensionMismatchError(InvalidParameterError):
    """A state vector does not match the target dimension."""


class NonFiniteError(SamplerError, ValueError):
    """A state or log-density evaluated to NaN or infinity."""


class UnsupportedError(SamplerError):
    """The requested quantity is not available for this component."""


class QuadratureError(SamplerError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message: str, achieved_error: float):
        super().__init__(f"{message} (achieved error estimate {achieved_error:.3e})")
        self.achieved_error = achieved_error


class ConfigError(SamplerError):
    """An experiment configuration failed to parse or validate."""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        location = ""
        if field is not None:
            location += f"field '{field}'"
        if line is not None:
            location += f"{' ' if location else ''}(line {line})"
        super().__init__(f"{location}: {message}" if location else message)
        self.message = message
        self.field = field
        self.line = line
