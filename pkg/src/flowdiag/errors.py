"""Exception taxonomy shared by all flowdiag modules.

The CLI maps these onto exit codes: configuration and input problems exit
with 2, analysis degeneracies with 3 (see :mod:`flowdiag.cli`).
"""

from __future__ import annotations

__all__ = [
    "FlowDiagError",
    "ConfigError",
    "SampleFormatError",
    "InvalidModelError",
    "DegenerateFitError",
    "DegenerateDataError",
    "UndefinedCorrelationError",
]


class FlowDiagError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(FlowDiagError, ValueError):
    """A configuration value is missing, malformed, or out of range.

    The message always names the offending field.
    """


class SampleFormatError(FlowDiagError, ValueError):
    """An input file violates its documented format.

    ``line`` carries the 1-based line number of the first offending line
    when the problem is attributable to one; it is never silently dropped.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InvalidModelError(FlowDiagError, ValueError):
    """A serialized region model is missing fields or fails validation."""


class DegenerateFitError(FlowDiagError, RuntimeError):
    """No usable operating region could be fitted from the binned data."""


class DegenerateDataError(FlowDiagError, ValueError):
    """Input data carries no usable signal (e.g. zero variance everywhere)."""


class UndefinedCorrelationError(FlowDiagError, ValueError):
    """A correlation was requested where one variable has zero variance."""
