"""Exception hierarchy shared across the package."""

from __future__ import annotations


class GreysvrError(Exception):
    """Base class for all errors raised by this package."""


class DataError(GreysvrError):
    """Malformed, inconsistent, or numerically unusable input data."""


class ConfigError(GreysvrError):
    """Invalid configuration file, key, or command-line usage."""


class ConvergenceError(GreysvrError):
    """Optimizer stopped before reaching the requested tolerance."""

    def __init__(self, message: str, violation: float | None = None):
        super().__init__(message)
        self.violation = violation
