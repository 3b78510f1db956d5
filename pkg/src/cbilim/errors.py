"""Exception types shared across the package."""

from __future__ import annotations


class ConfigError(ValueError):
    """Invalid configuration file or inconsistent model parameters."""


class NumericError(RuntimeError):
    """A numerical routine failed to reach its accuracy or termination goal."""


class BracketError(NumericError):
    """Root finding could not bracket a sign change."""


class InversionError(NumericError):
    """Numerical Laplace inversion did not converge."""
