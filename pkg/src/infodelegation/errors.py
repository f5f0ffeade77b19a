"""Semantic exception hierarchy shared across the package."""

from __future__ import annotations


class InfoDelegationError(Exception):
    """Base class for all package errors."""


class ConfigError(InfoDelegationError, ValueError):
    """Malformed or inconsistent configuration input."""


class DomainError(InfoDelegationError, ValueError):
    """Arguments outside an operation's mathematical domain."""


class NumericsError(InfoDelegationError, ArithmeticError):
    """A numerical routine failed to reach its target accuracy."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class InfeasibleError(InfoDelegationError):
    """A construction has no solution under the given constraints.

    ``constraint`` names the violated condition; ``boundary_value`` carries
    the diagnostic value at the closest boundary, when meaningful.
    """

    def __init__(self, message: str, *, constraint: str | None = None,
                 boundary_value: float | None = None):
        super().__init__(message)
        self.constraint = constraint
        self.boundary_value = boundary_value


class AssumptionError(InfoDelegationError):
    """The model's shape or informativeness assumptions fail."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class CertificateError(InfoDelegationError):
    """A price-function certificate could not be built or validated."""


class InvalidExperimentError(InfoDelegationError, ValueError):
    """Segments do not form a valid distribution of posterior means."""
