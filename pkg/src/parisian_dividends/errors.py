"""Exception hierarchy shared across the package."""
from __future__ import annotations


class ParisianDividendsError(Exception):
    """Base class for all package errors."""


class ModelError(ParisianDividendsError, ValueError):
    """A model or control-parameter set violates its invariants."""


class DomainError(ParisianDividendsError, ValueError):
    """An argument is outside the domain of the operation."""


class ConfigError(ParisianDividendsError, ValueError):
    """A run configuration is malformed or inconsistent."""


class DegenerateRootsError(ParisianDividendsError):
    """Two Laplace-exponent roots are closer than the supported separation.

    The exponential-sum representation assumes simple roots; perturb a model
    parameter slightly to break the degeneracy.
    """


class SolverError(ParisianDividendsError):
    """An iterative solve failed to bracket or converge.

    Carries optional diagnostics (e.g. an objective profile) so callers can
    report the failure instead of guessing.
    """

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class QuadratureError(ParisianDividendsError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, achieved_tol: float | None = None):
        super().__init__(message)
        self.achieved_tol = achieved_tol
