"""
Custom exceptions for the p-Laplacian / Hardy-potential laboratory.
"""

from typing import Any, Dict, List, Optional


class LabError(Exception):
    """Base exception for the laboratory."""
    pass


class SpecError(LabError):
    """Exception raised when a problem, source, certificate or schedule description is invalid."""
    pass


class DomainError(LabError):
    """Exception raised when an argument lies outside an operation's domain."""
    pass


class FieldError(LabError):
    """Exception raised when field data is non-finite or does not match its grid."""
    pass


class ConvergenceError(LabError):
    """Exception raised when an iterative solver does not converge."""

    def __init__(self, message: str, history: Optional[List[float]] = None):
        super().__init__(message)
        self.history = list(history or [])


class CoercivityLostError(LabError):
    """Exception raised when the energy is no longer coercive (λ too large or iterates escaping)."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class HypothesisError(LabError):
    """Exception raised when an operation requires a smallness condition the data violate."""
    pass


class ConfigurationError(LabError):
    """Exception raised when configuration is invalid."""
    pass


class CoercivityWarning(RuntimeWarning):
    """Warning issued when λ reaches the Hardy threshold for the current exponent."""
    pass
