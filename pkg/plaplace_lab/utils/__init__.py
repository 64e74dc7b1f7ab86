"""
Utility modules for the laboratory.
"""

from .exceptions import (
    LabError,
    SpecError,
    DomainError,
    FieldError,
    ConvergenceError,
    CoercivityLostError,
    HypothesisError,
    ConfigurationError,
    CoercivityWarning,
)
from .formats import OutputFormats, write_csv, read_csv, write_json, read_json

__all__ = [
    "LabError",
    "SpecError",
    "DomainError",
    "FieldError",
    "ConvergenceError",
    "CoercivityLostError",
    "HypothesisError",
    "ConfigurationError",
    "CoercivityWarning",
    "OutputFormats",
    "write_csv",
    "read_csv",
    "write_json",
    "read_json",
]
