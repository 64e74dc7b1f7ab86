"""
Problem descriptions and the smallness conditions on (λ, f).
"""

from .models import (
    SourceKind,
    DomainKind,
    HardyTerm,
    Regime,
    SourceSpec,
    DomainSpec,
    ProblemSpec,
    ConditionReport,
)
from .conditions import (
    check_LN,
    check_Lorentz,
    check_dual,
    classify,
    evaluate_conditions,
    step_datum_delta_bound,
)

__all__ = [
    "SourceKind",
    "DomainKind",
    "HardyTerm",
    "Regime",
    "SourceSpec",
    "DomainSpec",
    "ProblemSpec",
    "ConditionReport",
    "check_LN",
    "check_Lorentz",
    "check_dual",
    "classify",
    "evaluate_conditions",
    "step_datum_delta_bound",
]
