"""
Radial Newton solver, truncated-energy minimizer and p-sweeps.
"""

from .models import (
    MinimizeSettings,
    NewtonSettings,
    SolveResult,
    BoundCheck,
    SweepSchedule,
    SweepRecord,
    SweepSettings,
    ObservedRegime,
    AsymptoticReport,
    LimitConstantReport,
    FluxLimit,
)
from .radial import (
    ClosedForm,
    ClosedFormKind,
    torsion,
    hardy_line,
    singular_family,
    cone_profile,
    strong_residual,
    solve_radial_bvp,
)
from .minimizer import (
    EnergyModel,
    energy_J,
    energy_gradient,
    minimize,
    n_continuation,
    check_admissible,
    verify_apriori_bound,
    result_from_field,
)
from .psweep import (
    run_sweep,
    detect_regime,
    limit_constant,
    bound_trace,
    extract_flux_limit,
    young_split_gap,
)

__all__ = [
    "MinimizeSettings",
    "NewtonSettings",
    "SolveResult",
    "BoundCheck",
    "SweepSchedule",
    "SweepRecord",
    "SweepSettings",
    "ObservedRegime",
    "AsymptoticReport",
    "LimitConstantReport",
    "FluxLimit",
    "ClosedForm",
    "ClosedFormKind",
    "torsion",
    "hardy_line",
    "singular_family",
    "cone_profile",
    "strong_residual",
    "solve_radial_bvp",
    "EnergyModel",
    "energy_J",
    "energy_gradient",
    "minimize",
    "n_continuation",
    "check_admissible",
    "verify_apriori_bound",
    "result_from_field",
    "run_sweep",
    "detect_regime",
    "limit_constant",
    "bound_trace",
    "extract_flux_limit",
    "young_split_gap",
]
