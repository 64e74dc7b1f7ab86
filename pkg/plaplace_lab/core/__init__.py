"""
Function-space machinery: rearrangements, Lebesgue and Lorentz norms, best
constants, grids and discrete fields.
"""

from .norms import (
    SampledFunction,
    LorentzIndex,
    unit_ball_volume,
    sphere_area,
    distribution_function,
    decreasing_rearrangement,
    lebesgue_norm,
    lorentz_norm,
    sobolev_constant,
    gamma_constant,
    hardy_multiplier,
    hardy_threshold,
)
from .fields import (
    RadialGrid,
    CartesianGrid,
    RadialField,
    GridField2D,
    VectorField,
    SignInterval,
    make_radial_grid,
    make_cartesian_grid,
    weighted_integral,
    p_energy,
    total_variation,
    truncate,
    sgn_set,
    flux,
)

__all__ = [
    "SampledFunction",
    "LorentzIndex",
    "unit_ball_volume",
    "sphere_area",
    "distribution_function",
    "decreasing_rearrangement",
    "lebesgue_norm",
    "lorentz_norm",
    "sobolev_constant",
    "gamma_constant",
    "hardy_multiplier",
    "hardy_threshold",
    "RadialGrid",
    "CartesianGrid",
    "RadialField",
    "GridField2D",
    "VectorField",
    "SignInterval",
    "make_radial_grid",
    "make_cartesian_grid",
    "weighted_integral",
    "p_energy",
    "total_variation",
    "truncate",
    "sgn_set",
    "flux",
]
