"""
Data models for solver settings, solve results and p-sweeps.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Union

from ..core.fields import GridField2D, RadialField, VectorField
from ..utils.exceptions import SpecError

DEFAULT_SCHEDULE = (1.5, 1.3, 1.2, 1.1, 1.05, 1.02, 1.01)


@dataclass
class MinimizeSettings:
    """Settings of the truncated-energy descent."""

    grad_tol: float = 1e-8
    max_iters: int = 20000
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    n_schedule: List[float] = field(default_factory=lambda: [4.0 ** k for k in range(1, 11)])
    continuation_tol: float = 1e-6
    smoothing: float = 1e-10

    def __post_init__(self):
        if not self.grad_tol > 0:
            raise SpecError("grad_tol must be positive")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise SpecError("max_iters must be a positive integer")
        if not 0 < self.armijo_c < 1:
            raise SpecError("armijo_c must lie in (0, 1)")
        if not 0 < self.backtrack < 1:
            raise SpecError("backtrack must lie in (0, 1)")
        self.n_schedule = [float(n) for n in self.n_schedule]
        if not self.n_schedule or any(n <= 0 for n in self.n_schedule):
            raise SpecError("n_schedule must be a nonempty list of positive levels")
        if any(b <= a for a, b in zip(self.n_schedule, self.n_schedule[1:])):
            raise SpecError("n_schedule must be increasing")
        if not self.continuation_tol > 0 or not self.smoothing > 0:
            raise SpecError("continuation_tol and smoothing must be positive")

    @classmethod
    def from_config(cls, solver_config) -> "MinimizeSettings":
        return cls(
            grad_tol=solver_config.grad_tol,
            max_iters=solver_config.max_iters,
            armijo_c=solver_config.armijo_c,
            backtrack=solver_config.backtrack,
            n_schedule=[4.0 ** k for k in range(1, solver_config.n_levels + 1)],
            continuation_tol=solver_config.continuation_tol,
            smoothing=solver_config.smoothing,
        )


@dataclass
class NewtonSettings:
    """Settings of the damped Newton solver for the radial Euler–Lagrange equations."""

    tol: float = 1e-6
    max_iters: int = 100
    smoothing: float = 1e-10
    min_step: float = 2.0 ** -20

    def __post_init__(self):
        if not self.tol > 0 or not self.smoothing > 0 or not 0 < self.min_step < 1:
            raise SpecError("Newton tolerances must be positive (min_step in (0, 1))")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise SpecError("Newton max_iters must be a positive integer")

    @classmethod
    def from_config(cls, solver_config) -> "NewtonSettings":
        return cls(
            tol=solver_config.newton_tol,
            max_iters=solver_config.newton_max_iters,
            smoothing=solver_config.smoothing,
        )


@dataclass
class BoundCheck:
    """Outcome of an a priori energy bound."""

    ok: bool
    lhs: float
    rhs: float
    variant: str = "B"
    reason: str = ""

    def __iter__(self):
        return iter((self.ok, self.lhs, self.rhs))

    def to_dict(self) -> Dict[str, Any]:
        return {"ok": self.ok, "lhs": self.lhs, "rhs": self.rhs, "variant": self.variant, "reason": self.reason}


@dataclass
class SolveResult:
    """Minimizer output."""

    field: Union[RadialField, GridField2D]
    energy: float
    grad_norm: float
    iterations: int
    n_used: float
    bound_B_ok: bool
    bound_B_lhs: float
    bound_B_rhs: float
    converged: bool = True
    p: float = math.nan
    bound_variant: str = "B"
    energy_trace: List[float] = field(default_factory=list)
    negative_flag: bool = False
    message: str = ""

    @property
    def u_center(self) -> float:
        return self.field.center_value

    def to_dict(self) -> Dict[str, Any]:
        return {
            "p": self.p,
            "energy": self.energy,
            "grad_norm": self.grad_norm,
            "iterations": self.iterations,
            "n_used": self.n_used,
            "converged": self.converged,
            "bound_B_ok": self.bound_B_ok,
            "bound_B_lhs": self.bound_B_lhs,
            "bound_B_rhs": self.bound_B_rhs,
            "bound_variant": self.bound_variant,
            "negative_flag": self.negative_flag,
            "u_center": self.u_center,
            "message": self.message,
        }


@dataclass
class SweepSchedule:
    """Strictly decreasing exponents p > 1."""

    p_values: List[float] = field(default_factory=lambda: list(DEFAULT_SCHEDULE))

    def __post_init__(self):
        self.p_values = [float(p) for p in self.p_values]
        if not self.p_values:
            raise SpecError("schedule must not be empty")
        if any(p <= 1 for p in self.p_values):
            raise SpecError("schedule exponents must exceed 1")
        if any(b >= a for a, b in zip(self.p_values, self.p_values[1:])):
            raise SpecError("schedule must be strictly decreasing")

    @classmethod
    def parse(cls, text: str) -> "SweepSchedule":
        try:
            return cls([float(item) for item in text.split(",") if item.strip()])
        except ValueError as e:
            raise SpecError(f"Invalid schedule {text!r}: {e}") from e

    def __iter__(self):
        return iter(self.p_values)

    def __len__(self):
        return len(self.p_values)


SWEEP_COLUMNS = ("p", "grad_energy_p", "tv", "l1star_norm", "flux_sup", "u_center")


@dataclass
class SweepRecord:
    """Observables of u_p at one exponent."""

    p: float
    grad_energy_p: float = math.nan
    tv: float = math.nan
    l1star_norm: float = math.nan
    flux_sup: float = math.nan
    u_center: float = math.nan
    converged: bool = True
    message: str = ""
    field: Optional[Union[RadialField, GridField2D]] = field(default=None, repr=False, compare=False)

    def row(self) -> List[float]:
        return [getattr(self, name) for name in SWEEP_COLUMNS]

    def to_dict(self) -> Dict[str, Any]:
        data = {name: getattr(self, name) for name in SWEEP_COLUMNS}
        data.update({"converged": self.converged, "message": self.message})
        return data


class ObservedRegime(Enum):
    """Regime read off a sweep."""
    VANISHING = "Vanishing"
    BOUNDED = "Bounded"
    BLOWING_UP = "BlowingUp"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class AsymptoticReport:
    """Observed regime with fitted log-log slopes and a limit candidate."""

    regime_observed: ObservedRegime
    fit_details: Dict[str, float] = field(default_factory=dict)
    limit_field: Optional[Union[RadialField, GridField2D]] = field(default=None, repr=False)

    def __post_init__(self):
        if isinstance(self.regime_observed, str):
            self.regime_observed = ObservedRegime(self.regime_observed)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "regime_observed": self.regime_observed.value,
            "fit_details": dict(self.fit_details),
            "limit_u_center": None if self.limit_field is None else self.limit_field.center_value,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AsymptoticReport":
        return cls(regime_observed=data["regime_observed"], fit_details=dict(data.get("fit_details", {})))


@dataclass
class LimitConstantReport:
    """lim_{p→1} [(1 − λ/(N−1))/(1 − λ(p/(N−p))^p)]^{p/(p−1)}."""

    N: int
    lam: float
    closed_form: float
    numeric: float
    direct: float
    opposite_sign_form: float
    relative_gap: float
    agrees_with_opposite_sign: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "N": self.N,
            "lambda": self.lam,
            "closed_form": self.closed_form,
            "numeric": self.numeric,
            "direct": self.direct,
            "opposite_sign_form": self.opposite_sign_form,
            "relative_gap": self.relative_gap,
            "agrees_with_opposite_sign": self.agrees_with_opposite_sign,
        }


@dataclass
class FluxLimit:
    """Flux at the smallest exponent of a sweep with the sup-norm trace."""

    field: VectorField
    p: float
    sup_trace: List[Sequence[float]]
    within_bound: bool


@dataclass
class SweepSettings:
    """Solver settings and switches for a p-sweep."""

    newton: NewtonSettings = field(default_factory=NewtonSettings)
    minimize: MinimizeSettings = field(default_factory=MinimizeSettings)
    cross_check: bool = False
    cross_check_p_min: float = 1.3
    cross_check_tol: float = 1e-3
    show_progress: bool = False

    @classmethod
    def from_config(cls, config) -> "SweepSettings":
        return cls(
            newton=NewtonSettings.from_config(config.solver),
            minimize=MinimizeSettings.from_config(config.solver),
            cross_check=config.sweep.cross_check,
            cross_check_p_min=config.sweep.cross_check_p_min,
            show_progress=config.show_progress,
        )
