"""
Truncated-energy minimization

    J_n(u) = (1/p)∫|∇u|^p − (β/p)∫W_n|u|^p − ∫F_n u,   W_n = min(1/|x|^p, n),

over nodal fields on radial or Cartesian grids, with continuation in n and
the a priori energy bounds.

The descent direction is the Kačanov step: the gradient preconditioned by the
weighted Laplacian with weights (|∇u|² + ε²)^{(p−2)/2}. Steps are accepted by
an Armijo test, so the energy trace never increases.
"""

import logging
import math
from typing import List, Optional, Union

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve

from .assembly import HardyQuadrature, assemble_load, truncated_weight
from .models import BoundCheck, MinimizeSettings, SolveResult
from ..core.fields import (
    Grid,
    GridField2D,
    RadialField,
    RadialGrid,
    p_energy,
)
from ..core.norms import gamma_constant, hardy_multiplier, hardy_threshold, sobolev_constant
from ..problem.conditions import source_lebesgue_norm, source_weak_norm
from ..problem.models import DomainSpec, HardyTerm, ProblemSpec
from ..utils.exceptions import CoercivityLostError, DomainError

logger = logging.getLogger(__name__)

INF = math.inf
MAX_HALVINGS = 40
NEGATIVE_TOL = 1e-8
BLOWUP_FACTOR = 10.0

__all__ = [
    "EnergyModel",
    "truncated_weight",
    "energy_J",
    "energy_gradient",
    "minimize",
    "n_continuation",
    "check_admissible",
    "verify_apriori_bound",
    "result_from_field",
]

Field = Union[RadialField, GridField2D]


def make_field(grid: Grid, values: np.ndarray) -> Field:
    if isinstance(grid, RadialGrid):
        return RadialField(grid, values)
    return GridField2D.zeros(grid).with_values(values)


class EnergyModel:
    """Discrete J_n together with its gradient and Kačanov preconditioner."""

    def __init__(self, spec: ProblemSpec, grid: Grid, p: float, n: float = INF,
                 smoothing: float = 1e-10, beta: Optional[float] = None, load: Optional[np.ndarray] = None):
        self.spec = spec
        self.grid = grid
        self.p = p
        self.n = n
        self.smoothing = smoothing
        self.beta = spec.beta if beta is None else beta
        self.operators = grid.gradient_operators
        self.measures = grid.element_measures
        self.load = assemble_load(spec, grid, n) if load is None else np.asarray(load, dtype=float)
        self.hardy = HardyQuadrature(grid, p, n) if self.beta else None
        self.free = grid.free_nodes
        self.total_measure = grid.total_measure

    def gradients(self, values: np.ndarray) -> np.ndarray:
        return np.stack([op @ values for op in self.operators], axis=1)

    def gradient_energy(self, values: np.ndarray) -> float:
        g = self.gradients(values)
        return float(np.dot(self.measures, np.sum(g * g, axis=1) ** (0.5 * self.p)))

    def energy(self, values: np.ndarray) -> float:
        value = self.gradient_energy(values) / self.p - float(np.dot(self.load, values))
        if self.hardy is not None:
            value -= self.beta * self.hardy.energy(values) / self.p
        return value

    def gradient(self, values: np.ndarray) -> np.ndarray:
        g = self.gradients(values)
        magnitude = np.sqrt(np.sum(g * g, axis=1))
        scale = np.zeros_like(magnitude)
        positive = magnitude > 0
        scale[positive] = magnitude[positive] ** (self.p - 2.0)
        weighted = self.measures * scale
        result = -self.load.copy()
        for k, op in enumerate(self.operators):
            result += op.T @ (weighted * g[:, k])
        if self.hardy is not None:
            result -= self.beta * self.hardy.vector(values)
        return result

    def grad_norm(self, gradient: np.ndarray) -> float:
        return float(np.linalg.norm(gradient[self.free])) / self.total_measure

    def weighted_laplacian(self, weights: np.ndarray) -> sparse.csc_matrix:
        matrix = None
        for op in self.operators:
            term = op.T @ sparse.diags(weights) @ op
            matrix = term if matrix is None else matrix + term
        return matrix.tocsr()[self.free][:, self.free].tocsc()

    def preconditioner(self, values: np.ndarray) -> sparse.csc_matrix:
        g = self.gradients(values)
        weights = self.measures * (np.sum(g * g, axis=1) + self.smoothing ** 2) ** (0.5 * (self.p - 2.0))
        return self.weighted_laplacian(weights)

    def stiffness(self) -> sparse.csc_matrix:
        return self.weighted_laplacian(self.measures)

    def nontrivial_start(self) -> np.ndarray:
        """t·d with d the Laplacian solve of the load and t minimizing J along the ray."""
        direction = np.zeros(self.grid.n_nodes)
        direction[self.free] = spsolve(self.stiffness(), self.load[self.free])
        coercive = self.gradient_energy(direction)
        if self.hardy is not None:
            coercive -= self.beta * self.hardy.energy(direction)
        pull = float(np.dot(self.load, direction))
        if coercive <= 0:
            raise CoercivityLostError(
                "the truncated energy is unbounded below along the load direction",
                {"p": self.p, "n": self.n, "beta": self.beta, "coercive_part": coercive},
            )
        # J(t d) = t^p coercive/p − t pull is p-homogeneous in t
        log_t = math.log(pull / coercive) / (self.p - 1.0)
        return math.exp(min(log_t, 700.0)) * direction


def energy_J(u: Field, p: float, beta: float, n: float, f: Union[ProblemSpec, np.ndarray]) -> float:
    """J_n(u); f is a problem spec (its source is assembled) or a nodal load vector."""
    return _model(u.grid, p, beta, n, f).energy(u.flat)


def energy_gradient(u: Field, p: float, beta: float, n: float, f: Union[ProblemSpec, np.ndarray]) -> np.ndarray:
    """Nodal first variation ⟨J_n′(u), φ_i⟩ (boundary rows included)."""
    return _model(u.grid, p, beta, n, f).gradient(u.flat)


def _model(grid: Grid, p: float, beta: float, n: float, f) -> EnergyModel:
    if beta < 0:
        raise DomainError(f"beta must be >= 0, got {beta}")
    if isinstance(f, ProblemSpec):
        return EnergyModel(f, grid, p, n, beta=beta)
    spec = ProblemSpec(N=grid.N, domain=_placeholder_domain(grid))
    return EnergyModel(spec, grid, p, n, beta=beta, load=f)


def _placeholder_domain(grid: Grid) -> DomainSpec:
    if isinstance(grid, RadialGrid):
        if grid.is_ball:
            return DomainSpec(kind="ball", R=grid.R)
        return DomainSpec(kind="annulus", R=grid.R, r_inner=grid.r_inner)
    if grid.shape == "disk":
        return DomainSpec(kind="disk", R=grid.radius)
    return DomainSpec(kind="box", half_widths=grid.half_widths)


def check_admissible(spec: ProblemSpec, p: float):
    N = spec.N
    if not 1 < p < N:
        raise DomainError(f"minimization needs 1 < p < N, got p={p}, N={N}")
    if spec.beta and spec.beta >= hardy_threshold(N, p):
        raise CoercivityLostError(
            f"lambda={spec.beta} >= ((N-p)/p)^p={hardy_threshold(N, p):.6g}",
            {"p": p, "N": N, "lambda": spec.beta, "threshold": hardy_threshold(N, p)},
        )


def apriori_rhs(spec: ProblemSpec, p: float):
    """Right-hand side of the applicable a priori bound on ∫|∇u_p|^p, its variant, and a reason if it is void."""
    N = spec.N
    exponent = p / (p - 1.0)
    measure = spec.measure
    if spec.hardy_term is HardyTerm.SIGN:
        norm, _ = source_weak_norm(spec, include_sign=True)
        return (gamma_constant(N) * norm) ** exponent * measure, "sign", ""
    denominator = 1.0 - spec.lam * hardy_multiplier(N, p)
    if denominator <= 0:
        return INF, "B", "coercivity lost"
    ln_norm, _ = source_lebesgue_norm(spec)
    if ln_norm is None:
        weak, _ = source_weak_norm(spec)
        return (gamma_constant(N) * weak / denominator) ** exponent * measure, "H1", "f is not in L^N"
    return (sobolev_constant(N) * ln_norm / denominator) ** exponent * measure, "B", ""


def verify_apriori_bound(result: Union[SolveResult, Field], spec: ProblemSpec, p: float) -> BoundCheck:
    """∫|∇u_p|^p against the applicable bound; ok when lhs <= rhs (1 + 1e-6)."""
    u = result.field if isinstance(result, SolveResult) else result
    lhs = p_energy(u, p)
    rhs, variant, reason = apriori_rhs(spec, p)
    ok = bool(lhs <= rhs * (1.0 + 1e-6))
    if not ok:
        logger.warning(f"a priori bound ({variant}) violated at p={p}: {lhs:.6g} > {rhs:.6g}")
    return BoundCheck(ok=ok, lhs=lhs, rhs=rhs, variant=variant, reason=reason)


def _finish(model: EnergyModel, spec: ProblemSpec, values: np.ndarray, energy: float,
            iterations: int, converged: bool, trace: List[float], message: str) -> SolveResult:
    field = make_field(model.grid, values)
    grad_norm = model.grad_norm(model.gradient(field.flat))
    bound = verify_apriori_bound(field, spec, model.p)
    negative = bool(np.min(field.flat) < -NEGATIVE_TOL)
    if negative:
        logger.warning(f"solution at p={model.p} takes negative values (min {np.min(field.flat):.3e})")
    return SolveResult(
        field=field,
        energy=energy,
        grad_norm=grad_norm,
        iterations=iterations,
        n_used=model.n,
        bound_B_ok=bound.ok,
        bound_B_lhs=bound.lhs,
        bound_B_rhs=bound.rhs,
        converged=converged,
        p=model.p,
        bound_variant=bound.variant,
        energy_trace=trace,
        negative_flag=negative,
        message=message,
    )


def minimize(spec: ProblemSpec, p: float, n: float = INF, settings: Optional[MinimizeSettings] = None,
             initial: Optional[Field] = None, grid: Optional[Grid] = None) -> SolveResult:
    """Preconditioned Armijo descent on J_n from a nontrivial start (or a warm start)."""
    settings = settings or MinimizeSettings()
    check_admissible(spec, p)
    grid = grid or (initial.grid if initial is not None else spec.make_grid())
    model = EnergyModel(spec, grid, p, n, settings.smoothing)
    bound_rhs, variant, _ = apriori_rhs(spec, p)

    if initial is not None:
        values = np.array(initial.flat, dtype=float)
    else:
        values = np.zeros(grid.n_nodes)
        if model.grad_norm(model.gradient(values)) > 0:
            values = model.nontrivial_start()
    energy = model.energy(values)
    trace = [energy]
    free = model.free

    logger.debug(f"descent at p={p}, n={n}: {free.size} free nodes, start energy {energy:.6e}")
    for iteration in range(settings.max_iters):
        gradient = model.gradient(values)
        grad_norm = model.grad_norm(gradient)
        if grad_norm <= settings.grad_tol:
            return _finish(model, spec, values, energy, iteration, True, trace, "converged")
        direction = -spsolve(model.preconditioner(values), gradient[free])
        slope = float(np.dot(gradient[free], direction))
        if slope >= 0:
            direction = -gradient[free]
            slope = -float(np.dot(direction, direction))
        t = 1.0
        for _ in range(MAX_HALVINGS):
            trial = values.copy()
            trial[free] += t * direction
            trial_energy = model.energy(trial)
            if trial_energy <= energy + settings.armijo_c * t * slope:
                break
            t *= settings.backtrack
        else:
            message = f"line search stalled with grad_norm {grad_norm:.3e}"
            logger.warning(f"descent at p={p}, n={n}: {message}")
            return _finish(model, spec, values, energy, iteration, False, trace, message)
        values, energy = trial, trial_energy
        trace.append(energy)
        if bound_rhs > 0 and model.gradient_energy(values) > BLOWUP_FACTOR * bound_rhs:
            raise CoercivityLostError(
                f"iterate energy exceeds {BLOWUP_FACTOR:g} times the ({variant}) bound",
                {"p": p, "n": n, "iteration": iteration, "bound": bound_rhs,
                 "grad_energy": model.gradient_energy(values)},
            )
        if iteration % 100 == 0:
            logger.debug(f"iteration {iteration}: J={energy:.10e}, grad_norm={grad_norm:.3e}, t={t:g}")

    gradient = model.gradient(values)
    converged = model.grad_norm(gradient) <= settings.grad_tol
    message = "converged" if converged else f"max_iters={settings.max_iters} exhausted"
    if not converged:
        logger.warning(f"descent at p={p}, n={n}: {message}")
    return _finish(model, spec, values, energy, settings.max_iters, converged, trace, message)


def n_continuation(spec: ProblemSpec, p: float, settings: Optional[MinimizeSettings] = None,
                   initial: Optional[Field] = None, grid: Optional[Grid] = None) -> SolveResult:
    """minimize along the n-schedule, warm-starting each level, until successive fields agree."""
    settings = settings or MinimizeSettings()
    schedule = settings.n_schedule
    if spec.lam == 0:
        return minimize(spec, p, schedule[0], settings, initial=initial, grid=grid)

    total_iterations = 0
    previous: Optional[Field] = initial
    result = None
    for level in schedule:
        result = minimize(spec, p, level, settings, initial=previous, grid=grid)
        total_iterations += result.iterations
        if previous is not None and previous.grid == result.field.grid:
            change = float(np.max(np.abs(result.field.flat - previous.flat)))
            logger.debug(f"n={level:g}: sup change {change:.3e}")
            if change < settings.continuation_tol:
                break
        previous = result.field
    result.iterations = total_iterations
    logger.info(f"n-continuation at p={p} stopped at n={result.n_used:g}")
    return result


def result_from_field(field: RadialField, spec: ProblemSpec, p: float,
                      settings: Optional[MinimizeSettings] = None) -> SolveResult:
    """Wrap a Newton solution as a SolveResult with its untruncated energy and stationarity."""
    settings = settings or MinimizeSettings()
    model = EnergyModel(spec, field.grid, p, INF, settings.smoothing)
    energy = model.energy(field.flat)
    return _finish(model, spec, field.flat, energy, 0, True, [energy], "newton")
