"""
Continuation p → 1⁺ along a decreasing schedule of exponents.

Each step solves the problem at one p (Newton on radial grids, n-continuation
of the minimizer on Cartesian grids), warm-started from the previous good
solution, and records the observables that the a priori estimates control.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from .minimizer import n_continuation
from .models import (
    AsymptoticReport,
    FluxLimit,
    LimitConstantReport,
    ObservedRegime,
    SweepRecord,
    SweepSchedule,
    SweepSettings,
)
from .radial import solve_radial_bvp
from ..core.fields import (
    RadialField,
    flux,
    lebesgue_norm_of_field,
    p_energy,
    total_variation,
)
from ..core.norms import gamma_constant, hardy_multiplier, hardy_threshold, sobolev_constant
from ..problem.conditions import EXACT_TOL, SAMPLED_TOL, evaluate_conditions, source_lebesgue_norm, source_weak_norm
from ..problem.models import DomainKind, HardyTerm, ProblemSpec, SourceKind
from ..utils.exceptions import CoercivityLostError, ConvergenceError, DomainError, HypothesisError, SpecError

logger = logging.getLogger(__name__)

VANISHING_LEVEL = 1e-2
GROWTH_FACTOR = 2.0
FLATNESS = 0.10
FLUX_SLACK = 0.05
RICHARDSON_STEPS = (3, 4, 5, 6)
# cross-checks compare on r >= CROSS_CHECK_CORE * R
CROSS_CHECK_CORE = 0.1


def observables(u, p: float) -> dict:
    """The per-record quantities of a solution at exponent p."""
    N = u.grid.N
    return {
        "grad_energy_p": p_energy(u, p),
        "tv": total_variation(u),
        "l1star_norm": lebesgue_norm_of_field(u, N / (N - 1.0)),
        "flux_sup": flux(u, p).sup_norm(),
        "u_center": u.center_value,
    }


def hardy_line_ratio(spec: ProblemSpec) -> Optional[float]:
    """a/(N−1) for the frozen-sign hardy-line family f = (a − λ)/|x| on the unit ball."""
    if spec.hardy_term is not HardyTerm.SIGN or spec.f.kind is not SourceKind.POWER or spec.f.b != 1.0:
        return None
    if spec.domain.kind not in (DomainKind.BALL, DomainKind.DISK) or spec.domain.R != 1.0:
        return None
    a = spec.lam + spec.f.c
    if not 0 < a <= spec.N - 1:
        return None
    return a / (spec.N - 1)


def validate_schedule(spec: ProblemSpec, schedule: SweepSchedule):
    """Every exponent must satisfy p < N and, in hardy mode, λ < ((N−p)/p)^p."""
    for p in schedule:
        if p >= spec.N:
            raise SpecError(f"schedule exponent p={p} is not below N={spec.N}")
        if spec.beta and spec.beta >= hardy_threshold(spec.N, p):
            raise SpecError(
                f"lambda={spec.beta} violates the Hardy threshold {hardy_threshold(spec.N, p):.6g} at p={p}"
            )


def _warm_start(previous, spec: ProblemSpec, p_prev: float, p_next: float):
    if previous is None:
        return None
    ratio = hardy_line_ratio(spec)
    if ratio is None or ratio == 1.0:
        return previous
    factor = ratio ** (1.0 / (p_next - 1.0) - 1.0 / (p_prev - 1.0))
    return previous.with_values(previous.flat * factor)


def run_sweep(spec: ProblemSpec, schedule: SweepSchedule, settings: Optional[SweepSettings] = None,
              grid=None) -> List[SweepRecord]:
    """One record per exponent, in schedule order; failed steps are marked and skipped over."""
    settings = settings or SweepSettings()
    if not isinstance(schedule, SweepSchedule):
        schedule = SweepSchedule(list(schedule))
    validate_schedule(spec, schedule)
    grid = grid or spec.make_grid()
    records: List[SweepRecord] = []
    previous = None
    p_previous = None

    logger.info(f"Sweeping {spec.name or 'problem'} over p = {schedule.p_values}")
    steps = tqdm(schedule.p_values, desc="p-sweep", unit="p", disable=not settings.show_progress)
    for p in steps:
        warm = _warm_start(previous, spec, p_previous, p) if previous is not None else None
        try:
            if spec.domain.is_radial:
                u = solve_radial_bvp(spec, p, settings.newton, initial=warm, grid=grid)
            else:
                result = n_continuation(spec, p, settings.minimize, initial=warm, grid=grid)
                if not result.converged:
                    raise ConvergenceError(result.message, result.energy_trace)
                u = result.field
        except (ConvergenceError, CoercivityLostError, DomainError) as e:
            logger.warning(f"sweep step p={p} failed: {e}")
            records.append(SweepRecord(p=p, converged=False, message=str(e)))
            continue

        message = ""
        if settings.cross_check and spec.domain.is_radial and p >= settings.cross_check_p_min:
            message = _cross_check(spec, p, u, settings)
        record = SweepRecord(p=p, message=message, field=u, **observables(u, p))
        records.append(record)
        previous, p_previous = u, p
        logger.info(f"p={p}: u_center={record.u_center:.6g}, grad_energy_p={record.grad_energy_p:.6g}")
    return records


def _cross_check(spec: ProblemSpec, p: float, u: RadialField, settings: SweepSettings) -> str:
    other = n_continuation(spec, p, settings.minimize, grid=u.grid)
    away = u.grid.nodes >= CROSS_CHECK_CORE * u.grid.R
    gap = float(np.max(np.abs(other.field.flat - u.flat)[away]))
    if gap > settings.cross_check_tol:
        logger.warning(f"descent and Newton disagree at p={p}: sup gap {gap:.3e}")
    return f"cross-check sup gap {gap:.3e}"


def _bracket_log(N: int, lam: float, eps: float) -> float:
    """log of [(1 − λ/(N−1))/(1 − λ(p/(N−p))^p)]^{p/(p−1)} at p = 1 + eps."""
    p = 1.0 + eps
    kappa = lam / (N - 1)
    arg = p * math.log1p(eps) - p * math.log1p(-eps / (N - 1)) - eps * math.log(N - 1)
    return -(p / eps) * math.log1p(-kappa * math.expm1(arg) / (1.0 - kappa))


def limit_constant(N: int, lam: float) -> LimitConstantReport:
    """Closed-form limit of the energy bracket as p → 1, with its numerical continuation."""
    if int(N) != N or N < 2:
        raise DomainError(f"dimension N must be an integer >= 2, got {N}")
    if not 0 <= lam < N - 1:
        raise DomainError(f"limit_constant needs 0 <= lambda < N - 1, got lambda={lam}, N={N}")
    N = int(N)
    exponent = lam * (N / (N - 1) - math.log(N - 1)) / (N - 1 - lam)
    closed = math.exp(exponent)
    opposite = math.exp(-exponent)
    if lam == 0:
        numeric = direct = 1.0
    else:
        direct = math.exp(_bracket_log(N, lam, 1e-6))
        # Neville–Richardson on log-values at eps = 10^-k, ratio 10 between steps
        table = [[_bracket_log(N, lam, 10.0 ** -k)] for k in RICHARDSON_STEPS]
        for i in range(1, len(table)):
            for j in range(1, i + 1):
                factor = 10.0 ** j - 1.0
                table[i].append(table[i][j - 1] + (table[i][j - 1] - table[i - 1][j - 1]) / factor)
        numeric = math.exp(table[-1][-1])
    gap = abs(numeric - closed) / closed
    agrees_opposite = abs(numeric - opposite) / opposite <= 1e-6
    return LimitConstantReport(
        N=N, lam=lam, closed_form=closed, numeric=numeric, direct=direct,
        opposite_sign_form=opposite, relative_gap=gap, agrees_with_opposite_sign=agrees_opposite,
    )


def trace_rhs(spec: ProblemSpec, p: float) -> float:
    """Data-dependent bound on ∫|∇u_p|^p used along a sweep."""
    N = spec.N
    exponent = p / (p - 1.0)
    if spec.hardy_term is HardyTerm.SIGN:
        norm, _ = source_weak_norm(spec, include_sign=True)
        return (gamma_constant(N) * norm) ** exponent * spec.measure
    candidates = [gamma_constant(N) * source_weak_norm(spec)[0]]
    ln_norm, _ = source_lebesgue_norm(spec)
    if ln_norm is not None:
        candidates.append(sobolev_constant(N) * ln_norm)
    denominator = 1.0 - spec.lam * hardy_multiplier(N, p)
    if denominator <= 0:
        return math.inf
    return (min(candidates) / denominator) ** exponent * spec.measure


def bound_trace(records: Sequence[SweepRecord], spec: ProblemSpec) -> List[bool]:
    """Each record's ∫|∇u_p|^p against the bound; refuses specs violating the smallness conditions."""
    report = evaluate_conditions(spec)
    tol = EXACT_TOL if report.exact else SAMPLED_TOL
    smallest = report.smallest_lhs
    if smallest is None or smallest > 1 + tol:
        raise HypothesisError(f"hypothesis not satisfied: smallest condition value {smallest}")
    flags = []
    for record in records:
        if not record.converged:
            flags.append(False)
            continue
        rhs = trace_rhs(spec, record.p)
        flags.append(bool(record.grad_energy_p <= rhs * (1.0 + 1e-6)))
    return flags


def _converged(records: Sequence[SweepRecord]) -> List[SweepRecord]:
    return [r for r in records if r.converged and r.field is not None]


def extract_flux_limit(records: Sequence[SweepRecord], spec: ProblemSpec) -> FluxLimit:
    """Flux of the solution at the smallest exponent and the flux_sup trace."""
    good = _converged(records)
    if len(good) < 2:
        raise SpecError("flux extraction needs at least two converged solves")
    last = min(good, key=lambda r: r.p)
    z = flux(last.field, last.p)
    trace = [(r.p, r.flux_sup) for r in good]
    smallest = evaluate_conditions(spec).smallest_lhs
    hypothesis = smallest is not None and smallest <= 1 + SAMPLED_TOL
    within = z.sup_norm() <= 1 + FLUX_SLACK
    if hypothesis and not within:
        logger.warning(f"flux sup {z.sup_norm():.4f} at p={last.p} exceeds 1 + {FLUX_SLACK}")
    return FluxLimit(field=z, p=last.p, sup_trace=trace, within_bound=within or not hypothesis)


def _reference(records: List[SweepRecord]) -> SweepRecord:
    last = records[-1]
    target = 4.0 * (last.p - 1.0)
    earlier = [r for r in records[:-1] if r.p - 1.0 >= target]
    if not earlier:
        return records[0]
    return min(earlier, key=lambda r: r.p)


def _ratio(numerator: float, denominator: float) -> float:
    if denominator == 0:
        return math.inf if numerator > 0 else 1.0
    return numerator / denominator


def _slopes(records: List[SweepRecord]) -> dict:
    details = {}
    log_eps = np.log(np.array([r.p - 1.0 for r in records]))
    for name in ("grad_energy_p", "tv", "l1star_norm", "u_center"):
        values = np.array([abs(getattr(r, name)) for r in records])
        if np.all(values > 0) and np.all(np.isfinite(values)):
            details[f"{name}_slope"] = float(np.polyfit(log_eps, np.log(values), 1)[0])
    return details


def detect_regime(records: Sequence[SweepRecord]) -> AsymptoticReport:
    """Vanishing, BlowingUp, Bounded or Inconclusive from the tail of a sweep."""
    if len(records) < 3:
        raise SpecError(f"regime detection needs at least three records, got {len(records)}")
    good = sorted(_converged(records), key=lambda r: -r.p)
    if len(good) < 3:
        logger.warning("fewer than three converged records; regime left inconclusive")
        return AsymptoticReport(ObservedRegime.INCONCLUSIVE)

    last = good[-1]
    reference = _reference(good)
    details = _slopes(good)
    details.update({"reference_p": reference.p, "last_p": last.p})

    if last.l1star_norm < VANISHING_LEVEL and _ratio(reference.l1star_norm, last.l1star_norm) >= GROWTH_FACTOR:
        regime = ObservedRegime.VANISHING
    elif last.l1star_norm == 0 and reference.l1star_norm == 0:
        regime = ObservedRegime.VANISHING
    elif _ratio(last.grad_energy_p, reference.grad_energy_p) >= GROWTH_FACTOR:
        regime = ObservedRegime.BLOWING_UP
    elif _flat([r.grad_energy_p for r in good[-3:]]) and _flat([r.tv for r in good[-3:]]):
        regime = ObservedRegime.BOUNDED
    else:
        regime = ObservedRegime.INCONCLUSIVE

    previous = good[-2].field
    limit = None
    if previous.grid == last.field.grid:
        limit = last.field.with_values(0.5 * (last.field.flat + previous.flat))
    logger.info(f"observed regime: {regime.value}")
    return AsymptoticReport(regime_observed=regime, fit_details=details, limit_field=limit)


def _flat(values: List[float]) -> bool:
    lo, hi = min(values), max(values)
    if hi == 0:
        return True
    return lo > 0 and (hi - lo) / lo < FLATNESS


def young_split_gap(record: SweepRecord, measure: float) -> float:
    """grad_energy_p/p + (p−1)|Ω|/p − tv; nonnegative by Young's inequality."""
    p = record.p
    return record.grad_energy_p / p + (p - 1.0) * measure / p - record.tv


def sweep_rows(records: Sequence[SweepRecord]) -> List[Tuple[float, ...]]:
    return [tuple(r.row()) for r in records]
