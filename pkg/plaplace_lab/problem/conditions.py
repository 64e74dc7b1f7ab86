"""
Smallness conditions on (λ, f) and the asymptotic regime they predict as p → 1⁺.

Norms of the datum are computed in closed form whenever the source is a
finite union of power-law pieces on a ball; otherwise the datum is sampled
and the report is marked inexact, which widens the classification tolerance.
"""

import logging
import math
from typing import Callable, List, Optional, Tuple

import numpy as np

from .models import ConditionReport, DomainKind, ProblemSpec, Regime, SourceKind
from ..core.fields import make_cartesian_grid
from ..core.norms import (
    LorentzIndex,
    SampledFunction,
    gamma_constant,
    lebesgue_norm,
    lorentz_norm,
    sobolev_constant,
    unit_ball_volume,
)
from ..utils.exceptions import DomainError

logger = logging.getLogger(__name__)

INF = math.inf
EXACT_TOL = 1e-9
SAMPLED_TOL = 1e-4
SAMPLING_CELLS = 4096
SAMPLING_GRID = 512

# (r_lo, r_hi, [(coefficient, exponent), ...])
Piece = Tuple[float, float, List[Tuple[float, float]]]


def _radial_extent(spec: ProblemSpec) -> Optional[Tuple[float, float]]:
    kind = spec.domain.kind
    if kind in (DomainKind.BALL, DomainKind.DISK):
        return 0.0, spec.domain.R
    if kind is DomainKind.ANNULUS:
        return spec.domain.r_inner, spec.domain.R
    return None


def _pieces(spec: ProblemSpec, include_sign: bool) -> Optional[List[Piece]]:
    """Source as power-law pieces clipped to the radial extent."""
    extent = _radial_extent(spec)
    base = spec.f.power_pieces()
    if extent is None or base is None:
        return None
    r_lo, r_hi = extent
    pieces = []
    for lo, hi, coeff, exponent in base:
        lo, hi = max(lo, r_lo), min(hi, r_hi)
        if hi <= lo:
            continue
        terms = [(coeff, exponent)] if coeff else []
        if include_sign and spec.lam:
            terms.append((spec.lam, 1.0))
        pieces.append((lo, hi, terms))
    return pieces


def _evaluate(terms: List[Tuple[float, float]], r: np.ndarray) -> np.ndarray:
    value = np.zeros_like(np.asarray(r, dtype=float))
    for coeff, exponent in terms:
        value = value + coeff * np.asarray(r, dtype=float) ** (-exponent)
    return value


def _power_moment(coeff: float, exponent: float, q: float, N: int, a: float, b: float) -> float:
    """∫_a^b (coeff r^-exponent)^q σ_N r^{N-1} dr."""
    sigma = N * unit_ball_volume(N)
    k = N - exponent * q
    if k == 0:
        if a == 0:
            return INF
        return sigma * coeff ** q * math.log(b / a)
    if k < 0 and a == 0:
        return INF
    return sigma * coeff ** q * (b ** k - a ** k) / k


def _total_source(spec: ProblemSpec, include_sign: bool) -> Callable[[np.ndarray], np.ndarray]:
    if include_sign:
        return lambda r: spec.f(r) + spec.lam / r
    return spec.f


def sample_source(spec: ProblemSpec, include_sign: bool = False, rule: str = "outer",
                  cells: int = SAMPLING_CELLS) -> SampledFunction:
    """Sampled datum: radial sub-grids between breakpoints, or triangle centroids on a box."""
    source = _total_source(spec, include_sign)
    extent = _radial_extent(spec)
    if extent is None:
        grid = make_cartesian_grid("box", half_widths=spec.domain.half_widths, n=SAMPLING_GRID)
        inside = grid.interior_elements
        radii = grid.element_radii[inside]
        return SampledFunction(source(radii), grid.element_measures[inside])
    r_lo, r_hi = extent
    edges = [r_lo] + [b for b in spec.f.breakpoints if r_lo < b < r_hi] + [r_hi]
    values, measures = [], []
    volume = unit_ball_volume(spec.N)
    for lo, hi in zip(edges[:-1], edges[1:]):
        s = (np.arange(cells + 1) / cells) ** 2
        nodes = lo + (hi - lo) * s
        sample_at = nodes[1:] if rule == "outer" else 0.5 * (nodes[:-1] + nodes[1:])
        values.append(source(sample_at))
        measures.append(volume * (nodes[1:] ** spec.N - nodes[:-1] ** spec.N))
    return SampledFunction(np.concatenate(values), np.concatenate(measures))


def source_lebesgue_norm(spec: ProblemSpec, q: Optional[float] = None) -> Tuple[Optional[float], bool]:
    """‖f‖_{L^q(Ω)} (q = N by default) and whether it is exact; None if infinite."""
    q = float(spec.N if q is None else q)
    pieces = _pieces(spec, include_sign=False)
    if pieces is not None:
        total = 0.0
        for lo, hi, terms in pieces:
            for coeff, exponent in terms:
                total += _power_moment(coeff, exponent, q, spec.N, lo, hi)
        if math.isinf(total):
            return None, True
        return total ** (1.0 / q), True
    if spec.f.kind is SourceKind.POWER and spec.f.b * q >= spec.N and spec.domain.contains_origin:
        return None, True
    sampled = sample_source(spec, rule="midpoint")
    return lebesgue_norm(sampled, q), False


def source_weak_norm(spec: ProblemSpec, include_sign: bool = False) -> Tuple[float, bool]:
    """‖f‖_{L^{N,∞}(Ω)} (or of λ/|x| + f) and whether it is exact."""
    pieces = _pieces(spec, include_sign)
    idx = LorentzIndex(spec.N)
    if pieces is not None:
        if all(exponent == 0 for _, _, terms in pieces for _, exponent in terms):
            values = [sum(c for c, _ in terms) for _, _, terms in pieces]
            volume = unit_ball_volume(spec.N)
            measures = [volume * (hi ** spec.N - lo ** spec.N) for lo, hi, _ in pieces]
            return lorentz_norm(SampledFunction(values, measures), idx), True
        right_values = [float(_evaluate(terms, np.array(hi))) for _, hi, terms in pieces]
        left_values = [float(_evaluate(terms, np.array(lo))) if lo > 0 else INF for lo, _, terms in pieces]
        nonincreasing = all(r2 <= r1 for r1, r2 in zip(right_values, left_values[1:]))
        if spec.domain.contains_origin and nonincreasing:
            # for a radially nonincreasing datum f*(|B_r|) = f(r), and r f(r) grows on each piece
            scale = unit_ball_volume(spec.N) ** (1.0 / spec.N)
            return scale * max(hi * v for (_, hi, _), v in zip(pieces, right_values)), True
    sampled = sample_source(spec, include_sign=include_sign, rule="outer")
    return lorentz_norm(sampled, idx), False


def check_LN(spec: ProblemSpec) -> Optional[float]:
    """S_N‖f‖_{L^N} + λ/(N−1), or None when f is not in L^N."""
    norm, _ = source_lebesgue_norm(spec)
    if norm is None:
        logger.warning(f"source {spec.f.to_dict()} is not in L^N; condition (H) not evaluated")
        return None
    return sobolev_constant(spec.N) * norm + spec.lam / (spec.N - 1)


def check_Lorentz(spec: ProblemSpec) -> float:
    """γ‖f‖_{L^{N,∞}} + λ/(N−1)."""
    norm, _ = source_weak_norm(spec)
    return gamma_constant(spec.N) * norm + spec.lam / (spec.N - 1)


def check_dual(spec: ProblemSpec) -> Optional[float]:
    """‖f‖_{W^{-1,∞}} + λ/(N−1) with a user-supplied dual norm."""
    if spec.dual_norm_f is None:
        return None
    return spec.dual_norm_f + spec.lam / (spec.N - 1)


def classify(spec: ProblemSpec, report: ConditionReport, tol: Optional[float] = None) -> Regime:
    """Predicted regime from the smallest available left-hand side."""
    if tol is None:
        tol = EXACT_TOL if report.exact else SAMPLED_TOL
    lhs = report.smallest_lhs
    if lhs is not None:
        if lhs < 1 - tol:
            return Regime.VANISH_PREDICTED
        if abs(lhs - 1) <= tol:
            return Regime.EXTREME_BOUNDED
    if report.lhs_LN is not None and not spec.f.is_zero:
        data_part = report.lhs_LN - spec.lam / (spec.N - 1)
        if data_part > 1 + tol:
            return Regime.BLOWUP_EXPECTED
    return Regime.UNKNOWN


def evaluate_conditions(spec: ProblemSpec) -> ConditionReport:
    """Evaluate (H), (H1) and, when a dual norm is supplied, (H2); then classify."""
    ln_norm, ln_exact = source_lebesgue_norm(spec)
    _, weak_exact = source_weak_norm(spec)
    report = ConditionReport(
        lhs_LN=check_LN(spec) if ln_norm is not None else None,
        lhs_Lorentz=check_Lorentz(spec),
        lhs_dual=check_dual(spec),
        exact=ln_exact and weak_exact,
        notes=spec.validity_notes(),
    )
    report.regime = classify(spec, report)
    for note in report.notes:
        logger.info(f"{spec.name or 'spec'}: {note}")
    return report


def step_datum_delta_bound(N: int, lam: float, a: float) -> float:
    """Largest δ for which f = δ·1_{a<|x|<1} keeps S_N‖f‖_{L^N} + λ/(N−1) below 1."""
    if not 0 < a < 1:
        raise DomainError(f"step radius must lie in (0, 1), got {a}")
    if not 0 <= lam < N - 1:
        raise DomainError(f"need 0 <= lambda < N - 1, got {lam}")
    ring = unit_ball_volume(N) * (1 - a ** N)
    return (1 - lam / (N - 1)) / (ring ** (1.0 / N) * sobolev_constant(N))
