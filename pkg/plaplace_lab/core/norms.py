"""
Sharp constants, distribution functions, rearrangements and Lorentz norms.

Sampled data are piecewise constant: a value per cell together with the
cell's Lebesgue measure. Rearrangements of such data are step functions, so
everything here is computed exactly from a descending sort with cumulative
measures.
"""

import logging
import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from scipy.special import gammaln

from ..utils.exceptions import DomainError, FieldError

logger = logging.getLogger(__name__)

INF = math.inf

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class SampledFunction:
    """A piecewise-constant function given by cell values and cell measures."""

    values: np.ndarray
    measures: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        measures = np.asarray(self.measures, dtype=float).ravel()
        if values.shape != measures.shape:
            raise FieldError(
                f"values and measures differ in length ({values.size} vs {measures.size})"
            )
        if values.size == 0:
            raise FieldError("SampledFunction needs at least one cell")
        if not np.all(np.isfinite(values)):
            raise FieldError("SampledFunction values must be finite")
        if not np.all(np.isfinite(measures)) or np.any(measures < 0):
            raise FieldError("SampledFunction measures must be finite and nonnegative")
        if measures.sum() <= 0:
            raise FieldError("SampledFunction total measure must be positive")
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'measures', measures)

    @property
    def total_measure(self) -> float:
        return float(self.measures.sum())

    @classmethod
    def constant(cls, value: float, measure: float) -> "SampledFunction":
        return cls(np.array([value]), np.array([measure]))

    def steps(self) -> Tuple[np.ndarray, np.ndarray]:
        """Levels of |f| in descending order and the cumulative measures at the end of each step."""
        keep = self.measures > 0
        levels = np.abs(self.values[keep])
        measures = self.measures[keep]
        order = np.argsort(-levels, kind="stable")
        return levels[order], np.cumsum(measures[order])


@dataclass(frozen=True)
class LorentzIndex:
    """Exponents (p, q) of the Lorentz space L^{p,q}; q may be infinite."""

    p: float
    q: float = INF

    def __post_init__(self):
        if not self.p >= 1 or math.isinf(self.p):
            raise DomainError(f"Lorentz exponent p must lie in [1, inf), got {self.p}")
        if not self.q >= 1:
            raise DomainError(f"Lorentz exponent q must be >= 1 or inf, got {self.q}")

    @property
    def is_weak(self) -> bool:
        return math.isinf(self.q)

    def conjugate(self) -> "LorentzIndex":
        """The Hölder-dual index (p', q')."""
        if self.p == 1:
            raise DomainError("L^{1,q} has no Lorentz conjugate with finite first exponent")
        p_dual = self.p / (self.p - 1)
        if self.q == 1:
            q_dual = INF
        elif math.isinf(self.q):
            q_dual = 1.0
        else:
            q_dual = self.q / (self.q - 1)
        return LorentzIndex(p_dual, q_dual)


def unit_ball_volume(N: int) -> float:
    """|B_1(0)| in R^N."""
    if N < 1:
        raise DomainError(f"dimension must be positive, got {N}")
    return math.exp(0.5 * N * math.log(math.pi) - gammaln(0.5 * N + 1.0))


def sphere_area(N: int) -> float:
    """Surface measure of the unit sphere S^{N-1} in R^N (N |B_1|)."""
    return N * unit_ball_volume(N)


def distribution_function(f: SampledFunction, s: float) -> float:
    """α_f(s) = |{|f| > s}|."""
    if s < 0:
        raise DomainError(f"distribution level must be nonnegative, got {s}")
    return float(f.measures[np.abs(f.values) > s].sum())


def decreasing_rearrangement(f: SampledFunction, t: ArrayLike) -> ArrayLike:
    """f*(t) = inf{s > 0 : α_f(s) <= t}; zero beyond the support."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise DomainError("rearrangement argument t must be positive")
    levels, cumulative = f.steps()
    index = np.searchsorted(cumulative, t_arr, side="right")
    padded = np.append(levels, 0.0)
    result = padded[index]
    if np.ndim(t) == 0:
        return float(result)
    return result


def lebesgue_norm(f: SampledFunction, p: float) -> float:
    """‖f‖_{L^p}, p in [1, inf]."""
    if not p >= 1:
        raise DomainError(f"Lebesgue exponent must be >= 1, got {p}")
    a = np.abs(f.values)
    if math.isinf(p):
        support = f.measures > 0
        return float(a[support].max())
    return float(np.sum(f.measures * a ** p) ** (1.0 / p))


def lorentz_norm(f: SampledFunction, idx: LorentzIndex) -> float:
    """‖f‖_{L^{p,q}} without normalizing constant.

    For q = inf the sup of t^{1/p} f*(t) sits at a right endpoint of a step;
    for q < inf the integral of (t^{1/p} f*)^q dt/t is summed step by step.
    """
    levels, cumulative = f.steps()
    if levels.size == 0 or levels[0] == 0:
        return 0.0
    p, q = idx.p, idx.q
    if idx.is_weak:
        return float(np.max(levels * cumulative ** (1.0 / p)))
    previous = np.concatenate(([0.0], cumulative[:-1]))
    pieces = levels ** q * (p / q) * (cumulative ** (q / p) - previous ** (q / p))
    return float(pieces.sum() ** (1.0 / q))


def sobolev_constant(N: int) -> float:
    """Best constant S_N of ‖u‖_{L^{N/(N-1)}} <= S_N ∫|Du|."""
    if N < 2:
        raise DomainError(f"the Sobolev constant needs N >= 2, got {N}")
    return 1.0 / (N * unit_ball_volume(N) ** (1.0 / N))


def gamma_constant(N: int) -> float:
    """Best constant γ of ‖u‖_{L^{N/(N-1),1}} <= γ ∫|Du|."""
    if N < 2:
        raise DomainError(f"the Lorentz-Sobolev constant needs N >= 2, got {N}")
    return 1.0 / ((N - 1) * unit_ball_volume(N) ** (1.0 / N))


def hardy_multiplier(N: int, p: float) -> float:
    """(p/(N-p))^p, the reciprocal of the optimal Hardy constant."""
    if not 1 <= p < N:
        raise DomainError(f"the Hardy inequality needs 1 <= p < N, got p={p}, N={N}")
    return (p / (N - p)) ** p


def hardy_threshold(N: int, p: float) -> float:
    """((N-p)/p)^p: the largest λ keeping the Hardy-perturbed energy coercive."""
    return 1.0 / hardy_multiplier(N, p)
