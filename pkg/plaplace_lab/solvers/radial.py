"""
Radial closed forms, a strong-form residual, and a damped Newton solver for

    −(r^{N−1}|u′|^{p−2}u′)′ = r^{N−1}(β|u|^{p−2}u/r^p + F(r)),  u = 0 on the outer sphere.

The solver works with the scheme's own Euler–Lagrange equations. On a ball,
summing the nodal equations from the centre outwards gives the normalized
flux of each cell in closed form, so the unknowns are the nodal values and
the residual is measured in slope form: G_c = u′_c − ψ(s_c(u)), with ψ the
inverse of q ↦ |q|^{p−2}q. On an annulus the flux through the inner sphere is
one more unknown.
"""

import logging
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
import scipy.linalg
from scipy.optimize import brentq

from .assembly import HardyQuadrature, assemble_load, signed_power
from .models import NewtonSettings
from ..core.fields import RadialField, RadialGrid
from ..core.norms import hardy_threshold
from ..problem.models import DomainSpec, HardyTerm, ProblemSpec, SourceSpec
from ..utils.exceptions import CoercivityWarning, ConvergenceError, DomainError, SpecError

logger = logging.getLogger(__name__)

INF = math.inf
DERIVATIVE_STEP = 1e-3


class ClosedFormKind(Enum):
    """Explicit radial solutions."""
    TORSION = "Torsion"
    HARDY_LINE = "HardyLine"
    EXTREME_PAIR = "ExtremePair"
    SINGULAR_FAMILY = "SingularFamily"


@dataclass(frozen=True)
class ClosedForm:
    """An explicit radial solution together with the data it solves.

    Torsion and HardyLine solve the p-problem; ExtremePair (u = 1 − |x|) and
    SingularFamily (u = |x|^{−α} − 1) are 1-Laplacian solutions whose
    flux is z = −x/|x|.
    """

    kind: ClosedFormKind
    N: int
    R: float = 1.0
    p: float = math.nan
    a: float = math.nan
    lam: float = 0.0
    alpha: float = math.nan

    def __post_init__(self):
        if isinstance(self.kind, str):
            object.__setattr__(self, 'kind', ClosedFormKind(self.kind))
        if int(self.N) != self.N or self.N < 2:
            raise DomainError(f"dimension N must be an integer >= 2, got {self.N}")
        kind = self.kind
        if kind in (ClosedFormKind.TORSION, ClosedFormKind.HARDY_LINE):
            if not self.p > 1:
                raise DomainError(f"closed form {kind.value} needs p > 1, got {self.p}")
            if not self.p < self.N:
                raise DomainError(f"closed form {kind.value} needs p < N, got p={self.p}, N={self.N}")
        if kind is ClosedFormKind.TORSION and not self.R > 0:
            raise DomainError(f"radius must be positive, got {self.R}")
        if kind is ClosedFormKind.HARDY_LINE:
            if not 0 <= self.lam < self.a <= self.N - 1:
                raise DomainError(f"hardy line needs 0 <= lambda < a <= N - 1, got a={self.a}, lambda={self.lam}")
        if kind is ClosedFormKind.EXTREME_PAIR and not 0 <= self.alpha <= 1:
            raise DomainError(f"extreme pair needs 0 <= alpha <= 1, got {self.alpha}")
        if kind is ClosedFormKind.SINGULAR_FAMILY and not 0 < self.alpha < self.N - 1:
            raise DomainError(f"singular family needs 0 < alpha < N - 1, got {self.alpha}")

    @classmethod
    def torsion(cls, N: int, R: float, p: float) -> "ClosedForm":
        return cls(ClosedFormKind.TORSION, N=N, R=R, p=p)

    @classmethod
    def hardy_line(cls, N: int, a: float, lam: float, p: float) -> "ClosedForm":
        return cls(ClosedFormKind.HARDY_LINE, N=N, p=p, a=a, lam=lam)

    @classmethod
    def extreme_pair(cls, N: int, alpha: float) -> "ClosedForm":
        return cls(ClosedFormKind.EXTREME_PAIR, N=N, lam=alpha * (N - 1), alpha=alpha)

    @classmethod
    def singular_family(cls, N: int, alpha: float) -> "ClosedForm":
        return cls(ClosedFormKind.SINGULAR_FAMILY, N=N, lam=float(N - 1), alpha=alpha)

    @property
    def is_one_laplacian(self) -> bool:
        return self.kind in (ClosedFormKind.EXTREME_PAIR, ClosedFormKind.SINGULAR_FAMILY)

    @property
    def center_value(self) -> float:
        if self.kind is ClosedFormKind.TORSION:
            N, R, p = self.N, self.R, self.p
            return (1.0 / N) ** (1.0 / (p - 1)) * ((p - 1) / p) * R ** (p / (p - 1))
        if self.kind is ClosedFormKind.HARDY_LINE:
            return (self.a / (self.N - 1)) ** (1.0 / (self.p - 1))
        if self.kind is ClosedFormKind.EXTREME_PAIR:
            return 1.0
        return INF

    def value(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind is ClosedFormKind.TORSION:
            q = self.p / (self.p - 1)
            return self.center_value * (1.0 - (r / self.R) ** q)
        if self.kind is ClosedFormKind.HARDY_LINE:
            return self.center_value * (1.0 - r)
        if self.kind is ClosedFormKind.EXTREME_PAIR:
            return 1.0 - r
        with np.errstate(divide="ignore"):
            return r ** (-self.alpha) - 1.0

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind is ClosedFormKind.TORSION:
            q = self.p / (self.p - 1)
            return -self.center_value * q * r ** (q - 1) / self.R ** q
        if self.kind is ClosedFormKind.HARDY_LINE:
            return np.full(r.shape, -self.center_value)
        if self.kind is ClosedFormKind.EXTREME_PAIR:
            return np.full(r.shape, -1.0)
        with np.errstate(divide="ignore"):
            return -self.alpha * r ** (-self.alpha - 1.0)

    def flux(self, r):
        """Radial component of |u′|^{p−2}u′, or of z for the 1-Laplacian pairs."""
        if self.is_one_laplacian:
            return np.full(np.shape(r), -1.0)
        return signed_power(self.derivative(r), self.p - 1.0)

    def source(self, r):
        """Right-hand side of the radial equation along the solution."""
        r = np.asarray(r, dtype=float)
        if self.kind is ClosedFormKind.TORSION:
            return np.ones(r.shape)
        if self.kind is ClosedFormKind.HARDY_LINE:
            return self.a / r
        return (self.N - 1) / r

    def residual(self, r):
        """−(r^{N−1} flux)′/r^{N−1} − source, by a five-point derivative."""
        r = np.asarray(r, dtype=float)
        h = DERIVATIVE_STEP * r
        m = self.N - 1

        def weighted(x):
            return x ** m * self.flux(x)

        derivative = (
            -weighted(r + 2 * h) + 8 * weighted(r + h) - 8 * weighted(r - h) + weighted(r - 2 * h)
        ) / (12 * h)
        return -derivative / r ** m - self.source(r)

    def problem_spec(self) -> ProblemSpec:
        """The boundary value problem this profile solves (frozen-sign form where relevant)."""
        N = self.N
        if self.kind is ClosedFormKind.TORSION:
            return ProblemSpec(N=N, lam=0.0, f=SourceSpec.constant(1.0),
                               domain=DomainSpec(R=self.R), name="torsion")
        if self.kind is ClosedFormKind.HARDY_LINE:
            return ProblemSpec(N=N, lam=self.lam, f=SourceSpec.power(self.a - self.lam, 1.0),
                               hardy_term=HardyTerm.SIGN, name="hardy_line")
        if self.kind is ClosedFormKind.EXTREME_PAIR:
            return ProblemSpec(N=N, lam=self.lam, f=SourceSpec.power((1 - self.alpha) * (N - 1), 1.0),
                               hardy_term=HardyTerm.SIGN, name="cone")
        return ProblemSpec(N=N, lam=self.lam, f=SourceSpec.constant(0.0),
                           hardy_term=HardyTerm.SIGN, name="singular_power")

    def to_dict(self):
        data = {"kind": self.kind.value, "N": self.N}
        for key in ("R", "p", "a", "lam", "alpha"):
            value = getattr(self, key)
            if not (isinstance(value, float) and math.isnan(value)):
                data["lambda" if key == "lam" else key] = value
        return data


def torsion(N: int, R: float, p: float, r):
    """v_p(r) = v_p(0)(1 − (r/R)^{p/(p−1)}) for −Δ_p v = 1 on B_R."""
    if np.min(r) < 0 or np.max(r) > R * (1 + 1e-12):
        raise DomainError(f"torsion profile is defined on [0, R], got r outside [0, {R}]")
    return ClosedForm.torsion(N, R, p).value(r)


def hardy_line(N: int, a: float, lam: float, p: float, r):
    """u_p(r) = (a/(N−1))^{1/(p−1)}(1 − r) for f = (a − λ)/|x| on B_1."""
    return ClosedForm.hardy_line(N, a, lam, p).value(r)


def singular_family(N: int, alpha: float, r):
    """u(r) = r^{−α} − 1, a solution of the λ = N − 1, f = 0 problem on B_1."""
    return ClosedForm.singular_family(N, alpha).value(r)


def cone_profile(r):
    """u(r) = 1 − r."""
    return ClosedForm.extreme_pair(2, 0.0).value(r)


def _source_function(f) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(f, SourceSpec) or callable(f):
        return f
    constant = float(f)
    return lambda r: np.full(np.shape(r), constant)


def strong_residual(u: RadialField, p: float, lam: float = 0.0,
                    f: Union[SourceSpec, Callable, float] = 0.0,
                    hardy_term: HardyTerm = HardyTerm.HARDY) -> np.ndarray:
    """Centered-difference residual of the radial strong form at the interior nodes.

    Cell fluxes sit at cell midpoints; their weighted difference is taken at
    each interior node r_1 … r_{M−1}.
    """
    if not p > 1:
        raise DomainError(f"strong_residual needs p > 1, got {p}")
    grid = u.grid
    N = grid.N
    slopes = np.diff(u.values) / grid.widths
    q = signed_power(slopes, p - 1.0)
    mid = grid.midpoints
    weighted = mid ** (N - 1) * q
    r = grid.nodes[1:-1]
    divergence = (weighted[1:] - weighted[:-1]) / (mid[1:] - mid[:-1]) / r ** (N - 1)
    source = np.asarray(_source_function(f)(r), dtype=float)
    values = u.values[1:-1]
    if HardyTerm(hardy_term) is HardyTerm.SIGN:
        zero_order = lam / r
    else:
        zero_order = lam * signed_power(values, p - 1.0) / r ** p
    return -divergence - zero_order - source


class RadialSystem:
    """The discrete Euler–Lagrange system of the radial scheme at one exponent."""

    def __init__(self, spec: ProblemSpec, grid: RadialGrid, p: float, smoothing: float = 1e-10):
        self.spec = spec
        self.grid = grid
        self.p = p
        self.beta = spec.beta
        self.smoothing = smoothing
        self.load = assemble_load(spec, grid)
        self.hardy = HardyQuadrature(grid, p) if self.beta else None
        self.stiffness = grid.cell_volumes / grid.widths
        self.slope = grid.gradient_operators[0].toarray()
        self.ball = grid.is_ball

    @property
    def size(self) -> int:
        return self.grid.M

    def psi(self, s: np.ndarray) -> np.ndarray:
        return signed_power(s, 1.0 / (self.p - 1.0))

    def psi_prime(self, s: np.ndarray) -> np.ndarray:
        exponent = 0.5 * (2.0 - self.p) / (self.p - 1.0)
        return (s * s + self.smoothing ** 2) ** exponent / (self.p - 1.0)

    def unpack(self, x: np.ndarray) -> Tuple[np.ndarray, float]:
        M = self.grid.M
        u = np.zeros(M + 1)
        if self.ball:
            u[:M] = x
            return u, 0.0
        u[1:M] = x[:-1]
        return u, float(x[-1])

    def pack(self, u: np.ndarray, inner_flux: float = 0.0) -> np.ndarray:
        M = self.grid.M
        if self.ball:
            return np.array(u[:M], dtype=float)
        return np.append(u[1:M], inner_flux)

    def balance(self, u: np.ndarray) -> np.ndarray:
        """Nodal right-hand side F + βH(u)."""
        if self.hardy is None:
            return self.load
        return self.load + self.beta * self.hardy.vector(u)

    def normalized_flux(self, u: np.ndarray, inner_flux: float) -> np.ndarray:
        M = self.grid.M
        b = self.balance(u)
        if self.ball:
            return -np.cumsum(b)[:M] / self.stiffness
        partial = np.concatenate(([0.0], np.cumsum(b[1:M])))
        return (inner_flux - partial) / self.stiffness

    def residual(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        u, inner_flux = self.unpack(x)
        slopes = self.slope @ u
        return slopes - self.psi(self.normalized_flux(u, inner_flux)), slopes

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        M = self.grid.M
        u, inner_flux = self.unpack(x)
        s = self.normalized_flux(u, inner_flux)
        dpsi = self.psi_prime(s)
        full = self.slope.copy()
        if self.hardy is not None:
            dH = self.hardy.jacobian(u, self.smoothing).toarray()
            if self.ball:
                partial = np.cumsum(dH, axis=0)[:M]
            else:
                partial = np.vstack([np.zeros((1, M + 1)), np.cumsum(dH[1:M], axis=0)])
            full += (dpsi * self.beta / self.stiffness)[:, None] * partial
        if self.ball:
            return full[:, :M]
        return np.hstack([full[:, 1:M], (-dpsi / self.stiffness)[:, None]])

    def integrate_slopes(self, slopes: np.ndarray) -> np.ndarray:
        """Nodal values from cell slopes with u = 0 on the outer sphere."""
        steps = slopes * self.grid.widths
        u = np.zeros(self.grid.M + 1)
        u[:-1] = -np.cumsum(steps[::-1])[::-1]
        return u

    def explicit_profile(self) -> Tuple[np.ndarray, float]:
        """Exact discrete solution without the Hardy term."""
        M = self.grid.M
        if self.ball:
            s = -np.cumsum(self.load)[:M] / self.stiffness
            return self.integrate_slopes(self.psi(s)), 0.0
        partial = np.concatenate(([0.0], np.cumsum(self.load[1:M])))
        widths = self.grid.widths

        def drop(c):
            return float(np.dot(widths, self.psi((c - partial) / self.stiffness)))

        lo, hi = float(partial.min()), float(partial.max())
        inner_flux = lo if hi == lo else brentq(drop, lo, hi, xtol=1e-15 * max(1.0, abs(hi)), rtol=1e-15)
        u = self.integrate_slopes(self.psi((inner_flux - partial) / self.stiffness))
        u[0] = 0.0
        return u, inner_flux

    def inner_flux_of(self, u: np.ndarray) -> float:
        slope = (u[1] - u[0]) / self.grid.widths[0]
        return float(self.stiffness[0] * signed_power(slope, self.p - 1.0))

    def solve(self, settings: NewtonSettings, initial: Optional[np.ndarray] = None) -> Tuple[np.ndarray, List[float]]:
        if initial is None or self.hardy is None:
            u0, c0 = self.explicit_profile()
        else:
            u0 = np.array(initial, dtype=float)
            u0[-1] = 0.0
            if not self.ball:
                u0[0] = 0.0
            c0 = self.inner_flux_of(u0)
        x = self.pack(u0, c0)
        G, slopes = self.residual(x)
        norm = float(np.max(np.abs(G)))
        history = [norm]
        for iteration in range(settings.max_iters + 1):
            scale = max(1.0, float(np.max(np.abs(slopes))))
            if norm <= settings.tol * scale:
                logger.debug(f"Newton converged at p={self.p} after {iteration} iterations (|G|={norm:.3e})")
                return self.unpack(x)[0], history
            if iteration == settings.max_iters:
                break
            try:
                step = scipy.linalg.solve(self.jacobian(x), -G)
            except (scipy.linalg.LinAlgError, ValueError) as e:
                raise ConvergenceError(f"singular Newton system at p={self.p}: {e}", history) from e
            t = 1.0
            while True:
                trial = x + t * step
                G_trial, slopes_trial = self.residual(trial)
                norm_trial = float(np.max(np.abs(G_trial)))
                if np.isfinite(norm_trial) and norm_trial <= (1.0 - 1e-4 * t) * norm:
                    break
                t *= 0.5
                if t < settings.min_step:
                    raise ConvergenceError(f"Newton line search stalled at p={self.p} (|G|={norm:.3e})", history)
            x, G, slopes, norm = trial, G_trial, slopes_trial, norm_trial
            history.append(norm)
            logger.debug(f"Newton p={self.p} iteration {iteration + 1}: |G|={norm:.3e}, step={t}")
        raise ConvergenceError(f"Newton did not converge in {settings.max_iters} iterations at p={self.p}", history)


def _continuation_exponents(p: float, N: int) -> List[float]:
    return [q for q in (p + 0.4, p + 0.2, p + 0.1) if 1 < q < N]


def solve_radial_bvp(spec: ProblemSpec, p: float, settings: Optional[NewtonSettings] = None,
                     initial: Optional[RadialField] = None,
                     grid: Optional[RadialGrid] = None) -> RadialField:
    """Damped Newton solve of the radial scheme; falls back to continuation from larger p."""
    settings = settings or NewtonSettings()
    if not spec.domain.is_radial:
        raise SpecError(f"solve_radial_bvp needs a ball or annulus, got {spec.domain.kind.value}")
    N = spec.N
    if not 1 < p < N:
        raise DomainError(f"radial solves need 1 < p < N, got p={p}, N={N}")
    grid = grid or spec.radial_grid()
    if initial is not None and initial.grid != grid:
        raise SpecError("initial field lives on a different grid")
    if spec.beta and spec.beta >= hardy_threshold(N, p):
        warnings.warn(
            f"lambda={spec.beta} >= ((N-p)/p)^p={hardy_threshold(N, p):.6g}: the energy is not coercive",
            CoercivityWarning,
        )

    logger.info(f"Solving {spec.name or 'radial problem'} at p={p} on {grid.M} cells")
    start = None if initial is None else initial.values
    try:
        values, history = RadialSystem(spec, grid, p, settings.smoothing).solve(settings, start)
        return RadialField(grid, values)
    except ConvergenceError as e:
        history = list(e.history)
        logger.warning(f"Newton failed at p={p} ({e}); continuing from larger exponents")

    warm = None
    try:
        for q in _continuation_exponents(p, N) + [p]:
            warm, steps = RadialSystem(spec, grid, q, settings.smoothing).solve(settings, warm)
            history.extend(steps)
    except ConvergenceError as e:
        history.extend(e.history)
        raise ConvergenceError(f"radial solve failed at p={p} after continuation: {e}", history) from e
    return RadialField(grid, warm)
