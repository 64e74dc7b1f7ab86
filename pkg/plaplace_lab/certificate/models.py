"""
Data models for solution certificates of the 1-Laplacian problem, the bump
test functions they are tested against, and the verdicts of the checks.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from ..core.fields import GridField2D, VectorField
from ..core.norms import sphere_area
from ..problem.models import DomainSpec, SourceSpec
from ..utils.exceptions import SpecError

RadialFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class CertificateTolerances:
    """Pass thresholds of the four checks."""

    defect: float = 1e-3
    sup: float = 1e-9
    pairing: float = 1e-6
    boundary: float = 1e-6
    truncation: float = 1e-4
    grad_floor: float = 1e-10

    @classmethod
    def closed_form(cls) -> "CertificateTolerances":
        return cls()

    @classmethod
    def numeric(cls) -> "CertificateTolerances":
        return cls(defect=5e-2, sup=0.02, pairing=0.05)

    @classmethod
    def from_config(cls, certificate_config, numeric: bool = False) -> "CertificateTolerances":
        if numeric:
            return cls(
                defect=certificate_config.numeric_defect_tol,
                sup=certificate_config.numeric_sup_tol,
                pairing=certificate_config.numeric_pairing_tol,
                boundary=certificate_config.boundary_tol,
                truncation=certificate_config.truncation_tol,
            )
        return cls(
            defect=certificate_config.closed_form_defect_tol,
            sup=certificate_config.closed_form_sup_tol,
            pairing=certificate_config.closed_form_pairing_tol,
            boundary=certificate_config.boundary_tol,
            truncation=certificate_config.truncation_tol,
        )


@dataclass
class Certificate:
    """A radial candidate (u, z, s) for −div z = λs/|x| + f on a ball.

    u, its derivative, the radial component of z and s are functions of r.
    Breakpoints mark radii where any of them fails to be smooth; quadratures
    split there.
    """

    N: int
    lam: float
    f: SourceSpec
    u: RadialFunction
    du: RadialFunction
    z: RadialFunction
    s: RadialFunction
    R: float = 1.0
    breakpoints: List[float] = field(default_factory=list)
    numeric: bool = False
    name: str = ""
    parameters: Dict[str, Any] = field(default_factory=dict)
    u_shift: float = 0.0
    normal_trace: Optional[float] = None
    perturbation: Optional[str] = None

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise SpecError(f"certificate dimension must be an integer >= 2, got {self.N}")
        if not self.R > 0:
            raise SpecError(f"certificate radius must be positive, got {self.R}")
        if isinstance(self.f, dict):
            self.f = SourceSpec.from_dict(self.f)

    def u_value(self, r) -> np.ndarray:
        return np.asarray(self.u(r), dtype=float) + self.u_shift

    def truncated(self, r, k: float) -> np.ndarray:
        return np.clip(self.u_value(r), -k, k)

    def truncated_derivative(self, r, k: float) -> np.ndarray:
        inside = np.abs(self.u_value(r)) < k
        return np.where(inside, np.asarray(self.du(r), dtype=float), 0.0)

    def source(self, r) -> np.ndarray:
        """λ s(r)/r + f(r)."""
        r = np.asarray(r, dtype=float)
        return self.lam * np.asarray(self.s(r), dtype=float) / r + self.f(r)

    def trace(self) -> float:
        """[z, ν] on the outer sphere."""
        if self.normal_trace is not None:
            return float(self.normal_trace)
        return float(np.asarray(self.z(np.array([self.R])), dtype=float)[0])

    def truncation_radii(self, k: float) -> List[float]:
        """Radii in (0, R) where |u| crosses k, located on a fine grid."""
        r = self.R * (np.arange(1, 8193) / 8192.0) ** 2
        excess = np.abs(self.u_value(r)) - k
        crossing = np.flatnonzero(np.sign(excess[:-1]) != np.sign(excess[1:]))
        radii = []
        for i in crossing:
            lo, hi = r[i], r[i + 1]
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if np.sign(abs(float(self.u_value(np.array([mid]))[0])) - k) == np.sign(excess[i]):
                    lo = mid
                else:
                    hi = mid
            radii.append(0.5 * (lo + hi))
        return radii

    def with_changes(self, **changes) -> "Certificate":
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        data = {"name": self.name, "N": self.N, "R": self.R, "lambda": self.lam,
                "f": self.f.to_dict(), "numeric": self.numeric, "parameters": dict(self.parameters)}
        if self.perturbation:
            data["perturbation"] = self.perturbation
        return data


@dataclass
class GridCertificate:
    """A candidate on a Cartesian grid: nodal u and s, per-triangle z."""

    u: GridField2D
    z: VectorField
    s: np.ndarray
    lam: float
    f: SourceSpec
    numeric: bool = True
    name: str = ""
    perturbation: Optional[str] = None

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        if s.shape != self.u.values.shape:
            s = np.full(self.u.values.shape, float(s)) if s.size == 1 else s.reshape(self.u.values.shape)
        self.s = s
        if self.z.grid != self.u.grid:
            raise SpecError("u and z of a grid certificate must share the grid")

    @property
    def N(self) -> int:
        return 2

    @property
    def grid(self):
        return self.u.grid

    def to_dict(self) -> Dict[str, Any]:
        data = {"name": self.name, "N": 2, "lambda": self.lam, "f": self.f.to_dict(),
                "numeric": self.numeric, "grid": self.grid.to_dict()}
        if self.perturbation:
            data["perturbation"] = self.perturbation
        return data


@dataclass(frozen=True)
class Bump:
    """φ(x) = (1 − |x − c|²/ρ²)³ on B_ρ(c), zero outside."""

    center: Tuple[float, ...]
    radius: float

    @property
    def offset(self) -> float:
        return float(np.linalg.norm(self.center))

    def value(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        w = self._w(x, y)
        return w ** 3

    def gradient(self, x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        w = self._w(x, y)
        scale = -6.0 * w ** 2 / self.radius ** 2
        return scale * (x - self.center[0]), scale * (y - self.center[1])

    def _w(self, x, y):
        d2 = (x - self.center[0]) ** 2 + (y - self.center[1]) ** 2
        return np.clip(1.0 - d2 / self.radius ** 2, 0.0, None)


@dataclass
class TestFunctionFamily:
    """Bumps with supports inside the domain."""

    bumps: List[Bump]

    __test__ = False

    def __post_init__(self):
        if not self.bumps:
            raise SpecError("test function family is empty")
        for bump in self.bumps:
            if not bump.radius > 0:
                raise SpecError(f"bump radius must be positive, got {bump.radius}")

    def __iter__(self):
        return iter(self.bumps)

    def __len__(self):
        return len(self.bumps)

    def check_support(self, domain: DomainSpec):
        """Raise if some bump is not compactly supported in the domain."""
        for bump in self.bumps:
            if domain.kind.value in ("ball", "disk", "annulus"):
                inside = bump.offset + bump.radius <= domain.R * (1 + 1e-12)
                if domain.kind.value == "annulus":
                    inside = inside and bump.offset - bump.radius >= domain.r_inner
            else:
                a, b = domain.half_widths
                inside = (abs(bump.center[0]) + bump.radius <= a) and (abs(bump.center[1]) + bump.radius <= b)
            if not inside:
                raise SpecError(f"bump at {bump.center} with radius {bump.radius} leaves the domain")

    @classmethod
    def default(cls, N: int = 2, R: float = 1.0) -> "TestFunctionFamily":
        """Five bumps on each of the rings |c| = R/3 and 2R/3, one next to the origin, one across it."""
        bumps = []
        for ring in (R / 3.0, 2.0 * R / 3.0):
            for k in range(5):
                angle = 2.0 * math.pi * k / 5.0
                bumps.append(Bump(_point(N, ring * math.cos(angle), ring * math.sin(angle)), R / 4.0))
        bumps.append(Bump(_point(N, R / 5.0, 0.0), R / 6.0))
        bumps.append(Bump(_point(N, R / 10.0, 0.0), R / 5.0))
        return cls(bumps)

    @classmethod
    def for_box(cls, half_widths: Tuple[float, float]) -> "TestFunctionFamily":
        a, b = half_widths
        rho = min(a, b) / 4.0
        bumps = [Bump((x, y), rho) for x in (-a / 2, 0.0, a / 2) for y in (-b / 2, 0.0, b / 2)
                 if (x, y) != (0.0, 0.0)]
        bumps.append(Bump((rho / 10.0, 0.0), rho))
        return cls(bumps)


def _point(N: int, x: float, y: float) -> Tuple[float, ...]:
    return (x, y) + (0.0,) * (N - 2)


def axial_sphere_area(N: int) -> float:
    """|S^{N−2}|, the weight of the polar angle in R^N."""
    return sphere_area(N - 1)


@dataclass
class CheckVerdict:
    """Outcome of one certificate check."""

    name: str
    passed: bool
    defect: float
    threshold: float
    detail: str = ""

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> Dict[str, Any]:
        return {"pass": self.passed, "defect": self.defect, "threshold": self.threshold, "detail": self.detail}


@dataclass
class CertificateVerdict:
    """All checks of a certificate."""

    checks: Dict[str, CheckVerdict]
    certificate: Dict[str, Any] = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return all(v.passed for v in self.checks.values())

    @property
    def failing(self) -> List[str]:
        return [name for name, v in self.checks.items() if not v.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "certificate": self.certificate,
            "checks": {name: v.to_dict() for name, v in self.checks.items()},
            "all_passed": self.all_passed,
            "failing": self.failing,
        }
