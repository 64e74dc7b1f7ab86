"""
Data models for problem descriptions and smallness-condition reports.
"""

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from ..core.fields import CartesianGrid, RadialGrid, make_cartesian_grid, make_radial_grid
from ..utils.exceptions import SpecError
from ..utils.formats import OutputFormats

INF = math.inf

# (r_lo, r_hi, coefficient, exponent): the piece coefficient * r^(-exponent) on (r_lo, r_hi]
PowerPiece = Tuple[float, float, float, float]


class SourceKind(Enum):
    """Supported radial source data."""
    CONSTANT = "constant"
    POWER = "power"
    STEPS = "steps"
    TABULATED = "tabulated"


class DomainKind(Enum):
    """Supported domains."""
    BALL = "ball"
    ANNULUS = "annulus"
    DISK = "disk"
    BOX = "box"


class HardyTerm(Enum):
    """Form of the zero-order term λ(...)/|x|^p."""
    HARDY = "hardy"  # λ|u|^{p-2}u/|x|^p
    SIGN = "sign"    # λ/|x|, the frozen-sign source


class Regime(Enum):
    """Asymptotic regime predicted by the smallness conditions."""
    VANISH_PREDICTED = "VanishPredicted"
    EXTREME_BOUNDED = "ExtremeBounded"
    BLOWUP_EXPECTED = "BlowupExpected"
    UNKNOWN = "Unknown"


@dataclass
class SourceSpec:
    """A nonnegative radial datum f(|x|)."""

    kind: SourceKind = SourceKind.CONSTANT
    c: float = 0.0
    b: float = 0.0
    breaks: List[float] = field(default_factory=list)
    values: List[float] = field(default_factory=list)
    radii: List[float] = field(default_factory=list)

    def __post_init__(self):
        if isinstance(self.kind, str):
            try:
                self.kind = SourceKind(self.kind)
            except ValueError:
                raise SpecError(f"Unknown source kind: {self.kind}")
        self.c = float(self.c)
        self.b = float(self.b)
        self.breaks = [float(x) for x in self.breaks]
        self.values = [float(x) for x in self.values]
        self.radii = [float(x) for x in self.radii]

        if self.kind in (SourceKind.CONSTANT, SourceKind.POWER):
            if not self.c >= 0 or not math.isfinite(self.c):
                raise SpecError(f"source coefficient must be finite and >= 0, got {self.c}")
        if self.kind is SourceKind.POWER and not 0 <= self.b <= 1:
            raise SpecError(f"power source exponent must lie in [0, 1], got {self.b}")
        if self.kind is SourceKind.STEPS:
            if len(self.values) != len(self.breaks) + 1:
                raise SpecError("steps need one more value than breaks")
            if any(b2 <= b1 for b1, b2 in zip(self.breaks, self.breaks[1:])) or any(b <= 0 for b in self.breaks):
                raise SpecError("step breaks must be positive and strictly increasing")
        if self.kind is SourceKind.TABULATED:
            if len(self.radii) < 2 or len(self.radii) != len(self.values):
                raise SpecError("tabulated sources need matching radii and values (at least two)")
            if any(r2 <= r1 for r1, r2 in zip(self.radii, self.radii[1:])) or self.radii[0] < 0:
                raise SpecError("tabulated radii must be nonnegative and strictly increasing")
        if self.kind in (SourceKind.STEPS, SourceKind.TABULATED):
            if any(v < 0 or not math.isfinite(v) for v in self.values):
                raise SpecError("source values must be finite and >= 0")

    @classmethod
    def constant(cls, c: float) -> "SourceSpec":
        return cls(SourceKind.CONSTANT, c=c)

    @classmethod
    def power(cls, c: float, b: float) -> "SourceSpec":
        return cls(SourceKind.POWER, c=c, b=b)

    @classmethod
    def steps(cls, breaks: List[float], values: List[float]) -> "SourceSpec":
        return cls(SourceKind.STEPS, breaks=breaks, values=values)

    @classmethod
    def tabulated(cls, radii: List[float], values: List[float]) -> "SourceSpec":
        return cls(SourceKind.TABULATED, radii=radii, values=values)

    def __call__(self, r: Union[float, np.ndarray]) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.kind is SourceKind.CONSTANT:
            return np.full(r.shape, self.c)
        if self.kind is SourceKind.POWER:
            if self.b == 0:
                return np.full(r.shape, self.c)
            with np.errstate(divide="ignore"):
                return self.c * r ** (-self.b)
        if self.kind is SourceKind.STEPS:
            index = np.searchsorted(np.asarray(self.breaks), r, side="left")
            return np.asarray(self.values)[index]
        return np.interp(r, self.radii, self.values)

    @property
    def is_zero(self) -> bool:
        if self.kind in (SourceKind.CONSTANT, SourceKind.POWER):
            return self.c == 0
        return all(v == 0 for v in self.values)

    @property
    def in_LN(self) -> bool:
        """Whether f lies in L^N of a bounded domain containing the origin."""
        return not (self.kind is SourceKind.POWER and self.b >= 1 and self.c > 0)

    @property
    def is_nonincreasing(self) -> bool:
        if self.kind in (SourceKind.CONSTANT, SourceKind.POWER):
            return True
        return all(v2 <= v1 for v1, v2 in zip(self.values, self.values[1:]))

    @property
    def breakpoints(self) -> List[float]:
        if self.kind is SourceKind.STEPS:
            return list(self.breaks)
        if self.kind is SourceKind.TABULATED:
            return list(self.radii)
        return []

    def power_pieces(self) -> Optional[List[PowerPiece]]:
        """Exact piecewise power-law representation, or None for tabulated data."""
        if self.kind is SourceKind.CONSTANT:
            return [(0.0, INF, self.c, 0.0)]
        if self.kind is SourceKind.POWER:
            return [(0.0, INF, self.c, self.b)]
        if self.kind is SourceKind.STEPS:
            edges = [0.0] + self.breaks + [INF]
            return [(lo, hi, v, 0.0) for lo, hi, v in zip(edges[:-1], edges[1:], self.values)]
        return None

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind.value}
        if self.kind is SourceKind.CONSTANT:
            data["c"] = self.c
        elif self.kind is SourceKind.POWER:
            data.update({"c": self.c, "b": self.b})
        elif self.kind is SourceKind.STEPS:
            data.update({"breaks": self.breaks, "values": self.values})
        else:
            data.update({"radii": self.radii, "values": self.values})
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SourceSpec":
        if not isinstance(data, dict) or "kind" not in data:
            raise SpecError("source must be an object with a 'kind' field")
        allowed = {"kind", "c", "b", "breaks", "values", "radii"}
        unknown = set(data) - allowed
        if unknown:
            raise SpecError(f"Unknown source fields: {sorted(unknown)}")
        try:
            return cls(**data)
        except (TypeError, ValueError) as e:
            raise SpecError(f"Invalid source: {e}") from e


@dataclass
class DomainSpec:
    """A ball, annulus, disk mask or box mask, with optional grid resolution overrides."""

    kind: DomainKind = DomainKind.BALL
    R: float = 1.0
    r_inner: float = 0.0
    half_widths: Tuple[float, float] = (1.0, 1.0)
    M: Optional[int] = None
    grading: Optional[float] = None
    n: Optional[int] = None

    def __post_init__(self):
        if isinstance(self.kind, str):
            try:
                self.kind = DomainKind(self.kind)
            except ValueError:
                raise SpecError(f"Unknown domain kind: {self.kind}")
        self.R = float(self.R)
        self.r_inner = float(self.r_inner)
        self.half_widths = tuple(float(x) for x in self.half_widths)
        if len(self.half_widths) != 2:
            raise SpecError("box half_widths must have two entries")
        if self.kind is not DomainKind.BOX and not self.R > 0:
            raise SpecError(f"radius must be positive, got {self.R}")
        if self.kind is DomainKind.ANNULUS and not 0 < self.r_inner < self.R:
            raise SpecError(f"annulus needs 0 < r_inner < R, got r_inner={self.r_inner}, R={self.R}")
        if self.kind is not DomainKind.ANNULUS and self.r_inner != 0:
            raise SpecError("r_inner is only meaningful for annuli")
        if self.kind is DomainKind.BOX and min(self.half_widths) <= 0:
            raise SpecError("box half_widths must be positive")

    @property
    def is_radial(self) -> bool:
        return self.kind in (DomainKind.BALL, DomainKind.ANNULUS)

    @property
    def contains_origin(self) -> bool:
        return self.kind is not DomainKind.ANNULUS

    @property
    def outer_radius(self) -> float:
        if self.kind is DomainKind.BOX:
            return math.hypot(*self.half_widths)
        return self.R

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind.value}
        if self.kind is DomainKind.BOX:
            data["half_widths"] = list(self.half_widths)
        else:
            data["R"] = self.R
        if self.kind is DomainKind.ANNULUS:
            data["r_inner"] = self.r_inner
        for key in ("M", "grading", "n"):
            value = getattr(self, key)
            if value is not None:
                data[key] = value
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DomainSpec":
        if not isinstance(data, dict) or "kind" not in data:
            raise SpecError("domain must be an object with a 'kind' field")
        allowed = {"kind", "R", "r_inner", "half_widths", "M", "grading", "n"}
        unknown = set(data) - allowed
        if unknown:
            raise SpecError(f"Unknown domain fields: {sorted(unknown)}")
        try:
            return cls(**data)
        except (TypeError, ValueError) as e:
            raise SpecError(f"Invalid domain: {e}") from e


@dataclass
class ProblemSpec:
    """−Δ_p u = λ(...)/|x|^p + f in Ω, u = 0 on ∂Ω."""

    N: int
    lam: float = 0.0
    f: SourceSpec = field(default_factory=SourceSpec)
    domain: DomainSpec = field(default_factory=DomainSpec)
    hardy_term: HardyTerm = HardyTerm.HARDY
    dual_norm_f: Optional[float] = None
    name: str = ""

    def __post_init__(self):
        if isinstance(self.f, dict):
            self.f = SourceSpec.from_dict(self.f)
        if isinstance(self.domain, dict):
            self.domain = DomainSpec.from_dict(self.domain)
        if isinstance(self.hardy_term, str):
            try:
                self.hardy_term = HardyTerm(self.hardy_term)
            except ValueError:
                raise SpecError(f"Unknown hardy_term: {self.hardy_term}")
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 2:
            raise SpecError(f"dimension N must be an integer >= 2, got {self.N}")
        self.N = int(self.N)
        self.lam = float(self.lam)
        if not self.lam >= 0 or not math.isfinite(self.lam):
            raise SpecError(f"lambda must be finite and >= 0, got {self.lam}")
        if not self.domain.is_radial and self.N != 2:
            raise SpecError("disk and box domains are two-dimensional (N = 2)")
        if self.dual_norm_f is not None:
            self.dual_norm_f = float(self.dual_norm_f)
            if self.dual_norm_f < 0:
                raise SpecError("dual_norm_f must be >= 0")

    @property
    def beta(self) -> float:
        """Coefficient of the Hardy term inside the energy."""
        return self.lam if self.hardy_term is HardyTerm.HARDY else 0.0

    @property
    def sign_lambda(self) -> float:
        """Coefficient of the frozen source λ/|x|."""
        return self.lam if self.hardy_term is HardyTerm.SIGN else 0.0

    @property
    def measure(self) -> float:
        return self.make_grid(M=8, n=8).total_measure

    def validity_notes(self) -> List[str]:
        notes = []
        if self.lam >= self.N - 1:
            notes.append(f"lambda = {self.lam} >= N - 1 = {self.N - 1}: outside the existence range")
        if not self.f.in_LN:
            notes.append("f is not in L^N")
        return notes

    def total_source(self, r: np.ndarray, n: float = INF) -> np.ndarray:
        """Right-hand side without the Hardy term: λ min(1/r, n) (sign mode) + f(r)."""
        r = np.asarray(r, dtype=float)
        value = self.f(r)
        if self.sign_lambda:
            with np.errstate(divide="ignore"):
                value = value + self.sign_lambda * np.minimum(1.0 / r, n)
        return value

    def radial_grid(self, M: Optional[int] = None, grading: Optional[float] = None) -> RadialGrid:
        if not self.domain.is_radial:
            raise SpecError(f"{self.domain.kind.value} domains have no radial grid")
        return make_radial_grid(
            self.N, self.domain.R,
            M=M or self.domain.M or 512,
            grading=grading or self.domain.grading or 2.0,
            r_inner=self.domain.r_inner,
        )

    def cartesian_grid(self, n: Optional[int] = None) -> CartesianGrid:
        n = n or self.domain.n or 256
        if self.domain.kind is DomainKind.DISK:
            return make_cartesian_grid("disk", radius=self.domain.R, n=n)
        if self.domain.kind is DomainKind.BOX:
            return make_cartesian_grid("box", half_widths=self.domain.half_widths, n=n)
        raise SpecError(f"{self.domain.kind.value} domains are solved on radial grids")

    def make_grid(self, M: Optional[int] = None, grading: Optional[float] = None,
                  n: Optional[int] = None):
        if self.domain.is_radial:
            return self.radial_grid(M=M, grading=grading)
        return self.cartesian_grid(n=n)

    def with_changes(self, **changes) -> "ProblemSpec":
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "N": self.N,
            "lambda": self.lam,
            "f": self.f.to_dict(),
            "domain": self.domain.to_dict(),
            "hardy_term": self.hardy_term.value,
            "dual_norm_f": self.dual_norm_f,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ProblemSpec":
        if not isinstance(data, dict):
            raise SpecError("problem spec must be a JSON object")
        allowed = {"name", "N", "lambda", "f", "domain", "hardy_term", "dual_norm_f"}
        unknown = set(data) - allowed
        if unknown:
            raise SpecError(f"Unknown spec fields: {sorted(unknown)}")
        if "N" not in data:
            raise SpecError("spec needs a dimension N")
        kwargs = {k: v for k, v in data.items() if k != "lambda"}
        kwargs["lam"] = data.get("lambda", 0.0)
        kwargs.setdefault("f", {"kind": "constant", "c": 0.0})
        kwargs.setdefault("domain", {"kind": "ball", "R": 1.0})
        if kwargs.get("name") is None:
            kwargs["name"] = ""
        try:
            return cls(**kwargs)
        except (TypeError, ValueError) as e:
            raise SpecError(f"Invalid spec: {e}") from e

    @classmethod
    def from_json_file(cls, path: Union[str, Path]) -> "ProblemSpec":
        path = OutputFormats.expect(path, "json")
        if not path.exists():
            raise SpecError(f"Spec file not found: {path}")
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise SpecError(f"Malformed JSON in {path}: {e}") from e
        return cls.from_dict(data)


@dataclass
class ConditionReport:
    """Left-hand sides of the smallness conditions and the predicted regime."""

    lhs_LN: Optional[float] = None
    lhs_Lorentz: Optional[float] = None
    lhs_dual: Optional[float] = None
    regime: Regime = Regime.UNKNOWN
    exact: bool = field(default=False, compare=False)
    notes: List[str] = field(default_factory=list, compare=False)

    def __post_init__(self):
        if isinstance(self.regime, str):
            self.regime = Regime(self.regime)

    @property
    def smallest_lhs(self) -> Optional[float]:
        available = [v for v in (self.lhs_LN, self.lhs_Lorentz, self.lhs_dual) if v is not None]
        return min(available) if available else None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lhs_LN": self.lhs_LN,
            "lhs_Lorentz": self.lhs_Lorentz,
            "lhs_dual": self.lhs_dual,
            "regime": self.regime.value,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ConditionReport":
        try:
            return cls(
                lhs_LN=data.get("lhs_LN"),
                lhs_Lorentz=data.get("lhs_Lorentz"),
                lhs_dual=data.get("lhs_dual"),
                regime=data["regime"],
            )
        except (KeyError, ValueError) as e:
            raise SpecError(f"Invalid condition report: {e}") from e
