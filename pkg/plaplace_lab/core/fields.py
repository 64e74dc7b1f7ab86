"""
Discrete geometry and calculus on graded radial grids and masked Cartesian grids.

Radial fields are nodal and piecewise linear in r; cell integrals use exact
shell volumes with the integrand taken at the cell midpoint, so the origin is
never a quadrature point. Cartesian fields are nodal on a uniform grid whose
cells are split into two triangles (forward differences on the lower-left
triangle, backward differences on the upper-right one); integrands are taken
at triangle centroids.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import sparse

from .norms import unit_ball_volume
from ..utils.exceptions import DomainError, FieldError
from ..utils.formats import read_csv, write_csv

logger = logging.getLogger(__name__)

GAUSS_ORDER = 4


@dataclass(frozen=True)
class RadialGrid:
    """Graded grid r_i = r_inner + (R - r_inner)(i/M)^grading on a ball or annulus in R^N."""

    N: int
    R: float
    M: int = 512
    grading: float = 2.0
    r_inner: float = 0.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise DomainError(f"dimension N must be an integer >= 2, got {self.N}")
        if int(self.M) != self.M or self.M < 8:
            raise DomainError(f"radial grids need M >= 8 cells, got {self.M}")
        if not self.grading >= 1:
            raise DomainError(f"grading must be >= 1, got {self.grading}")
        if not 0 <= self.r_inner < self.R:
            raise DomainError(f"need 0 <= r_inner < R, got r_inner={self.r_inner}, R={self.R}")
        object.__setattr__(self, 'N', int(self.N))
        object.__setattr__(self, 'M', int(self.M))

    @property
    def dim(self) -> int:
        return 1

    @property
    def is_ball(self) -> bool:
        return self.r_inner == 0

    @cached_property
    def nodes(self) -> np.ndarray:
        s = (np.arange(self.M + 1) / self.M) ** self.grading
        r = self.r_inner + (self.R - self.r_inner) * s
        r[-1] = self.R
        return r

    @cached_property
    def widths(self) -> np.ndarray:
        return np.diff(self.nodes)

    @cached_property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.nodes[:-1] + self.nodes[1:])

    @cached_property
    def cell_volumes(self) -> np.ndarray:
        r = self.nodes
        return unit_ball_volume(self.N) * (r[1:] ** self.N - r[:-1] ** self.N)

    @property
    def element_measures(self) -> np.ndarray:
        return self.cell_volumes

    @property
    def element_radii(self) -> np.ndarray:
        return self.midpoints

    @cached_property
    def total_measure(self) -> float:
        return unit_ball_volume(self.N) * (self.R ** self.N - self.r_inner ** self.N)

    @property
    def n_nodes(self) -> int:
        return self.M + 1

    @cached_property
    def boundary_nodes(self) -> np.ndarray:
        """Nodes carrying the homogeneous Dirichlet condition."""
        if self.is_ball:
            return np.array([self.M])
        return np.array([0, self.M])

    @cached_property
    def free_nodes(self) -> np.ndarray:
        mask = np.ones(self.n_nodes, dtype=bool)
        mask[self.boundary_nodes] = False
        return np.flatnonzero(mask)

    @cached_property
    def gradient_operators(self) -> List[sparse.csr_matrix]:
        """Cell slopes as a sparse (M x (M+1)) operator."""
        inv = 1.0 / self.widths
        rows = np.repeat(np.arange(self.M), 2)
        cols = np.stack([np.arange(self.M), np.arange(1, self.M + 1)], axis=1).ravel()
        vals = np.stack([-inv, inv], axis=1).ravel()
        return [sparse.csr_matrix((vals, (rows, cols)), shape=(self.M, self.n_nodes))]

    @cached_property
    def quadrature(self) -> Tuple[sparse.csr_matrix, np.ndarray, np.ndarray]:
        """Gauss-Legendre points per cell: (interpolation operator, volume weights, radii)."""
        x, w = leggauss(GAUSS_ORDER)
        t = 0.5 * (x + 1.0)
        r0 = self.nodes[:-1, None]
        dr = self.widths[:, None]
        rho = r0 + t[None, :] * dr
        sigma = self.N * unit_ball_volume(self.N)
        weights = sigma * rho ** (self.N - 1) * dr * (0.5 * w[None, :])
        cells = np.arange(self.M)
        rows = np.arange(self.M * GAUSS_ORDER)
        left = np.repeat(cells, GAUSS_ORDER)
        right = left + 1
        t_rep = np.tile(t, self.M)
        interp = sparse.csr_matrix(
            (np.concatenate([1.0 - t_rep, t_rep]),
             (np.concatenate([rows, rows]), np.concatenate([left, right]))),
            shape=(self.M * GAUSS_ORDER, self.n_nodes),
        )
        return interp, weights.ravel(), rho.ravel()

    def to_dict(self) -> Dict[str, float]:
        return {
            "kind": "radial",
            "N": self.N,
            "R": self.R,
            "M": self.M,
            "grading": self.grading,
            "r_inner": self.r_inner,
        }


@dataclass(frozen=True)
class CartesianGrid:
    """Uniform (n+1)^2 node grid on [-L, L]^2 with a disk or box mask.

    n is even so the origin is a node; no centroid coincides with it.
    """

    L: float
    n: int = 256
    shape: str = "disk"
    radius: float = 1.0
    half_widths: Tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8 or self.n % 2:
            raise DomainError(f"Cartesian grids need an even n >= 8, got {self.n}")
        if self.shape not in ("disk", "box"):
            raise DomainError(f"unknown mask shape: {self.shape}")
        if not self.L > 0:
            raise DomainError(f"half-width L must be positive, got {self.L}")
        if self.shape == "disk" and not 0 < self.radius <= self.L:
            raise DomainError(f"disk radius must lie in (0, L], got {self.radius}")
        if self.shape == "box":
            a, b = self.half_widths
            if not (0 < a <= self.L and 0 < b <= self.L):
                raise DomainError(f"box half-widths must lie in (0, L], got {self.half_widths}")
            object.__setattr__(self, 'half_widths', (float(a), float(b)))
        object.__setattr__(self, 'n', int(self.n))

    N = 2

    @property
    def dim(self) -> int:
        return 2

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.n

    @cached_property
    def coords(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.n + 1)

    @cached_property
    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.coords, self.coords, indexing="ij")

    @cached_property
    def mask(self) -> np.ndarray:
        X, Y = self.mesh
        slack = 1e-12 * self.L
        if self.shape == "disk":
            return np.hypot(X, Y) < self.radius - slack
        a, b = self.half_widths
        return (np.abs(X) < a - slack) & (np.abs(Y) < b - slack)

    @property
    def n_nodes(self) -> int:
        return (self.n + 1) ** 2

    @cached_property
    def free_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.mask.ravel())

    @property
    def origin_index(self) -> Tuple[int, int]:
        return (self.n // 2, self.n // 2)

    @cached_property
    def total_measure(self) -> float:
        if self.shape == "disk":
            return math.pi * self.radius ** 2
        a, b = self.half_widths
        return 4.0 * a * b

    @cached_property
    def triangles(self) -> np.ndarray:
        """Vertex indices (ntri, 3): all lower-left triangles, then all upper-right ones."""
        m = self.n + 1
        i, j = np.meshgrid(np.arange(self.n), np.arange(self.n), indexing="ij")
        i, j = i.ravel(), j.ravel()
        k00 = i * m + j
        k10 = (i + 1) * m + j
        k01 = i * m + j + 1
        k11 = (i + 1) * m + j + 1
        lower = np.stack([k00, k10, k01], axis=1)
        upper = np.stack([k11, k01, k10], axis=1)
        return np.concatenate([lower, upper], axis=0)

    @property
    def n_elements(self) -> int:
        return 2 * self.n * self.n

    @cached_property
    def centroids(self) -> np.ndarray:
        X, Y = self.mesh
        x, y = X.ravel(), Y.ravel()
        tri = self.triangles
        return np.stack([x[tri].mean(axis=1), y[tri].mean(axis=1)], axis=1)

    @cached_property
    def element_radii(self) -> np.ndarray:
        return np.hypot(self.centroids[:, 0], self.centroids[:, 1])

    @cached_property
    def element_measures(self) -> np.ndarray:
        return np.full(self.n_elements, 0.5 * self.h ** 2)

    @cached_property
    def gradient_operators(self) -> List[sparse.csr_matrix]:
        """Per-triangle x and y slopes as two sparse (ntri x nodes) operators."""
        tri = self.triangles
        half = self.n * self.n
        inv = 1.0 / self.h
        rows = np.arange(self.n_elements)
        # lower: v0=(i,j) v1=(i+1,j) v2=(i,j+1); upper: v0=(i+1,j+1) v1=(i,j+1) v2=(i+1,j)
        sign = np.concatenate([np.ones(half), -np.ones(half)])
        dx = sparse.csr_matrix(
            (np.concatenate([sign * inv, -sign * inv]),
             (np.concatenate([rows, rows]), np.concatenate([tri[:, 1], tri[:, 0]]))),
            shape=(self.n_elements, self.n_nodes),
        )
        dy = sparse.csr_matrix(
            (np.concatenate([sign * inv, -sign * inv]),
             (np.concatenate([rows, rows]), np.concatenate([tri[:, 2], tri[:, 0]]))),
            shape=(self.n_elements, self.n_nodes),
        )
        return [dx, dy]

    @cached_property
    def quadrature(self) -> Tuple[sparse.csr_matrix, np.ndarray, np.ndarray]:
        """Centroid rule: (averaging operator, triangle areas, centroid radii)."""
        tri = self.triangles
        rows = np.repeat(np.arange(self.n_elements), 3)
        interp = sparse.csr_matrix(
            (np.full(rows.size, 1.0 / 3.0), (rows, tri.ravel())),
            shape=(self.n_elements, self.n_nodes),
        )
        return interp, self.element_measures, self.element_radii

    @cached_property
    def interior_elements(self) -> np.ndarray:
        """Triangles whose three vertices all lie in the mask."""
        return self.mask.ravel()[self.triangles].all(axis=1)

    def to_dict(self) -> Dict[str, object]:
        data: Dict[str, object] = {"kind": "cartesian", "L": self.L, "n": self.n, "shape": self.shape}
        if self.shape == "disk":
            data["radius"] = self.radius
        else:
            data["half_widths"] = list(self.half_widths)
        return data


Grid = Union[RadialGrid, CartesianGrid]


@dataclass(frozen=True)
class RadialField:
    """Nodal values on a radial grid, interpolated linearly in r."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        if values.size != self.grid.M + 1:
            raise FieldError(f"radial field needs {self.grid.M + 1} values, got {values.size}")
        if not np.all(np.isfinite(values)):
            raise FieldError("radial field values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @classmethod
    def from_function(cls, grid: RadialGrid, func: Callable[[np.ndarray], np.ndarray]) -> "RadialField":
        return cls(grid, func(grid.nodes))

    @classmethod
    def zeros(cls, grid: RadialGrid) -> "RadialField":
        return cls(grid, np.zeros(grid.M + 1))

    @property
    def flat(self) -> np.ndarray:
        return self.values

    def with_values(self, values: np.ndarray) -> "RadialField":
        return RadialField(self.grid, values)

    @property
    def center_value(self) -> float:
        return float(self.values[0])

    def __call__(self, r: np.ndarray) -> np.ndarray:
        return np.interp(r, self.grid.nodes, self.values)


@dataclass(frozen=True)
class GridField2D:
    """Nodal values on a Cartesian grid; zero outside the mask."""

    grid: CartesianGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        shape = (self.grid.n + 1, self.grid.n + 1)
        if values.size != shape[0] * shape[1]:
            raise FieldError(f"grid field needs shape {shape}, got {values.shape}")
        values = values.reshape(shape)
        if not np.all(np.isfinite(values)):
            raise FieldError("grid field values must be finite")
        if np.any(values[~self.grid.mask] != 0):
            raise FieldError("grid field must vanish outside the mask")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @classmethod
    def from_function(cls, grid: CartesianGrid, func: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> "GridField2D":
        X, Y = grid.mesh
        return cls(grid, np.where(grid.mask, func(X, Y), 0.0))

    @classmethod
    def zeros(cls, grid: CartesianGrid) -> "GridField2D":
        return cls(grid, np.zeros((grid.n + 1, grid.n + 1)))

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def with_values(self, values: np.ndarray) -> "GridField2D":
        values = np.asarray(values, dtype=float).reshape(self.values.shape)
        return GridField2D(self.grid, np.where(self.grid.mask, values, 0.0))

    @property
    def center_value(self) -> float:
        return float(self.values[self.grid.origin_index])


Field = Union[RadialField, GridField2D]


@dataclass(frozen=True)
class VectorField:
    """A bounded vector field: radial components per cell, or (x, y) per triangle."""

    grid: Grid
    components: np.ndarray

    def __post_init__(self):
        comps = np.array(self.components, dtype=float)
        if isinstance(self.grid, RadialGrid):
            expected = (self.grid.M,)
        else:
            expected = (self.grid.n_elements, 2)
        if comps.shape != expected:
            raise FieldError(f"vector field needs shape {expected}, got {comps.shape}")
        if not np.all(np.isfinite(comps)):
            raise FieldError("vector field components must be finite")
        object.__setattr__(self, 'components', comps)

    @property
    def layout(self) -> str:
        return "radial" if isinstance(self.grid, RadialGrid) else "triangle"

    def magnitude(self) -> np.ndarray:
        if self.layout == "radial":
            return np.abs(self.components)
        return np.hypot(self.components[:, 0], self.components[:, 1])

    def sup_norm(self) -> float:
        return float(self.magnitude().max()) if self.components.size else 0.0

    def scaled(self, factor: float) -> "VectorField":
        return VectorField(self.grid, factor * self.components)


@dataclass(frozen=True)
class SignInterval:
    """A closed interval [lo, hi] representing a value of the multivalued sign."""

    lo: float
    hi: float

    def contains(self, value: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= value <= self.hi + tol

    def to_tuple(self) -> Tuple[float, float]:
        return (self.lo, self.hi)


def make_radial_grid(N: int, R: float, M: int = 512, grading: float = 2.0,
                     r_inner: float = 0.0) -> RadialGrid:
    return RadialGrid(N=N, R=R, M=M, grading=grading, r_inner=r_inner)


def make_cartesian_grid(shape: str = "disk", radius: float = 1.0,
                        half_widths: Tuple[float, float] = (1.0, 1.0), n: int = 256) -> CartesianGrid:
    """Smallest square box [-L, L]^2 holding the disk or box."""
    if shape == "disk":
        return CartesianGrid(L=radius, n=n, shape="disk", radius=radius)
    a, b = half_widths
    return CartesianGrid(L=max(a, b), n=n, shape="box", half_widths=(a, b))


def weighted_integral(g: np.ndarray, grid: Grid) -> float:
    """∫_Ω g dx for element values g (cell midpoints or triangle centroids)."""
    g = np.asarray(g, dtype=float)
    measures = grid.element_measures
    if g.shape != measures.shape:
        raise FieldError(f"integrand has shape {g.shape}, grid expects {measures.shape}")
    if not np.all(np.isfinite(g)):
        raise FieldError("integrand has non-finite values")
    return float(np.dot(g, measures))


def sample_radial(func: Callable[[np.ndarray], np.ndarray], grid: RadialGrid,
                  rule: str = "midpoint") -> np.ndarray:
    """Cellwise samples of a radial function; 'outer' uses each cell's outer radius."""
    if rule == "midpoint":
        return np.asarray(func(grid.midpoints), dtype=float)
    if rule == "outer":
        return np.asarray(func(grid.nodes[1:]), dtype=float)
    raise DomainError(f"unknown sampling rule: {rule}")


def element_values(u: Field) -> np.ndarray:
    """Interpolant at cell midpoints (radial) or triangle centroids (2D)."""
    if isinstance(u, GridField2D):
        return u.grid.quadrature[0] @ u.flat
    return 0.5 * (u.values[:-1] + u.values[1:])


def gradient_radial(u: RadialField) -> np.ndarray:
    """Exact slope of the interpolant on each cell."""
    return np.diff(u.values) / u.grid.widths


def element_gradients(u: Field) -> np.ndarray:
    """Gradients per element as an (n_elements, dim) array."""
    if isinstance(u, RadialField):
        return gradient_radial(u)[:, None]
    return np.stack([op @ u.flat for op in u.grid.gradient_operators], axis=1)


def gradient_magnitude(u: Field) -> np.ndarray:
    g = element_gradients(u)
    return np.abs(g[:, 0]) if g.shape[1] == 1 else np.hypot(g[:, 0], g[:, 1])


def p_energy(u: Field, p: float) -> float:
    """∫|∇u|^p dx of the interpolant."""
    N = u.grid.N
    if not 1 <= p < N:
        raise DomainError(f"p_energy needs 1 <= p < N, got p={p}, N={N}")
    return weighted_integral(gradient_magnitude(u) ** p, u.grid)


def total_variation(u: Field, interior_only: bool = False) -> float:
    """∫|∇u| of the interpolant (isotropic per triangle in 2D)."""
    magnitude = gradient_magnitude(u)
    if interior_only and isinstance(u, GridField2D):
        magnitude = np.where(u.grid.interior_elements, magnitude, 0.0)
    return weighted_integral(magnitude, u.grid)


def truncate(u: Field, k: float) -> Field:
    """T_k u: nodal values clamped to [-k, k]."""
    if not k > 0:
        raise DomainError(f"truncation level must be positive, got {k}")
    return u.with_values(np.clip(u.values, -k, k))


def sgn_set(s: float) -> SignInterval:
    """The multivalued sign: {1}, [-1, 1] or {-1}."""
    if s > 0:
        return SignInterval(1.0, 1.0)
    if s < 0:
        return SignInterval(-1.0, -1.0)
    return SignInterval(-1.0, 1.0)


def flux(u: Field, p: float) -> VectorField:
    """|∇u|^{p-2}∇u per element, extended by 0 where ∇u = 0."""
    if not p > 1:
        raise DomainError(f"flux needs p > 1, got {p}")
    g = element_gradients(u)
    magnitude = np.sqrt(np.sum(g * g, axis=1))
    scale = np.zeros_like(magnitude)
    positive = magnitude > 0
    scale[positive] = magnitude[positive] ** (p - 2.0)
    q = g * scale[:, None]
    if isinstance(u, RadialField):
        return VectorField(u.grid, q[:, 0])
    return VectorField(u.grid, q)


def lebesgue_norm_of_field(u: Field, q: float) -> float:
    """‖u‖_{L^q} of the interpolant, using element values."""
    values = np.abs(element_values(u))
    return weighted_integral(values ** q, u.grid) ** (1.0 / q)


def save_field_csv(u: Field, path, comment: Optional[str] = None):
    """Write node coordinates and values."""
    if isinstance(u, RadialField):
        rows = zip(u.grid.nodes, u.values)
        return write_csv(path, ["r", "u"], rows, comment=comment)
    X, Y = u.grid.mesh
    rows = zip(X.ravel(), Y.ravel(), u.values.ravel())
    return write_csv(path, ["x", "y", "u"], rows, comment=comment)


def save_vector_field_csv(z: VectorField, path, comment: Optional[str] = None):
    """Write element positions and components."""
    if z.layout == "radial":
        return write_csv(path, ["r_mid", "z_r"], zip(z.grid.midpoints, z.components), comment=comment)
    c = z.grid.centroids
    rows = zip(c[:, 0], c[:, 1], z.components[:, 0], z.components[:, 1])
    return write_csv(path, ["x", "y", "z_x", "z_y"], rows, comment=comment)


def load_radial_field_csv(path, grid: RadialGrid) -> RadialField:
    """Read a radial field written by save_field_csv; nodes must match the grid."""
    header, data = read_csv(path)
    if header[:2] != ["r", "u"]:
        raise FieldError(f"expected columns r,u in {path}, got {header}")
    if data.shape[0] != grid.M + 1 or not np.allclose(data[:, 0], grid.nodes, rtol=1e-12, atol=0):
        raise FieldError(f"nodes in {path} do not match the grid")
    return RadialField(grid, data[:, 1])


def load_radial_vector_csv(path, grid: RadialGrid) -> VectorField:
    header, data = read_csv(path)
    if header[:2] != ["r_mid", "z_r"]:
        raise FieldError(f"expected columns r_mid,z_r in {path}, got {header}")
    if data.shape[0] != grid.M:
        raise FieldError(f"{path} holds {data.shape[0]} cells, grid has {grid.M}")
    return VectorField(grid, data[:, 1])


def field_to_dict(u: Field) -> Dict[str, object]:
    """JSON form: grid descriptor plus the nodal values."""
    return {"grid": u.grid.to_dict(), "values": np.asarray(u.values).tolist()}
