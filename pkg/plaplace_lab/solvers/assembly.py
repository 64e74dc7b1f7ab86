"""
Nodal assembly shared by the radial Newton solver and the energy minimizer.

Power-law pieces of the source (constants, c/r^b, steps, and the frozen-sign
term λ·min(1/r, n)) are integrated exactly against the radial hat functions.
Everything else, including the zero-order Hardy term, goes through the grid's
quadrature, whose points never sit at the origin.
"""

import math
from typing import List, Optional, Tuple

import numpy as np
from scipy import sparse

from ..core.fields import Grid, RadialGrid
from ..core.norms import sphere_area
from ..problem.models import ProblemSpec

INF = math.inf


def signed_power(x: np.ndarray, exponent: float) -> np.ndarray:
    """sign(x)|x|^exponent, with 0 at x = 0."""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.abs(x) ** exponent


def truncated_weight(r, p: float, n: float = INF):
    """W_n = min(1/|x|^p, n); n = inf gives the exact Hardy weight."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        weight = np.minimum(r ** (-p), n)
    if weight.ndim == 0:
        return float(weight)
    return weight


def load_pieces(spec: ProblemSpec, n: float = INF) -> Optional[List[Tuple[float, float, float, float]]]:
    """Total frozen source as (lo, hi, coefficient, exponent) pieces on the radial extent."""
    base = spec.f.power_pieces()
    if base is None:
        return None
    r_lo = spec.domain.r_inner
    r_hi = spec.domain.R
    pieces = []
    for lo, hi, coeff, exponent in base:
        lo, hi = max(lo, r_lo), min(hi, r_hi)
        if hi > lo and coeff:
            pieces.append((lo, hi, coeff, exponent))
    lam = spec.sign_lambda
    if lam:
        cap = 1.0 / n if n < INF else 0.0
        if cap > r_lo:
            pieces.append((r_lo, min(cap, r_hi), lam * n, 0.0))
        if max(cap, r_lo) < r_hi:
            pieces.append((max(cap, r_lo), r_hi, lam, 1.0))
    return pieces


def _radial_load(grid: RadialGrid, pieces) -> np.ndarray:
    r0 = grid.nodes[:-1]
    r1 = grid.nodes[1:]
    dr = grid.widths
    sigma = sphere_area(grid.N)
    load = np.zeros(grid.n_nodes)
    for lo, hi, coeff, exponent in pieces:
        x0 = np.clip(lo, r0, r1)
        x1 = np.clip(hi, r0, r1)
        m = grid.N - 1 - exponent
        moment0 = coeff * (x1 ** (m + 1) - x0 ** (m + 1)) / (m + 1)
        moment1 = coeff * (x1 ** (m + 2) - x0 ** (m + 2)) / (m + 2)
        left = sigma * (r1 * moment0 - moment1) / dr
        right = sigma * (moment1 - r0 * moment0) / dr
        load[:-1] += left
        load[1:] += right
    return load


def assemble_load(spec: ProblemSpec, grid: Grid, n: float = INF) -> np.ndarray:
    """F_i = ∫(λ min(1/|x|, n) + f) φ_i dx (the sign part only in sign mode)."""
    if isinstance(grid, RadialGrid):
        pieces = load_pieces(spec, n)
        if pieces is not None:
            return _radial_load(grid, pieces)
    interp, weights, radii = grid.quadrature
    return interp.T @ (weights * spec.total_source(radii, n))


class HardyQuadrature:
    """Quadrature of ∫ W |u|^p and of its first and second variations."""

    def __init__(self, grid: Grid, p: float, n: float = INF):
        self.grid = grid
        self.p = p
        self.n = n
        self.interp, weights, radii = grid.quadrature
        self.weighted = weights * truncated_weight(radii, p, n)

    def energy(self, values: np.ndarray) -> float:
        uq = self.interp @ values
        return float(np.dot(self.weighted, np.abs(uq) ** self.p))

    def vector(self, values: np.ndarray) -> np.ndarray:
        uq = self.interp @ values
        return self.interp.T @ (self.weighted * signed_power(uq, self.p - 1.0))

    def jacobian(self, values: np.ndarray, smoothing: float) -> sparse.csr_matrix:
        uq = self.interp @ values
        diag = self.weighted * (self.p - 1.0) * (uq * uq + smoothing ** 2) ** (0.5 * (self.p - 2.0))
        return (self.interp.T @ sparse.diags(diag) @ self.interp).tocsr()
