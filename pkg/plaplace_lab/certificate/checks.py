"""
Checks of a candidate (u, z, s) for −div(z) = λs/|x| + f with ‖z‖_∞ ≤ 1,
(z, DT_k u) = |DT_k u| and [z, ν] ∈ Sgn(−u) on the boundary.

Radial certificates are integrated against off-center bumps in polar-axial
coordinates (r, θ), θ the angle to the bump's center, with weight
|S^{N−2}| r^{N−1} sin^{N−2}θ. Grid certificates use the centroid rule of
their triangulation.
"""

import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

from .models import (
    Bump,
    Certificate,
    CertificateTolerances,
    CertificateVerdict,
    CheckVerdict,
    GridCertificate,
    TestFunctionFamily,
    axial_sphere_area,
)
from ..core.fields import element_gradients, truncate
from ..core.norms import sphere_area
from ..problem.models import DomainKind, DomainSpec
from ..utils.exceptions import DomainError, SpecError

logger = logging.getLogger(__name__)

AnyCertificate = Union[Certificate, GridCertificate]

RADIAL_ORDER = 24
CELL_ORDER = 4
ANGULAR_ORDER = 24
ORIGIN_LEVELS = 12
SAMPLE_COUNT = 4096
MEMBERSHIP_TOL = 1e-9
ZERO_TRACE = 1e-9
DEFAULT_K = 10.0
DEFAULT_K_SCHEDULE = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)


def tolerances_for(cert: AnyCertificate, tolerances: Optional[CertificateTolerances] = None) -> CertificateTolerances:
    if tolerances is not None:
        return tolerances
    return CertificateTolerances.numeric() if cert.numeric else CertificateTolerances.closed_form()


def default_family(cert: AnyCertificate) -> TestFunctionFamily:
    if isinstance(cert, GridCertificate):
        grid = cert.grid
        if grid.shape == "disk":
            return TestFunctionFamily.default(2, grid.radius)
        return TestFunctionFamily.for_box(grid.half_widths)
    return TestFunctionFamily.default(cert.N, cert.R)


def _cuts(lo: float, hi: float, extra: Sequence[float]) -> np.ndarray:
    points = [lo, hi] + [x for x in extra if lo < x < hi]
    if lo == 0:
        points += [hi * 2.0 ** (-j) for j in range(1, ORIGIN_LEVELS + 1)]
    return np.unique(np.asarray(points, dtype=float))


def _radial_nodes(cuts: np.ndarray, order: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(order)
    a, b = cuts[:-1, None], cuts[1:, None]
    r = a + 0.5 * (b - a) * (x[None, :] + 1.0)
    weights = 0.5 * (b - a) * w[None, :]
    return r.ravel(), weights.ravel()


def _order(cert: Certificate) -> int:
    return CELL_ORDER if len(cert.breakpoints) > 64 else RADIAL_ORDER


def polar_quadrature(cert: Certificate, bump: Bump, extra: Sequence[float] = ()) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Points (r, cos θ) and volume weights covering the support of a bump."""
    c, rho = bump.offset, bump.radius
    lo, hi = max(0.0, c - rho), min(cert.R, c + rho)
    cuts = _cuts(lo, hi, list(cert.breakpoints) + list(extra) + [abs(c - rho)])
    r, wr = _radial_nodes(cuts, _order(cert))

    if c == 0:
        theta_max = np.full(r.shape, math.pi)
    else:
        kappa = (r * r + c * c - rho * rho) / (2.0 * r * c)
        theta_max = np.arccos(np.clip(kappa, -1.0, 1.0))
    x, w = leggauss(ANGULAR_ORDER)
    theta = theta_max[:, None] * 0.5 * (x[None, :] + 1.0)
    wt = theta_max[:, None] * 0.5 * w[None, :]
    weight = axial_sphere_area(cert.N) * (r ** (cert.N - 1) * wr)[:, None] * np.sin(theta) ** (cert.N - 2) * wt
    rr = np.broadcast_to(r[:, None], theta.shape)
    return rr.ravel(), np.cos(theta).ravel(), weight.ravel()


def _bump_polar(bump: Bump, r: np.ndarray, cos_t: np.ndarray):
    """φ, x̂·∇φ and |∇φ| at polar-axial points."""
    c, rho = bump.offset, bump.radius
    d2 = np.maximum(r * r + c * c - 2.0 * r * c * cos_t, 0.0)
    w = np.clip(1.0 - d2 / rho ** 2, 0.0, None)
    phi = w ** 3
    radial = -6.0 * w ** 2 * (r - c * cos_t) / rho ** 2
    magnitude = 6.0 * w ** 2 * np.sqrt(d2) / rho ** 2
    return phi, radial, magnitude


def _grid_elements(cert: GridCertificate):
    grid = cert.grid
    interp, areas, radii = grid.quadrature
    centroids = grid.centroids
    s = interp @ cert.s.ravel()
    with np.errstate(divide="ignore"):
        source = cert.lam * s / radii + cert.f(radii)
    return centroids[:, 0], centroids[:, 1], areas, source


def _sample_radii(cert: Certificate) -> np.ndarray:
    fine = cert.R * ((np.arange(SAMPLE_COUNT) + 0.5) / SAMPLE_COUNT) ** 2
    edges = np.unique(np.concatenate([[0.0], [b for b in cert.breakpoints if 0 < b < cert.R], [cert.R]]))
    return np.concatenate([fine, 0.5 * (edges[:-1] + edges[1:]), [cert.R]])


def check_sup(cert: AnyCertificate, tolerances: Optional[CertificateTolerances] = None) -> CheckVerdict:
    """‖z‖_∞ ≤ 1 + tol."""
    tol = tolerances_for(cert, tolerances).sup
    if isinstance(cert, GridCertificate):
        sup = cert.z.sup_norm()
    else:
        sup = float(np.max(np.abs(cert.z(_sample_radii(cert)))))
    excess = max(sup - 1.0, 0.0)
    return CheckVerdict("sup", excess <= tol, excess, tol, f"sup |z| = {sup:.12g}")


def _membership_violation(u: np.ndarray, s: np.ndarray) -> float:
    """Largest distance of s from Sgn(u)."""
    target = np.where(u > 0, 1.0 - s, np.where(u < 0, s + 1.0, np.abs(s) - 1.0))
    violation = np.where(u != 0, np.abs(target), np.maximum(target, 0.0))
    return float(violation.max()) if violation.size else 0.0


def distributional_defects(cert: AnyCertificate, family: Optional[TestFunctionFamily] = None) -> List[float]:
    """|∫z·∇φ − ∫(λs/|x| + f)φ| / ∫|∇φ| for each bump."""
    family = family or default_family(cert)
    defects = []
    if isinstance(cert, GridCertificate):
        x, y, areas, source = _grid_elements(cert)
        for bump in family:
            phi = bump.value(x, y)
            gx, gy = bump.gradient(x, y)
            flux_term = np.dot(areas, cert.z.components[:, 0] * gx + cert.z.components[:, 1] * gy)
            load_term = np.dot(areas, np.where(phi > 0, source * phi, 0.0))
            norm = np.dot(areas, np.hypot(gx, gy))
            defects.append(abs(flux_term - load_term) / norm if norm > 0 else 0.0)
        return defects

    for bump in family:
        r, cos_t, weight = polar_quadrature(cert, bump)
        phi, radial, magnitude = _bump_polar(bump, r, cos_t)
        flux_term = np.dot(weight, np.asarray(cert.z(r), dtype=float) * radial)
        load_term = np.dot(weight, cert.source(r) * phi)
        norm = np.dot(weight, magnitude)
        defects.append(abs(flux_term - load_term) / norm if norm > 0 else 0.0)
    return defects


def check_distributional(cert: AnyCertificate, family: Optional[TestFunctionFamily] = None,
                         tolerances: Optional[CertificateTolerances] = None) -> CheckVerdict:
    """Weak form of −div z = λs/|x| + f against the bump family, plus s ∈ Sgn(u)."""
    tol = tolerances_for(cert, tolerances).defect
    family = family or default_family(cert)
    defects = distributional_defects(cert, family)
    worst = int(np.argmax(defects))
    defect = float(defects[worst])

    if isinstance(cert, GridCertificate):
        mask = cert.grid.mask
        violation = _membership_violation(cert.u.values[mask], cert.s[mask])
    else:
        r = _sample_radii(cert)
        violation = _membership_violation(cert.u_value(r), np.asarray(cert.s(r), dtype=float))

    passed = defect <= tol and violation <= MEMBERSHIP_TOL
    detail = f"worst bump {worst} at {family.bumps[worst].center}"
    if violation > MEMBERSHIP_TOL:
        detail += f"; s leaves Sgn(u) by {violation:.3g}"
    logger.debug(f"distributional defects: {defects}")
    return CheckVerdict("distributional", passed, max(defect, violation), tol, detail)


def check_pairing(cert: AnyCertificate, k: float = DEFAULT_K,
                  tolerances: Optional[CertificateTolerances] = None) -> CheckVerdict:
    """z·∇T_k u ≥ (1 − tol)|∇T_k u| wherever ∇T_k u does not vanish."""
    if not k > 0:
        raise DomainError(f"truncation level must be positive, got {k}")
    tols = tolerances_for(cert, tolerances)
    if isinstance(cert, GridCertificate):
        g = element_gradients(truncate(cert.u, k))
        magnitude = np.hypot(g[:, 0], g[:, 1])
        aligned = np.sum(cert.z.components * g, axis=1)
    else:
        r = _sample_radii(cert)
        g = cert.truncated_derivative(r, k)
        magnitude = np.abs(g)
        aligned = np.asarray(cert.z(r), dtype=float) * g
    active = magnitude > tols.grad_floor
    if not np.any(active):
        return CheckVerdict("pairing", True, 0.0, tols.pairing, "no cell with nonzero gradient")
    shortfall = float(np.max(1.0 - aligned[active] / magnitude[active]))
    defect = max(shortfall, 0.0)
    return CheckVerdict("pairing", defect <= tols.pairing, defect, tols.pairing,
                        f"{int(active.sum())} active samples, k = {k}")


def check_boundary(cert: AnyCertificate, tolerances: Optional[CertificateTolerances] = None) -> CheckVerdict:
    """[z, ν] ∈ [−1, 1], and [z, ν] = −sign(u) where the trace of u is nonzero."""
    tols = tolerances_for(cert, tolerances)
    if isinstance(cert, GridCertificate):
        grid = cert.grid
        touching = grid.mask.ravel()[grid.triangles].any(axis=1) & ~grid.interior_elements
        magnitude = cert.z.magnitude()[touching]
        excess = float(max(magnitude.max() - 1.0, 0.0)) if magnitude.size else 0.0
        tol = max(tols.boundary, tols.sup)
        return CheckVerdict("boundary", excess <= tol, excess, tol, "u vanishes off the mask")

    trace = cert.trace()
    u_boundary = float(cert.u_value(np.array([cert.R]))[0])
    defect = max(abs(trace) - 1.0, 0.0)
    if abs(u_boundary) > ZERO_TRACE:
        defect = max(defect, abs(trace + math.copysign(1.0, u_boundary)))
    return CheckVerdict("boundary", defect <= tols.boundary, defect, tols.boundary,
                        f"u(R) = {u_boundary:.6g}, [z, nu] = {trace:.6g}")


def pairing_action(cert: AnyCertificate, k: float, bump: Bump) -> float:
    """⟨(z, DT_k u), φ⟩ = ∫T_k(u)φ(λs/|x| + f) − ∫T_k(u) z·∇φ."""
    if not k > 0:
        raise DomainError(f"truncation level must be positive, got {k}")
    if isinstance(cert, GridCertificate):
        x, y, areas, source = _grid_elements(cert)
        interp = cert.grid.quadrature[0]
        tk = interp @ np.clip(cert.u.flat, -k, k)
        phi = bump.value(x, y)
        gx, gy = bump.gradient(x, y)
        load = np.where(phi > 0, source * phi, 0.0)
        z_dot = cert.z.components[:, 0] * gx + cert.z.components[:, 1] * gy
        return float(np.dot(areas, tk * (load - z_dot)))

    r, cos_t, weight = polar_quadrature(cert, bump, extra=cert.truncation_radii(k))
    phi, radial, _ = _bump_polar(bump, r, cos_t)
    tk = cert.truncated(r, k)
    integrand = tk * (cert.source(r) * phi - np.asarray(cert.z(r), dtype=float) * radial)
    return float(np.dot(weight, integrand))


def truncated_total_variation(cert: AnyCertificate, k: float) -> float:
    """∫_Ω |∇T_k u|."""
    if isinstance(cert, GridCertificate):
        g = element_gradients(truncate(cert.u, k))
        return float(np.dot(cert.grid.element_measures, np.hypot(g[:, 0], g[:, 1])))
    cuts = _cuts(0.0, cert.R, list(cert.breakpoints) + cert.truncation_radii(k))
    r, w = _radial_nodes(cuts, _order(cert))
    return float(sphere_area(cert.N) * np.dot(w, r ** (cert.N - 1) * np.abs(cert.truncated_derivative(r, k))))


def pairing_truncation_convergence(cert: AnyCertificate, k_schedule: Sequence[float] = DEFAULT_K_SCHEDULE,
                                   family: Optional[TestFunctionFamily] = None,
                                   tolerances: Optional[CertificateTolerances] = None) -> List[Dict[str, object]]:
    """Pairing actions along increasing truncation levels, one trace per bump."""
    levels = [float(k) for k in k_schedule]
    if len(levels) < 2 or any(b <= a for a, b in zip(levels, levels[1:])) or levels[0] <= 0:
        raise DomainError(f"truncation schedule must be positive and strictly increasing, got {k_schedule}")
    tol = tolerances_for(cert, tolerances).truncation
    family = family or default_family(cert)
    traces = []
    for bump in family:
        values = [pairing_action(cert, k, bump) for k in levels]
        differences = [abs(b - a) for a, b in zip(values, values[1:])]
        monotone = all(d2 <= d1 + 1e-12 for d1, d2 in zip(differences, differences[1:]))
        traces.append({
            "center": list(bump.center),
            "radius": bump.radius,
            "k": levels,
            "values": values,
            "differences": differences,
            "monotone": monotone,
            "converged": differences[-1] < tol,
        })
    return traces


def _five_point(func: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: np.ndarray) -> np.ndarray:
    return (-func(x + 2 * h) + 8 * func(x + h) - 8 * func(x - h) + func(x - 2 * h)) / (12 * h)


def gauss_green_check(z, u, domain: DomainSpec, N: int = 2) -> float:
    """|∫u div z + ∫z·∇u − ∫_∂Ω [z, ν]u| under the module's quadrature.

    On balls, disks and annuli z and u are radial callables (z the radial
    component); on boxes they take (x, y), z returning its two components.
    """
    if domain.kind is DomainKind.BOX:
        return _gauss_green_box(z, u, domain.half_widths)
    if domain.kind is DomainKind.DISK and N != 2:
        raise SpecError("disks are two-dimensional")
    lo, R = domain.r_inner, domain.R
    cuts = _cuts(lo, R, [])
    r, w = _radial_nodes(cuts, RADIAL_ORDER)
    h = 1e-3 * r
    m = N - 1

    def weighted_z(x):
        return x ** m * np.asarray(z(x), dtype=float)

    div_z = _five_point(weighted_z, r, h) / r ** m
    grad_u = _five_point(lambda x: np.asarray(u(x), dtype=float), r, h)
    interior = sphere_area(N) * np.dot(w, r ** m * (np.asarray(u(r), dtype=float) * div_z
                                                      + np.asarray(z(r), dtype=float) * grad_u))

    def shell(radius):
        point = np.array([radius])
        return sphere_area(N) * radius ** m * float(np.asarray(z(point), dtype=float)[0] * np.asarray(u(point), dtype=float)[0])

    boundary_term = shell(R) - (shell(lo) if lo > 0 else 0.0)
    return abs(interior - boundary_term)


def _gauss_green_box(z, u, half_widths: Tuple[float, float]) -> float:
    a, b = half_widths
    x, w = leggauss(32)
    X, Y = np.meshgrid(a * x, b * x, indexing="ij")
    W = np.outer(a * w, b * w)
    h = 1e-5 * max(a, b)
    zx, zy = z(X, Y)
    div_z = ((z(X + h, Y)[0] - z(X - h, Y)[0]) + (z(X, Y + h)[1] - z(X, Y - h)[1])) / (2 * h)
    ux = (u(X + h, Y) - u(X - h, Y)) / (2 * h)
    uy = (u(X, Y + h) - u(X, Y - h)) / (2 * h)
    interior = np.sum(W * (u(X, Y) * div_z + np.asarray(zx) * ux + np.asarray(zy) * uy))

    ex, ey = a * x, b * x
    right = np.dot(b * w, z(np.full_like(ey, a), ey)[0] * u(np.full_like(ey, a), ey))
    left = -np.dot(b * w, z(np.full_like(ey, -a), ey)[0] * u(np.full_like(ey, -a), ey))
    top = np.dot(a * w, z(ex, np.full_like(ex, b))[1] * u(ex, np.full_like(ex, b)))
    bottom = -np.dot(a * w, z(ex, np.full_like(ex, -b))[1] * u(ex, np.full_like(ex, -b)))
    return float(abs(interior - (right + left + top + bottom)))


def verify_certificate(cert: AnyCertificate, family: Optional[TestFunctionFamily] = None,
                       tolerances: Optional[CertificateTolerances] = None, k: float = DEFAULT_K) -> CertificateVerdict:
    """Run the sup, distributional, pairing and boundary checks."""
    tols = tolerances_for(cert, tolerances)
    family = family or default_family(cert)
    checks = [
        check_sup(cert, tols),
        check_distributional(cert, family, tols),
        check_pairing(cert, k, tols),
        check_boundary(cert, tols),
    ]
    verdict = CertificateVerdict({c.name: c for c in checks}, certificate=cert.to_dict())
    if verdict.all_passed:
        logger.info(f"certificate {cert.name or '?'} accepted")
    else:
        logger.info(f"certificate {cert.name or '?'} rejected by {', '.join(verdict.failing)}")
    return verdict
