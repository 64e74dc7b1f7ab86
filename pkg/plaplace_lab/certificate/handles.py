"""
Named closed-form certificates, certificates assembled from computed fields,
and the three perturbations that each target one of the checks.
"""

import logging
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Sequence, Union

import numpy as np

from .models import Certificate, GridCertificate
from ..core.fields import (
    RadialField,
    RadialGrid,
    VectorField,
    gradient_radial,
    load_radial_field_csv,
    load_radial_vector_csv,
    make_radial_grid,
)
from ..problem.conditions import step_datum_delta_bound
from ..problem.models import ProblemSpec, SourceSpec
from ..solvers.models import ObservedRegime, SweepRecord
from ..solvers.psweep import detect_regime, extract_flux_limit
from ..solvers.radial import ClosedForm
from ..utils.exceptions import DomainError, SpecError
from ..utils.formats import OutputFormats, read_json

logger = logging.getLogger(__name__)

AnyCertificate = Union[Certificate, GridCertificate]


def _constant(value: float) -> Callable[[np.ndarray], np.ndarray]:
    def func(r):
        return np.full(np.shape(r), float(value))
    return func


def _from_closed_form(form: ClosedForm, name: str, parameters: Dict[str, Any]) -> Certificate:
    spec = form.problem_spec()
    return Certificate(
        N=form.N,
        lam=spec.lam,
        f=spec.f,
        u=form.value,
        du=form.derivative,
        z=form.flux,
        s=_constant(1.0),
        name=name,
        parameters=parameters,
    )


def cone(N: int, alpha: float = 0.0) -> Certificate:
    """u = 1 − |x|, z = −x/|x|, s ≡ 1, λ = α(N−1), f = (1−α)(N−1)/|x| on B_1."""
    return _from_closed_form(ClosedForm.extreme_pair(N, alpha), "cone", {"N": N, "alpha": alpha})


def singular_power(N: int, alpha: float) -> Certificate:
    """u = |x|^{−α} − 1, z = −x/|x|, s ≡ 1, λ = N − 1, f = 0 on B_1."""
    return _from_closed_form(ClosedForm.singular_family(N, alpha), "singular_power", {"N": N, "alpha": alpha})


def hardy_line_limit(N: int, a: float, lam: float) -> Certificate:
    """Limit of the hardy-line family: 1 − |x| when a = N − 1, otherwise u ≡ 0 with z = −(a/(N−1))x/|x|."""
    if not 0 <= lam < a <= N - 1:
        raise DomainError(f"hardy line needs 0 <= lambda < a <= N - 1, got a={a}, lambda={lam}")
    f = SourceSpec.power(a - lam, 1.0)
    parameters = {"N": N, "a": a, "lambda": lam}
    if a == N - 1:
        return Certificate(N=N, lam=lam, f=f, u=lambda r: 1.0 - np.asarray(r, dtype=float),
                           du=_constant(-1.0), z=_constant(-1.0), s=_constant(1.0),
                           name="hardy_line_limit", parameters=parameters)
    return Certificate(N=N, lam=lam, f=f, u=_constant(0.0), du=_constant(0.0),
                       z=_constant(-a / (N - 1)), s=_constant(1.0),
                       name="hardy_line_limit", parameters=parameters)


def step_datum_zero(N: int = 3, lam: float = 0.5, a: float = 0.5, delta: Optional[float] = None,
                    continuous_flux: bool = True) -> Certificate:
    """u ≡ 0 for the step datum f = δ on a < |x| < 1.

    z = −κx/|x| on B_a with κ = λ/(N−1); outside, z = −κx/|x| − (δ/N)(|x| − a^N/|x|^{N−1})x/|x|.
    Without the a^N term the normal component of z jumps by δa/N across |x| = a.
    """
    bound = step_datum_delta_bound(N, lam, a)
    if delta is None:
        delta = 0.9 * bound
    if not 0 <= delta <= bound:
        raise DomainError(f"step datum needs 0 <= delta <= {bound}, got {delta}")
    kappa = lam / (N - 1)
    correction = a ** N if continuous_flux else 0.0

    def z(r):
        r = np.asarray(r, dtype=float)
        outer = -kappa - (delta / N) * (r - correction / np.maximum(r, a) ** (N - 1))
        return np.where(r <= a, -kappa, outer)

    return Certificate(
        N=N,
        lam=lam,
        f=SourceSpec.steps([a], [0.0, delta]),
        u=_constant(0.0),
        du=_constant(0.0),
        z=z,
        s=_constant(1.0),
        breakpoints=[a],
        name="step_datum_zero",
        parameters={"N": N, "lambda": lam, "a": a, "delta": delta, "continuous_flux": continuous_flux},
    )


HANDLES: Dict[str, Callable[..., Certificate]] = {
    "cone": cone,
    "step_datum_zero": step_datum_zero,
    "hardy_line_limit": hardy_line_limit,
    "singular_power": singular_power,
}


def from_handle(name: str, **params) -> Certificate:
    """Closed-form certificate by name; "lambda" is accepted for the lam parameter."""
    if name not in HANDLES:
        raise SpecError(f"Unknown certificate handle: {name} (known: {', '.join(sorted(HANDLES))})")
    if "lambda" in params:
        params["lam"] = params.pop("lambda")
    try:
        return HANDLES[name](**params)
    except TypeError as e:
        raise SpecError(f"Invalid parameters for certificate '{name}': {e}") from e


def _cell_lookup(grid: RadialGrid, cellwise: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    def func(r):
        index = np.searchsorted(grid.nodes, np.asarray(r, dtype=float), side="right") - 1
        return cellwise[np.clip(index, 0, grid.M - 1)]
    return func


def certificate_from_fields(u: RadialField, z: VectorField, lam: float, f: SourceSpec,
                            s: float = 1.0, name: str = "fields") -> Certificate:
    """Numeric-tier certificate from a nodal u and a cellwise radial z."""
    if z.layout != "radial" or z.grid != u.grid:
        raise SpecError("u and z must live on the same radial grid")
    if not -1 <= s <= 1:
        raise SpecError(f"s must lie in [-1, 1], got {s}")
    grid = u.grid
    if not grid.is_ball:
        raise SpecError("certificates are checked on balls")
    return Certificate(
        N=grid.N,
        R=grid.R,
        lam=lam,
        f=f,
        u=u,
        du=_cell_lookup(grid, gradient_radial(u)),
        z=_cell_lookup(grid, z.components),
        s=_constant(s),
        breakpoints=list(grid.nodes[1:-1]),
        numeric=True,
        name=name,
        parameters={"M": grid.M, "grading": grid.grading},
    )


def certificate_from_sweep(records: Sequence[SweepRecord], spec: ProblemSpec) -> AnyCertificate:
    """Limit field, flux at the smallest p and s ≡ 1, as a numeric-tier certificate.

    A vanishing sweep contributes u ≡ 0.
    """
    report = detect_regime(records)
    if report.regime_observed is ObservedRegime.BLOWING_UP:
        raise SpecError("sweep blows up; there is no limit field to certify")
    if report.limit_field is None:
        raise SpecError(f"sweep is {report.regime_observed.value}; no limit field")
    flux_limit = extract_flux_limit(records, spec)
    u = report.limit_field
    if report.regime_observed is ObservedRegime.VANISHING:
        u = u.with_values(np.zeros_like(u.values))
    name = f"sweep:{spec.name or 'spec'}"
    logger.info(f"certificate from sweep {name}: regime {report.regime_observed.value}, p = {flux_limit.p}")
    if isinstance(u, RadialField):
        return certificate_from_fields(u, flux_limit.field, spec.lam, spec.f, name=name)
    return GridCertificate(u=u, z=flux_limit.field, s=np.ones(u.values.shape), lam=spec.lam, f=spec.f, name=name)


def scale_z(cert: AnyCertificate, factor: float = 1.1) -> AnyCertificate:
    """z replaced by factor·z; targets the sup check."""
    label = f"scale_z({factor})"
    if isinstance(cert, GridCertificate):
        return GridCertificate(cert.u, cert.z.scaled(factor), cert.s, cert.lam, cert.f,
                               numeric=cert.numeric, name=cert.name, perturbation=label)
    base = cert.z
    return cert.with_changes(z=lambda r: factor * np.asarray(base(r), dtype=float), perturbation=label)


def flip_s(cert: AnyCertificate) -> AnyCertificate:
    """s set to −1 where u > 0; targets the distributional check."""
    if isinstance(cert, GridCertificate):
        s = np.where(cert.u.values > 0, -1.0, cert.s)
        return GridCertificate(cert.u, cert.z, s, cert.lam, cert.f,
                               numeric=cert.numeric, name=cert.name, perturbation="flip_s")
    base_s, base_u = cert.s, cert.u_value

    def s(r):
        return np.where(base_u(r) > 0, -1.0, np.asarray(base_s(r), dtype=float))

    return cert.with_changes(s=s, perturbation="flip_s")


def boundary(cert: Certificate, u_shift: float = 0.5, normal_trace: float = 1.0) -> Certificate:
    """u shifted by a constant and [z, ν] overridden on ∂Ω; targets the boundary check."""
    if isinstance(cert, GridCertificate):
        raise SpecError("grid certificates vanish on the boundary; the boundary perturbation needs a radial one")
    return cert.with_changes(u_shift=cert.u_shift + u_shift, normal_trace=normal_trace,
                             perturbation=f"boundary({u_shift}, {normal_trace})")


PERTURBATIONS: Dict[str, Callable[..., AnyCertificate]] = {
    "scale_z": scale_z,
    "flip_s": flip_s,
    "boundary": boundary,
}


def perturb(cert: AnyCertificate, kind: str, **params) -> AnyCertificate:
    if kind not in PERTURBATIONS:
        raise SpecError(f"Unknown perturbation: {kind} (known: {', '.join(sorted(PERTURBATIONS))})")
    try:
        return PERTURBATIONS[kind](cert, **params)
    except TypeError as e:
        raise SpecError(f"Invalid parameters for perturbation '{kind}': {e}") from e


def certificate_from_dict(data: Dict[str, Any], base_dir: Optional[Path] = None) -> AnyCertificate:
    """Build a certificate from its JSON form: a handle with parameters, or field files.

    Field file paths are resolved against base_dir.
    """
    if not isinstance(data, dict):
        raise SpecError("certificate must be a JSON object")
    allowed = {"handle", "params", "fields", "N", "R", "M", "grading", "lambda", "f", "s", "perturbation", "name"}
    unknown = set(data) - allowed
    if unknown:
        raise SpecError(f"Unknown certificate fields: {sorted(unknown)}")
    if ("handle" in data) == ("fields" in data):
        raise SpecError("certificate needs exactly one of 'handle' or 'fields'")

    if "handle" in data:
        cert: AnyCertificate = from_handle(data["handle"], **data.get("params", {}))
    else:
        cert = _certificate_from_files(data, base_dir or Path("."))

    perturbation = data.get("perturbation")
    if perturbation:
        if not isinstance(perturbation, dict) or "kind" not in perturbation:
            raise SpecError("perturbation must be an object with a 'kind' field")
        params = {k: v for k, v in perturbation.items() if k != "kind"}
        cert = perturb(cert, perturbation["kind"], **params)
    return cert


def _certificate_from_files(data: Dict[str, Any], base_dir: Path) -> Certificate:
    fields = data["fields"]
    if not isinstance(fields, dict) or set(fields) != {"u", "z"}:
        raise SpecError("'fields' must name exactly the files 'u' and 'z'")
    for key in ("N", "lambda", "f"):
        if key not in data:
            raise SpecError(f"field certificate is missing '{key}'")
    try:
        grid = make_radial_grid(int(data["N"]), float(data.get("R", 1.0)),
                                M=int(data.get("M", 512)), grading=float(data.get("grading", 2.0)))
    except DomainError as e:
        raise SpecError(f"Invalid certificate grid: {e}") from e
    u = load_radial_field_csv(OutputFormats.expect(base_dir / fields["u"], "csv"), grid)
    z = load_radial_vector_csv(OutputFormats.expect(base_dir / fields["z"], "csv"), grid)
    return certificate_from_fields(u, z, float(data["lambda"]), SourceSpec.from_dict(data["f"]),
                                   s=float(data.get("s", 1.0)), name=data.get("name", "fields"))


def load_certificate(path) -> AnyCertificate:
    path = OutputFormats.expect(path, "json")
    return certificate_from_dict(read_json(path), base_dir=path.parent)
