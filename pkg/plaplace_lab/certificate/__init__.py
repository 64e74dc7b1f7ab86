"""
Certificates for the 1-Laplacian problem −div z = λs/|x| + f and their checks.
"""

from .models import (
    Bump,
    Certificate,
    CertificateTolerances,
    CertificateVerdict,
    CheckVerdict,
    GridCertificate,
    TestFunctionFamily,
)
from .handles import (
    HANDLES,
    cone,
    step_datum_zero,
    hardy_line_limit,
    singular_power,
    from_handle,
    certificate_from_fields,
    certificate_from_sweep,
    scale_z,
    flip_s,
    boundary,
    perturb,
    certificate_from_dict,
    load_certificate,
)
from .checks import (
    check_sup,
    check_distributional,
    check_pairing,
    check_boundary,
    pairing_action,
    pairing_truncation_convergence,
    truncated_total_variation,
    gauss_green_check,
    verify_certificate,
)

__all__ = [
    "Bump",
    "Certificate",
    "CertificateTolerances",
    "CertificateVerdict",
    "CheckVerdict",
    "GridCertificate",
    "TestFunctionFamily",
    "HANDLES",
    "cone",
    "step_datum_zero",
    "hardy_line_limit",
    "singular_power",
    "from_handle",
    "certificate_from_fields",
    "certificate_from_sweep",
    "scale_z",
    "flip_s",
    "boundary",
    "perturb",
    "certificate_from_dict",
    "load_certificate",
    "check_sup",
    "check_distributional",
    "check_pairing",
    "check_boundary",
    "pairing_action",
    "pairing_truncation_convergence",
    "truncated_total_variation",
    "gauss_green_check",
    "verify_certificate",
]
