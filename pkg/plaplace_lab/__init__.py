"""
p-Laplace Hardy Lab

Numerical laboratory for −Δ_p u = λ|u|^{p−2}u/|x|^p + f with homogeneous
Dirichlet data, the continuation p → 1⁺, and certificates for the limiting
1-Laplacian problem.

License: MIT
"""

__version__ = "1.0.0"
__license__ = "MIT"
__description__ = "p-Laplacian with a Hardy potential: conditions, solvers, sweeps and 1-Laplacian certificates"

from .problem import ProblemSpec, SourceSpec, DomainSpec, evaluate_conditions
from .solvers import (
    solve_radial_bvp,
    minimize,
    n_continuation,
    run_sweep,
    detect_regime,
    limit_constant,
)
from .certificate import verify_certificate, from_handle
from .config import get_config_manager, get_config

__all__ = [
    # Problems and conditions
    "ProblemSpec",
    "SourceSpec",
    "DomainSpec",
    "evaluate_conditions",

    # Solvers
    "solve_radial_bvp",
    "minimize",
    "n_continuation",
    "run_sweep",
    "detect_regime",
    "limit_constant",

    # Certificates
    "verify_certificate",
    "from_handle",

    # Configuration
    "get_config_manager",
    "get_config",

    # Metadata
    "__version__",
    "__license__",
    "__description__",
]
