"""
Command-line interface for the p-Laplacian / Hardy-potential laboratory.

Reports go to stdout as JSON; status lines go to stderr. Exit codes:
0 ok, 1 verification failure, 2 bad input, 3 non-convergence,
4 coercivity lost, 130 interrupted.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from colorama import Fore, Style, just_fix_windows_console

from . import __version__
from .certificate import (
    certificate_from_sweep,
    load_certificate,
    pairing_truncation_convergence,
    verify_certificate,
)
from .certificate.models import CertificateTolerances
from .config import ConfigManager, create_sample_config, get_config_manager
from .core.fields import flux, save_field_csv, save_vector_field_csv
from .core.norms import gamma_constant, hardy_multiplier, sobolev_constant
from .problem import ProblemSpec, evaluate_conditions
from .solvers import (
    MinimizeSettings,
    NewtonSettings,
    SweepSchedule,
    SweepSettings,
    bound_trace,
    check_admissible,
    detect_regime,
    extract_flux_limit,
    limit_constant,
    minimize,
    n_continuation,
    result_from_field,
    run_sweep,
    solve_radial_bvp,
)
from .solvers.models import SWEEP_COLUMNS
from .utils.exceptions import (
    CoercivityLostError,
    ConvergenceError,
    HypothesisError,
    LabError,
    SpecError,
)
from .utils.formats import dumps_json, write_csv, write_json

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_BAD_INPUT = 2
EXIT_NOT_CONVERGED = 3
EXIT_COERCIVITY_LOST = 4
EXIT_INTERRUPTED = 130

VERSION_HEADER = f"p-laplace-hardy-lab {__version__}"

COLORS = {
    "red": Fore.RED,
    "green": Fore.GREEN,
    "yellow": Fore.YELLOW,
    "blue": Fore.BLUE,
    "cyan": Fore.CYAN,
}


def print_colored(text: str, color: str = "white", config=None):
    """Print a status line to stderr, colored if enabled."""
    colored = config.colored_output if config is not None else True
    if colored and color in COLORS:
        text = f"{COLORS[color]}{text}{Style.RESET_ALL}"
    print(text, file=sys.stderr)


def emit(data):
    """Print a JSON report to stdout."""
    print(dumps_json(data))


def _grid_for(spec: ProblemSpec, config):
    return spec.make_grid(
        M=spec.domain.M or config.grid.radial_cells,
        grading=spec.domain.grading or config.grid.grading,
        n=spec.domain.n or config.grid.cartesian_cells,
    )


def check_command(args, config_manager=None):
    """Smallness conditions and predicted regime of a spec."""
    spec = ProblemSpec.from_json_file(args.spec)
    report = evaluate_conditions(spec)
    emit(report.to_dict())
    return EXIT_OK


def solve_command(args, config_manager=None):
    """Solve at one exponent; writes the result JSON, the field and its flux."""
    config_manager = config_manager or get_config_manager()
    config = config_manager.get_config()
    spec = ProblemSpec.from_json_file(args.spec)
    p = args.p
    check_admissible(spec, p)
    grid = _grid_for(spec, config)
    minimize_settings = MinimizeSettings.from_config(config.solver)

    method = args.method
    if method == "auto":
        method = "newton" if spec.domain.is_radial and args.n is None else "descent"
    if method == "newton":
        if not spec.domain.is_radial:
            raise SpecError("the Newton solver needs a ball or annulus")
        u = solve_radial_bvp(spec, p, NewtonSettings.from_config(config.solver), grid=grid)
        result = result_from_field(u, spec, p, minimize_settings)
    elif args.n is not None:
        result = minimize(spec, p, args.n, minimize_settings, grid=grid)
    else:
        result = n_continuation(spec, p, minimize_settings, grid=grid)

    data = result.to_dict()
    data["spec"] = spec.to_dict()
    data["method"] = method
    if args.out:
        out = Path(args.out)
        save_field_csv(result.field, out / "u.csv", comment=VERSION_HEADER)
        save_vector_field_csv(flux(result.field, p), out / "flux.csv", comment=VERSION_HEADER)
        write_json(out / "solve.json", data)
        print_colored(f"Wrote {out / 'solve.json'}, u.csv and flux.csv", "green", config)
    emit(data)

    if not result.converged:
        print_colored(f"Solver did not converge: {result.message}", "yellow", config)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def sweep_command(args, config_manager=None):
    """Continuation p → 1⁺ with regime detection."""
    config_manager = config_manager or get_config_manager()
    config = config_manager.get_config()
    spec = ProblemSpec.from_json_file(args.spec)
    schedule = SweepSchedule.parse(args.schedule) if args.schedule else SweepSchedule(config.sweep.schedule)
    settings = SweepSettings.from_config(config)
    records = run_sweep(spec, schedule, settings, grid=_grid_for(spec, config))

    data = {
        "spec": spec.to_dict(),
        "schedule": schedule.p_values,
        "records": [r.to_dict() for r in records],
    }
    report = detect_regime(records) if len(records) >= 3 else None
    data["report"] = report.to_dict() if report else None

    try:
        data["bound_trace"] = bound_trace(records, spec)
    except HypothesisError as e:
        data["bound_trace"] = None
        data["bound_trace_message"] = str(e)

    flux_limit = None
    try:
        flux_limit = extract_flux_limit(records, spec)
        data["flux_limit"] = {"p": flux_limit.p, "sup": flux_limit.field.sup_norm(),
                              "within_bound": flux_limit.within_bound, "sup_trace": flux_limit.sup_trace}
    except SpecError as e:
        data["flux_limit"] = None
        logger.warning(f"no flux limit: {e}")

    if args.certify and report is not None:
        try:
            cert = certificate_from_sweep(records, spec)
            tolerances = CertificateTolerances.from_config(config.certificate, numeric=True)
            data["certificate"] = verify_certificate(cert, tolerances=tolerances).to_dict()
        except SpecError as e:
            data["certificate"] = None
            data["certificate_message"] = str(e)

    if args.out:
        out = Path(args.out)
        rows = [r.row() + [r.converged] for r in records]
        write_csv(out / "sweep.csv", list(SWEEP_COLUMNS) + ["converged"], rows, comment=VERSION_HEADER)
        if report is not None and report.limit_field is not None:
            save_field_csv(report.limit_field, out / "limit_u.csv", comment=VERSION_HEADER)
        if flux_limit is not None:
            save_vector_field_csv(flux_limit.field, out / "flux_limit.csv", comment=VERSION_HEADER)
        write_json(out / "report.json", data)
        print_colored(f"Wrote {out / 'sweep.csv'} and {out / 'report.json'}", "green", config)
    emit(data)
    return EXIT_OK


def verify_command(args, config_manager=None):
    """Check a certificate; exit 0 iff every check passes."""
    config_manager = config_manager or get_config_manager()
    config = config_manager.get_config()
    cert = load_certificate(args.certificate)
    tolerances = CertificateTolerances.from_config(config.certificate, numeric=cert.numeric)
    verdict = verify_certificate(cert, tolerances=tolerances, k=args.k)
    data = verdict.to_dict()
    if args.truncation:
        data["truncation"] = pairing_truncation_convergence(cert, tolerances=tolerances)
    emit(data)
    if verdict.all_passed:
        print_colored("All checks passed", "green", config)
        return EXIT_OK
    print_colored(f"Failing checks: {', '.join(verdict.failing)}", "red", config)
    return EXIT_VERIFY_FAILED


def constants_command(args, config_manager=None):
    """S_N, γ, the Hardy p-curve and the limit constant."""
    N = args.N
    if N < 2:
        raise SpecError(f"N must be >= 2, got {N}")
    curve = []
    k = 0
    while 1.0 + 0.1 * k < N:
        p = round(1.0 + 0.1 * k, 10)
        curve.append([p, hardy_multiplier(N, p)])
        k += 1
    emit({
        "N": N,
        "S_N": sobolev_constant(N),
        "gamma": gamma_constant(N),
        "hardy_p_curve": curve,
        "limit_constant": limit_constant(N, args.lam).to_dict(),
    })
    return EXIT_OK


def config_command(args, config_manager=None):
    """Show, create or validate the configuration."""
    config_manager = config_manager or get_config_manager()
    config = config_manager.get_config()
    if args.action == "show":
        emit(config_manager.config_summary())
        return EXIT_OK
    if args.action == "create":
        path = create_sample_config(Path(args.file) if args.file else config_manager.config_file)
        print_colored(f"Sample configuration created at: {path}", "green", config)
        return EXIT_OK
    issues = config_manager.validate_config()
    if not issues:
        print_colored("Configuration is valid", "green", config)
        return EXIT_OK
    for issue in issues:
        print_colored(f"  - {issue}", "yellow", config)
    return EXIT_BAD_INPUT


def create_parser():
    """Create the argument parser."""
    parser = argparse.ArgumentParser(
        prog="plaplace-lab",
        description="Numerical lab for the p-Laplacian with a Hardy potential and its p → 1 limit",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  plaplace-lab check sample_specs/cone.json
  plaplace-lab solve sample_specs/torsion_disk_grid.json --p 1.5 --out runs/torsion
  plaplace-lab sweep sample_specs/hardy_line_bounded.json --schedule 1.5,1.2,1.05 --out runs/line
  plaplace-lab verify sample_specs/certificates/cone.json
  plaplace-lab constants --N 2 --lambda 0.5
        """
    )

    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="Configuration file path")
    parser.add_argument("--debug", action="store_true", help="Enable debug logging")
    parser.add_argument("--verbose", "-v", action="store_true", help="Verbose logging")
    parser.add_argument("--no-color", action="store_true", help="Disable colored status lines")

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    check_parser = subparsers.add_parser("check", help="Evaluate the smallness conditions of a spec")
    check_parser.add_argument("spec", help="Problem spec JSON")
    check_parser.set_defaults(func=check_command)

    solve_parser = subparsers.add_parser("solve", help="Solve at one exponent p")
    solve_parser.add_argument("spec", help="Problem spec JSON")
    solve_parser.add_argument("--p", type=float, required=True, help="Exponent, 1 < p < N")
    solve_parser.add_argument("--out", "-o", help="Output directory for solve.json, u.csv and flux.csv")
    solve_parser.add_argument("--method", choices=["auto", "newton", "descent"], default="auto",
                              help="Newton on radial grids, or energy descent (default: auto)")
    solve_parser.add_argument("--n", type=float, help="Fixed truncation level instead of n-continuation")
    solve_parser.set_defaults(func=solve_command)

    sweep_parser = subparsers.add_parser("sweep", help="Continuation p → 1 with regime detection")
    sweep_parser.add_argument("spec", help="Problem spec JSON")
    sweep_parser.add_argument("--schedule", help="Comma-separated decreasing exponents")
    sweep_parser.add_argument("--out", "-o", help="Output directory for sweep.csv and report.json")
    sweep_parser.add_argument("--certify", action="store_true",
                              help="Assemble and check a certificate from the limit")
    sweep_parser.set_defaults(func=sweep_command)

    verify_parser = subparsers.add_parser("verify", help="Check a 1-Laplacian certificate")
    verify_parser.add_argument("certificate", help="Certificate JSON")
    verify_parser.add_argument("--k", type=float, default=10.0, help="Truncation level of the pairing check")
    verify_parser.add_argument("--truncation", action="store_true",
                               help="Also report pairing traces along k = 1, 2, ..., 64")
    verify_parser.set_defaults(func=verify_command)

    constants_parser = subparsers.add_parser("constants", help="Sobolev, Lorentz and Hardy constants")
    constants_parser.add_argument("--N", type=int, required=True, help="Dimension")
    constants_parser.add_argument("--lambda", dest="lam", type=float, default=0.0,
                                  help="λ for the limit constant, 0 <= λ < N - 1")
    constants_parser.set_defaults(func=constants_command)

    config_parser = subparsers.add_parser("config", help="Manage configuration")
    config_parser.add_argument("action", choices=["show", "create", "validate"], help="Configuration action")
    config_parser.add_argument("--file", help="Configuration file path")
    config_parser.set_defaults(func=config_command)

    return parser


def exit_code_for(error: LabError) -> int:
    if isinstance(error, ConvergenceError):
        return EXIT_NOT_CONVERGED
    if isinstance(error, CoercivityLostError):
        return EXIT_COERCIVITY_LOST
    return EXIT_BAD_INPUT


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point."""
    # ANSI colors on Windows consoles; a no-op elsewhere
    just_fix_windows_console()
    parser = create_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_BAD_INPUT

    config = None
    try:
        config_manager = ConfigManager(Path(args.config)) if args.config else get_config_manager()
        config = config_manager.get_config()
        if args.debug:
            config.debug = True
        if args.verbose:
            config.verbose = True
        if args.no_color:
            config.colored_output = False
        config_manager.setup_logging()

        return args.func(args, config_manager)

    except KeyboardInterrupt:
        print_colored("\nOperation cancelled by user", "yellow", config)
        return EXIT_INTERRUPTED
    except LabError as e:
        code = exit_code_for(e)
        print_colored(f"{type(e).__name__}: {e}", "red", config)
        logger.debug("command failed", exc_info=True)
        return code


if __name__ == "__main__":
    sys.exit(main())
