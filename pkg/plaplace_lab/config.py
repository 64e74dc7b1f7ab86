"""
Configuration management for the p-Laplacian / Hardy-potential laboratory.
"""

import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional

from .solvers.models import DEFAULT_SCHEDULE
from .utils.exceptions import ConfigurationError

logger = logging.getLogger(__name__)


@dataclass
class GridConfig:
    """Default resolutions, used when a spec does not set its own."""

    radial_cells: int = 512
    grading: float = 2.0
    cartesian_cells: int = 256


@dataclass
class SolverConfig:
    """Configuration for the descent and Newton solvers."""

    # Descent
    grad_tol: float = 1e-8
    max_iters: int = 20000
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    n_levels: int = 10
    continuation_tol: float = 1e-6
    smoothing: float = 1e-10

    # Newton
    newton_tol: float = 1e-6
    newton_max_iters: int = 100


@dataclass
class SweepConfig:
    """Configuration for p-sweeps."""

    schedule: List[float] = field(default_factory=lambda: list(DEFAULT_SCHEDULE))
    cross_check: bool = False
    cross_check_p_min: float = 1.3


@dataclass
class CertificateConfig:
    """Pass thresholds for certificate checks, closed-form and numeric tiers."""

    closed_form_defect_tol: float = 1e-3
    closed_form_sup_tol: float = 1e-9
    closed_form_pairing_tol: float = 1e-6

    numeric_defect_tol: float = 5e-2
    numeric_sup_tol: float = 0.02
    numeric_pairing_tol: float = 0.05

    boundary_tol: float = 1e-6
    truncation_tol: float = 1e-4


@dataclass
class LabConfig:
    """Main laboratory configuration."""

    # General settings
    debug: bool = False
    verbose: bool = False
    log_level: str = "WARNING"
    log_file: Optional[str] = None

    # UI settings
    show_progress: bool = False
    colored_output: bool = True

    # Component configurations
    grid: GridConfig = field(default_factory=GridConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    certificate: CertificateConfig = field(default_factory=CertificateConfig)

    config_file: Optional[str] = None


SECTIONS = ("grid", "solver", "sweep", "certificate")


class ConfigManager:
    """Loads, validates and saves the laboratory configuration."""

    def __init__(self, config_file: Optional[Path] = None):
        """
        Initialize configuration manager.

        Args:
            config_file: Path to configuration file; an explicit path must exist
        """
        if config_file is not None and not Path(config_file).exists():
            raise ConfigurationError(f"Configuration file not found: {config_file}")
        self.config_file = Path(config_file) if config_file else self._get_default_config_file()
        self.config = LabConfig()
        self._load_configuration()

    def _get_default_config_file(self) -> Path:
        """Get default configuration file location."""
        possible_locations = [
            Path.cwd() / "plaplace_lab_config.json",
            Path.home() / ".config" / "plaplace-lab" / "config.json",
        ]

        for location in possible_locations:
            if location.exists():
                return location

        return possible_locations[0]

    def _load_configuration(self):
        if self.config_file.exists():
            self._load_from_file()
            logger.info(f"Loaded configuration from {self.config_file}")
        self.config.config_file = str(self.config_file)

    def _load_from_file(self):
        """Load configuration from JSON file."""
        try:
            with open(self.config_file, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigurationError(f"Cannot read configuration {self.config_file}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigurationError(f"Configuration {self.config_file} must hold a JSON object")
        self.apply(data)

    def apply(self, data: Dict[str, Any]):
        """Merge known keys section by section; unknown keys are reported and skipped."""
        for section in SECTIONS:
            if section not in data:
                continue
            values = data[section]
            if not isinstance(values, dict):
                raise ConfigurationError(f"Configuration section '{section}' must be an object")
            section_obj = getattr(self.config, section)
            for key, value in values.items():
                if hasattr(section_obj, key):
                    setattr(section_obj, key, value)
                else:
                    logger.warning(f"Unknown configuration key: {section}.{key}")

        top_level = {f.name for f in fields(LabConfig)} - set(SECTIONS) - {"config_file"}
        for key, value in data.items():
            if key in SECTIONS:
                continue
            if key in top_level:
                setattr(self.config, key, value)
            else:
                logger.warning(f"Unknown configuration key: {key}")

    def save_config(self, path: Optional[Path] = None):
        """Save current configuration to file."""
        target = Path(path) if path else self.config_file
        config_dict = asdict(self.config)
        config_dict.pop('config_file', None)
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, 'w', encoding='utf-8') as f:
            json.dump(config_dict, f, indent=2)
        logger.info(f"Configuration saved to {target}")

    def get_config(self) -> LabConfig:
        return self.config

    def update_config(self, **kwargs):
        """Update top-level configuration fields."""
        for key, value in kwargs.items():
            if hasattr(self.config, key):
                setattr(self.config, key, value)
            else:
                logger.warning(f"Unknown configuration key: {key}")

    def validate_config(self) -> List[str]:
        """Validate configuration and return human-readable issues."""
        issues = []
        c = self.config

        if int(c.grid.radial_cells) != c.grid.radial_cells or c.grid.radial_cells < 8:
            issues.append("grid.radial_cells must be an integer >= 8")
        if c.grid.grading < 1:
            issues.append("grid.grading must be >= 1")
        if c.grid.cartesian_cells < 8 or c.grid.cartesian_cells % 2:
            issues.append("grid.cartesian_cells must be an even integer >= 8")

        s = c.solver
        for name in ("grad_tol", "continuation_tol", "newton_tol"):
            if not getattr(s, name) > 0:
                issues.append(f"solver.{name} must be positive")
        if not 0 < s.armijo_c < 1:
            issues.append("solver.armijo_c must lie in (0, 1)")
        if not 0 < s.backtrack < 1:
            issues.append("solver.backtrack must lie in (0, 1)")
        for name in ("max_iters", "n_levels", "newton_max_iters"):
            if getattr(s, name) < 1:
                issues.append(f"solver.{name} must be >= 1")
        if s.smoothing < 0:
            issues.append("solver.smoothing must be >= 0")

        schedule = c.sweep.schedule
        if not schedule or any(p <= 1 for p in schedule) or any(b >= a for a, b in zip(schedule, schedule[1:])):
            issues.append("sweep.schedule must be strictly decreasing with every p > 1")
        if c.sweep.cross_check_p_min <= 1:
            issues.append("sweep.cross_check_p_min must be > 1")

        for f in fields(CertificateConfig):
            if not getattr(c.certificate, f.name) > 0:
                issues.append(f"certificate.{f.name} must be positive")

        valid_log_levels = ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']
        if str(c.log_level).upper() not in valid_log_levels:
            issues.append(f"Invalid log level: {c.log_level}")

        return issues

    def setup_logging(self):
        """Set up logging based on configuration."""
        if self.config.debug:
            log_level = logging.DEBUG
        elif self.config.verbose:
            log_level = logging.INFO
        else:
            log_level = getattr(logging, str(self.config.log_level).upper(), logging.WARNING)

        log_format = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        handlers: List[logging.Handler] = [logging.StreamHandler()]
        if self.config.log_file:
            handlers.append(logging.FileHandler(self.config.log_file, mode='a', encoding='utf-8'))
        logging.basicConfig(level=log_level, format=log_format, handlers=handlers, force=True)

    def config_summary(self) -> Dict[str, Any]:
        """Current configuration as a plain dictionary."""
        summary = asdict(self.config)
        summary["config_file"] = str(self.config_file)
        return summary


# Global configuration instance
_config_manager: Optional[ConfigManager] = None


def get_config_manager(config_file: Optional[Path] = None) -> ConfigManager:
    """Get global configuration manager instance; an explicit file replaces it."""
    global _config_manager
    if _config_manager is None or config_file is not None:
        _config_manager = ConfigManager(config_file)
    return _config_manager


def get_config() -> LabConfig:
    return get_config_manager().get_config()


SAMPLE_CONFIG = {
    "debug": False,
    "verbose": False,
    "log_level": "WARNING",
    "log_file": None,
    "show_progress": False,
    "colored_output": True,

    "grid": {
        "radial_cells": 512,
        "grading": 2.0,
        "cartesian_cells": 256
    },

    "solver": {
        "grad_tol": 1e-8,
        "max_iters": 20000,
        "armijo_c": 1e-4,
        "backtrack": 0.5,
        "n_levels": 10,
        "continuation_tol": 1e-6,
        "smoothing": 1e-10,
        "newton_tol": 1e-6,
        "newton_max_iters": 100
    },

    "sweep": {
        "schedule": list(DEFAULT_SCHEDULE),
        "cross_check": False,
        "cross_check_p_min": 1.3
    },

    "certificate": {
        "closed_form_defect_tol": 1e-3,
        "closed_form_sup_tol": 1e-9,
        "closed_form_pairing_tol": 1e-6,
        "numeric_defect_tol": 5e-2,
        "numeric_sup_tol": 0.02,
        "numeric_pairing_tol": 0.05,
        "boundary_tol": 1e-6,
        "truncation_tol": 1e-4
    }
}


def create_sample_config(config_path: Path) -> Path:
    """Create a sample configuration file."""
    config_path = Path(config_path)
    config_path.parent.mkdir(parents=True, exist_ok=True)
    with open(config_path, 'w', encoding='utf-8') as f:
        json.dump(SAMPLE_CONFIG, f, indent=2)
    logger.info(f"Sample configuration created at: {config_path}")
    return config_path
