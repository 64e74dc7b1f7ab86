#!/usr/bin/env python3
"""
Tests for configuration loading, validation and the settings built from it.
"""

import sys
import json
import logging
from pathlib import Path

import pytest

# Add the project to Python path
sys.path.insert(0, str(Path(__file__).parent))

import plaplace_lab.config as config_module
from plaplace_lab.certificate.models import CertificateTolerances
from plaplace_lab.config import (
    SAMPLE_CONFIG,
    CertificateConfig,
    ConfigManager,
    LabConfig,
    SolverConfig,
    create_sample_config,
    get_config_manager,
)
from plaplace_lab.solvers.models import DEFAULT_SCHEDULE, MinimizeSettings, NewtonSettings, SweepSettings
from plaplace_lab.utils.exceptions import ConfigurationError

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)


@pytest.fixture
def isolated(tmp_path, monkeypatch):
    """Empty working and home directories, no global manager."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("HOME", str(tmp_path / "home"))
    monkeypatch.setattr(config_module, "_config_manager", None)
    return tmp_path


# ---------------------------------------------------------------- loading

def test_defaults_without_a_file(isolated):
    manager = ConfigManager()
    assert manager.config_file == isolated / "plaplace_lab_config.json"
    config = manager.get_config()
    assert config.grid.radial_cells == 512
    assert config.sweep.schedule == list(DEFAULT_SCHEDULE)
    assert manager.validate_config() == []


def test_config_in_home_directory(isolated):
    home_config = isolated / "home" / ".config" / "plaplace-lab" / "config.json"
    home_config.parent.mkdir(parents=True)
    home_config.write_text(json.dumps({"grid": {"radial_cells": 128}}))
    manager = ConfigManager()
    assert manager.config_file == home_config
    assert manager.get_config().grid.radial_cells == 128


def test_explicit_missing_file(isolated):
    with pytest.raises(ConfigurationError):
        ConfigManager(isolated / "missing.json")


def test_partial_file_is_merged(isolated, caplog):
    path = isolated / "lab.json"
    path.write_text(json.dumps({
        "verbose": True,
        "solver": {"grad_tol": 1e-6, "warp": 9},
        "sweep": {"schedule": [1.5, 1.2]},
        "colour": "blue",
    }))
    with caplog.at_level(logging.WARNING):
        config = ConfigManager(path).get_config()
    assert config.verbose
    assert config.solver.grad_tol == 1e-6
    assert config.solver.max_iters == 20000
    assert config.sweep.schedule == [1.5, 1.2]
    assert "solver.warp" in caplog.text
    assert "colour" in caplog.text


@pytest.mark.parametrize("content", ['{"grid": ', '[1, 2]', '{"solver": 3}'])
def test_unreadable_files(isolated, content):
    path = isolated / "broken.json"
    path.write_text(content)
    with pytest.raises(ConfigurationError):
        ConfigManager(path)


def test_save_and_reload(isolated):
    manager = ConfigManager()
    manager.update_config(log_level="INFO", missing_key=1)
    manager.config.certificate.numeric_sup_tol = 0.01
    target = isolated / "saved" / "lab.json"
    manager.save_config(target)
    saved = json.loads(target.read_text())
    assert "config_file" not in saved
    reloaded = ConfigManager(target).get_config()
    assert reloaded.log_level == "INFO"
    assert reloaded.certificate.numeric_sup_tol == 0.01


def test_sample_config_round_trip(isolated):
    path = create_sample_config(isolated / "nested" / "sample.json")
    assert json.loads(path.read_text()) == json.loads(json.dumps(SAMPLE_CONFIG))
    manager = ConfigManager(path)
    assert manager.validate_config() == []
    assert manager.config_summary()["config_file"] == str(path)


def test_shipped_sample_config_is_valid():
    manager = ConfigManager(Path(__file__).parent / "sample_config.json")
    assert manager.validate_config() == []


def test_global_manager(isolated):
    first = get_config_manager()
    assert get_config_manager() is first
    path = create_sample_config(isolated / "other.json")
    replaced = get_config_manager(path)
    assert replaced is not first
    assert replaced.config_file == path


# ---------------------------------------------------------------- validation

def test_validation_reports_every_issue(isolated):
    manager = ConfigManager()
    c = manager.config
    c.grid.radial_cells = 4
    c.grid.cartesian_cells = 65
    c.solver.armijo_c = 2.0
    c.solver.newton_tol = 0.0
    c.sweep.schedule = [1.2, 1.5]
    c.certificate.boundary_tol = -1.0
    c.log_level = "LOUD"
    issues = manager.validate_config()
    assert len(issues) == 7
    assert "Invalid log level: LOUD" in issues
    assert "sweep.schedule must be strictly decreasing with every p > 1" in issues


def test_setup_logging(isolated):
    manager = ConfigManager()
    manager.config.debug = True
    manager.config.log_file = str(isolated / "lab.log")
    manager.setup_logging()
    root = logging.getLogger()
    assert root.level == logging.DEBUG
    assert any(isinstance(h, logging.FileHandler) for h in root.handlers)
    logging.getLogger("plaplace_lab.test").debug("written to file")
    for handler in root.handlers:
        handler.flush()
    assert "written to file" in (isolated / "lab.log").read_text()

    manager.config.debug = False
    manager.config.log_file = None
    manager.config.log_level = "error"
    manager.setup_logging()
    assert logging.getLogger().level == logging.ERROR
    logging.basicConfig(level=logging.INFO, force=True)


# ---------------------------------------------------------------- settings

def test_settings_from_config():
    config = LabConfig()
    minimize = MinimizeSettings.from_config(config.solver)
    assert len(minimize.n_schedule) == 10
    assert minimize.n_schedule[-1] == 4.0 ** 10
    newton = NewtonSettings.from_config(SolverConfig(newton_tol=1e-9, newton_max_iters=7))
    assert newton.tol == 1e-9 and newton.max_iters == 7
    config.show_progress = True
    sweep = SweepSettings.from_config(config)
    assert sweep.show_progress and not sweep.cross_check


def test_tolerances_from_config():
    certificate = CertificateConfig()
    assert CertificateTolerances.from_config(certificate) == CertificateTolerances.closed_form()
    assert CertificateTolerances.from_config(certificate, numeric=True) == CertificateTolerances.numeric()
    loose = CertificateTolerances.from_config(CertificateConfig(numeric_defect_tol=0.1), numeric=True)
    assert loose.defect == 0.1


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
