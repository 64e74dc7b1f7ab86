#!/usr/bin/env python3
"""
Tests for the command-line interface: reports on stdout and exit codes.
"""

import sys
import json
import math
import logging
from pathlib import Path

import pytest
from colorama import Fore, Style

# Add the project to Python path
sys.path.insert(0, str(Path(__file__).parent))

import plaplace_lab.cli as cli_module
import plaplace_lab.config as config_module
from plaplace_lab.cli import (
    EXIT_BAD_INPUT,
    EXIT_COERCIVITY_LOST,
    EXIT_NOT_CONVERGED,
    EXIT_OK,
    EXIT_VERIFY_FAILED,
    exit_code_for,
    main,
    print_colored,
)
from plaplace_lab.utils.exceptions import CoercivityLostError, ConvergenceError, DomainError
from plaplace_lab.utils.formats import read_csv

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)

ROOT = Path(__file__).parent
SPECS = ROOT / "sample_specs"
CERTIFICATES = SPECS / "certificates"


@pytest.fixture(autouse=True)
def isolated(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("HOME", str(tmp_path / "home"))
    monkeypatch.setattr(config_module, "_config_manager", None)
    return tmp_path


def run(capsys, *argv):
    code = main(["--no-color", *argv])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def write_spec(path: Path, data: dict) -> Path:
    path.write_text(json.dumps(data))
    return path


# ---------------------------------------------------------------- check

def test_check_cone(capsys):
    code, report = run(capsys, "check", str(SPECS / "cone.json"))
    assert code == EXIT_OK
    assert report["regime"] == "ExtremeBounded"
    assert report["lhs_Lorentz"] == pytest.approx(1.0)


def test_check_malformed_spec(capsys, isolated):
    broken = isolated / "broken.json"
    broken.write_text('{"N": 3, ')
    code, report = run(capsys, "check", str(broken))
    assert code == EXIT_BAD_INPUT
    assert report is None


# ---------------------------------------------------------------- solve

def test_solve_torsion(capsys, isolated):
    out = isolated / "run"
    code, data = run(capsys, "solve", str(SPECS / "torsion_ball.json"), "--p", "1.5", "--out", str(out))
    assert code == EXIT_OK
    assert data["method"] == "newton"
    assert data["u_center"] == pytest.approx(1 / 12, abs=1e-4)
    assert data["spec"]["name"] == "torsion"
    for name in ("solve.json", "u.csv", "flux.csv"):
        assert (out / name).exists()
    header, values = read_csv(out / "u.csv")
    assert header == ["r", "u"]
    assert values[0, 1] == pytest.approx(1 / 12, abs=1e-4)
    assert (out / "u.csv").read_text().startswith("# p-laplace-hardy-lab")


def test_solve_without_coercivity(capsys, isolated):
    spec = write_spec(isolated / "strong.json", {"N": 3, "lambda": 0.5, "f": {"kind": "constant", "c": 1.0}})
    code, data = run(capsys, "solve", str(spec), "--p", "2")
    assert code == EXIT_COERCIVITY_LOST
    assert data is None


def test_solve_outside_the_exponent_range(capsys):
    code, _ = run(capsys, "solve", str(SPECS / "torsion_ball.json"), "--p", "2.5")
    assert code == EXIT_BAD_INPUT


def test_solve_newton_on_a_grid_domain(capsys):
    code, _ = run(capsys, "solve", str(SPECS / "torsion_disk_grid.json"), "--p", "1.5", "--method", "newton")
    assert code == EXIT_BAD_INPUT


# ---------------------------------------------------------------- sweep

def test_sweep_with_outputs_and_certificate(capsys, isolated):
    data = json.loads((SPECS / "hardy_line_bounded.json").read_text())
    data["domain"]["M"] = 128
    spec = write_spec(isolated / "line.json", data)
    out = isolated / "sweep"
    code, report = run(capsys, "sweep", str(spec), "--schedule", "1.5,1.3,1.2,1.1", "--out", str(out), "--certify")
    assert code == EXIT_OK
    assert report["schedule"] == [1.5, 1.3, 1.2, 1.1]
    assert report["report"]["regime_observed"] == "Bounded"
    assert report["bound_trace"] == [True] * 4
    assert report["flux_limit"]["p"] == 1.1
    assert report["certificate"]["all_passed"]
    header, rows = read_csv(out / "sweep.csv")
    assert header[0] == "p" and header[-1] == "converged"
    assert rows.shape == (4, len(header))
    assert list(rows[:, -1]) == [1, 1, 1, 1]
    for name in ("report.json", "limit_u.csv", "flux_limit.csv"):
        assert (out / name).exists()


def test_sweep_of_a_blowing_up_problem(capsys, isolated):
    data = json.loads((SPECS / "torsion_blowup.json").read_text())
    data["domain"]["M"] = 256
    spec = write_spec(isolated / "blowup.json", data)
    code, report = run(capsys, "sweep", str(spec), "--schedule", "1.5,1.3,1.2,1.1", "--certify")
    assert code == EXIT_OK
    assert report["report"]["regime_observed"] == "BlowingUp"
    assert report["bound_trace"] is None
    assert report["certificate"] is None


def test_sweep_with_a_bad_schedule(capsys):
    code, _ = run(capsys, "sweep", str(SPECS / "torsion_ball.json"), "--schedule", "1.5,abc")
    assert code == EXIT_BAD_INPUT


# ---------------------------------------------------------------- verify

def test_verify_cone(capsys):
    code, verdict = run(capsys, "verify", str(CERTIFICATES / "cone.json"))
    assert code == EXIT_OK
    assert verdict["all_passed"] and verdict["failing"] == []
    assert set(verdict["checks"]) == {"sup", "distributional", "pairing", "boundary"}


def test_verify_scaled_cone_fails(capsys):
    code, verdict = run(capsys, "verify", str(CERTIFICATES / "cone_scaled.json"))
    assert code == EXIT_VERIFY_FAILED
    assert "sup" in verdict["failing"]
    assert verdict["certificate"]["perturbation"] == "scale_z(1.1)"


def test_verify_with_truncation_traces(capsys):
    code, verdict = run(capsys, "verify", str(CERTIFICATES / "hardy_line_limit.json"), "--truncation")
    assert code == EXIT_OK
    assert len(verdict["truncation"]) == 12
    assert all(trace["converged"] for trace in verdict["truncation"])


def test_verify_missing_file(capsys, isolated):
    code, _ = run(capsys, "verify", str(isolated / "nothing.json"))
    assert code == EXIT_BAD_INPUT


# ---------------------------------------------------------------- constants

def test_constants(capsys):
    code, data = run(capsys, "constants", "--N", "2", "--lambda", "0.5")
    assert code == EXIT_OK
    assert data["S_N"] == pytest.approx(1 / (2 * math.sqrt(math.pi)))
    assert len(data["hardy_p_curve"]) == 10
    assert data["hardy_p_curve"][0][0] == 1.0
    assert data["limit_constant"]["closed_form"] == pytest.approx(math.e ** 2)


def test_constants_reject_low_dimension(capsys):
    code, _ = run(capsys, "constants", "--N", "1")
    assert code == EXIT_BAD_INPUT


# ---------------------------------------------------------------- config and main

def test_config_actions(capsys, isolated):
    path = isolated / "lab.json"
    code, _ = run(capsys, "config", "create", "--file", str(path))
    assert code == EXIT_OK and path.exists()
    code, _ = run(capsys, "--config", str(path), "config", "validate")
    assert code == EXIT_OK
    code, summary = run(capsys, "--config", str(path), "config", "show")
    assert code == EXIT_OK
    assert summary["grid"]["radial_cells"] == 512


def test_invalid_config_fails_validation(capsys, isolated):
    path = write_spec(isolated / "bad.json", {"grid": {"grading": 0.5}})
    code, _ = run(capsys, "--config", str(path), "config", "validate")
    assert code == EXIT_BAD_INPUT


def test_missing_config_and_command(capsys, isolated):
    code, _ = run(capsys, "--config", str(isolated / "none.json"), "check", str(SPECS / "cone.json"))
    assert code == EXIT_BAD_INPUT
    assert main([]) == EXIT_BAD_INPUT


def test_exit_codes_for_errors():
    assert exit_code_for(ConvergenceError("stalled", history=[])) == EXIT_NOT_CONVERGED
    assert exit_code_for(CoercivityLostError("lost", diagnostics={})) == EXIT_COERCIVITY_LOST
    assert exit_code_for(DomainError("p")) == EXIT_BAD_INPUT


def test_main_prepares_the_console(capsys, monkeypatch):
    calls = []
    monkeypatch.setattr(cli_module, "just_fix_windows_console", lambda: calls.append(True))
    code, _ = run(capsys, "constants", "--N", "2")
    assert code == EXIT_OK
    assert calls == [True]


def test_status_lines_are_colored_on_stderr(capsys):
    print_colored("done", "green")
    err = capsys.readouterr().err
    assert err.startswith(Fore.GREEN) and Style.RESET_ALL in err


# ---------------------------------------------------------------- packaging

def test_runtime_requirements():
    lines = (ROOT / "requirements.txt").read_text().splitlines()
    names = {line.split(">=")[0].strip() for line in lines if line.strip() and not line.startswith("#")}
    assert names == {"numpy", "scipy", "colorama", "tqdm"}


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
