#!/usr/bin/env python3
"""
Tests for the radial closed forms, the strong-form residual and the Newton solver.
"""

import sys
import math
import logging
import warnings
from pathlib import Path

import numpy as np
import pytest

# Add the project to Python path
sys.path.insert(0, str(Path(__file__).parent))

from plaplace_lab.core.fields import RadialField, make_radial_grid
from plaplace_lab.problem.models import DomainSpec, HardyTerm, ProblemSpec, SourceSpec
from plaplace_lab.solvers.models import NewtonSettings
from plaplace_lab.solvers.radial import (
    ClosedForm,
    cone_profile,
    hardy_line,
    singular_family,
    solve_radial_bvp,
    strong_residual,
    torsion,
)
from plaplace_lab.utils.exceptions import CoercivityWarning, DomainError, SpecError

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)

SPECS = Path(__file__).parent / "sample_specs"


# ---------------------------------------------------------------- closed forms

def test_closed_form_values():
    assert ClosedForm.torsion(2, 1.0, 1.5).center_value == pytest.approx(1 / 12)
    assert float(torsion(2, 1.0, 1.5, 0.0)) == pytest.approx(1 / 12)
    assert float(torsion(2, 1.0, 1.5, 1.0)) == pytest.approx(0.0, abs=1e-15)
    assert float(hardy_line(3, 1.0, 0.5, 1.5, 0.0)) == pytest.approx(0.25)
    assert float(hardy_line(3, 1.0, 0.5, 1.5, 0.5)) == pytest.approx(0.125)
    assert float(singular_family(3, 1.0, 0.5)) == pytest.approx(1.0)
    assert float(cone_profile(0.25)) == pytest.approx(0.75)
    assert ClosedForm.singular_family(3, 1.0).center_value == math.inf


def test_torsion_profile_scales_with_radius():
    # v_p(0) grows like R^{p/(p-1)}
    small = ClosedForm.torsion(3, 1.0, 2.0).center_value
    large = ClosedForm.torsion(3, 2.0, 2.0).center_value
    assert large / small == pytest.approx(4.0)
    assert small == pytest.approx(1 / 6)


@pytest.mark.parametrize("form", [
    ClosedForm.torsion(2, 1.0, 1.5),
    ClosedForm.torsion(3, 2.0, 2.5),
    ClosedForm.hardy_line(3, 1.5, 0.5, 1.2),
    ClosedForm.hardy_line(4, 2.0, 0.0, 2.0),
    ClosedForm.extreme_pair(2, 0.5),
    ClosedForm.singular_family(3, 1.0),
])
def test_closed_forms_solve_their_equations(form):
    r = np.linspace(0.1, 0.9, 17) * form.R
    assert np.max(np.abs(form.residual(r))) < 1e-6


def test_closed_form_problem_specs():
    cone = ClosedForm.extreme_pair(2, 0.5).problem_spec()
    sample = ProblemSpec.from_json_file(SPECS / "cone.json")
    assert cone.lam == sample.lam and cone.f == sample.f
    assert cone.hardy_term is HardyTerm.SIGN
    line = ClosedForm.hardy_line(3, 1.5, 0.5, 1.5).problem_spec()
    assert line.f == SourceSpec.power(1.0, 1.0)


@pytest.mark.parametrize("build", [
    lambda: ClosedForm.torsion(2, 1.0, 2.0),
    lambda: ClosedForm.torsion(3, 1.0, 1.0),
    lambda: ClosedForm.hardy_line(3, 2.5, 0.5, 1.5),
    lambda: ClosedForm.hardy_line(3, 0.5, 0.5, 1.5),
    lambda: ClosedForm.extreme_pair(2, 1.5),
    lambda: ClosedForm.singular_family(3, 2.0),
])
def test_closed_form_parameter_ranges(build):
    with pytest.raises(DomainError):
        build()


def test_torsion_outside_the_ball():
    with pytest.raises(DomainError):
        torsion(2, 1.0, 1.5, np.array([0.5, 1.5]))
    with pytest.raises(DomainError):
        torsion(2, 1.0, 1.5, -0.1)


# ---------------------------------------------------------------- strong residual

def _max_residual(M: int) -> float:
    grid = make_radial_grid(3, 1.0, M=M)
    u = RadialField.from_function(grid, lambda r: torsion(3, 1.0, 1.5, r))
    residual = strong_residual(u, 1.5, f=1.0)
    return float(np.max(np.abs(residual[grid.nodes[1:-1] >= 0.1])))


def test_strong_residual_of_torsion():
    coarse = _max_residual(256)
    fine = _max_residual(512)
    assert coarse < 1e-3
    assert fine < coarse / 2


def test_strong_residual_of_hardy_line():
    grid = make_radial_grid(3, 1.0, M=512)
    u = RadialField.from_function(grid, lambda r: hardy_line(3, 1.0, 0.5, 1.5, r))
    residual = strong_residual(u, 1.5, lam=0.5, f=SourceSpec.power(0.5, 1.0), hardy_term=HardyTerm.SIGN)
    assert np.max(np.abs(residual[grid.nodes[1:-1] >= 0.1])) < 1e-3
    wrong = strong_residual(u, 1.5, lam=0.5, f=SourceSpec.power(1.0, 1.0), hardy_term=HardyTerm.SIGN)
    assert np.min(np.abs(wrong[grid.nodes[1:-1] >= 0.1])) > 0.1


def test_strong_residual_needs_p_above_one():
    grid = make_radial_grid(2, 1.0, M=16)
    with pytest.raises(DomainError):
        strong_residual(RadialField.zeros(grid), 1.0)


# ---------------------------------------------------------------- Newton

def test_newton_torsion():
    spec = ProblemSpec.from_json_file(SPECS / "torsion_ball.json")
    u = solve_radial_bvp(spec, 1.5)
    exact = torsion(2, 1.0, 1.5, u.grid.nodes)
    assert np.max(np.abs(u.values - exact)) < 1e-4
    assert u.center_value == pytest.approx(1 / 12, abs=1e-4)
    assert u.values[-1] == 0.0


def test_newton_hardy_line_is_exact():
    spec = ProblemSpec.from_json_file(SPECS / "hardy_line.json")
    u = solve_radial_bvp(spec, 1.5)
    assert u.center_value == pytest.approx(0.25, abs=1e-8)
    assert np.allclose(u.values, 0.25 * (1 - u.grid.nodes), atol=1e-8)


def test_newton_cone_is_linear_for_every_p():
    spec = ProblemSpec.from_json_file(SPECS / "cone.json")
    for p in (1.8, 1.5, 1.2):
        u = solve_radial_bvp(spec, p, grid=make_radial_grid(2, 1.0, M=128))
        assert np.allclose(u.values, 1 - u.grid.nodes, atol=1e-8)


def test_newton_zero_source():
    u = solve_radial_bvp(ProblemSpec(N=3), 1.5, grid=make_radial_grid(3, 1.0, M=64))
    assert np.all(u.values == 0)


def test_newton_annulus():
    spec = ProblemSpec(N=3, f=SourceSpec.constant(1.0),
                       domain=DomainSpec(kind="annulus", R=1.0, r_inner=0.5))
    u = solve_radial_bvp(spec, 2.0, grid=spec.radial_grid(M=256))
    assert u.values[0] == 0.0 and u.values[-1] == 0.0
    # u = (7/24 - 1/(8r) - r^2/6)
    assert float(u(0.75)) == pytest.approx(1 / 32, abs=1e-4)


def test_newton_with_hardy_potential():
    beta = 0.1
    spec = ProblemSpec(N=3, lam=beta, f=SourceSpec.constant(1.0))
    u = solve_radial_bvp(spec, 2.0, grid=make_radial_grid(3, 1.0, M=512))
    a = (1 - math.sqrt(1 - 4 * beta)) / 2
    for r in (0.25, 0.5, 0.75):
        exact = (r ** (-a) - r ** 2) / (6 + beta)
        assert float(u(r)) == pytest.approx(exact, rel=1e-3)
    plain = solve_radial_bvp(spec.with_changes(lam=0.0), 2.0, grid=u.grid)
    assert np.all(u.values >= plain.values)


def test_newton_warm_start_gives_the_same_solution():
    spec = ProblemSpec(N=3, lam=0.1, f=SourceSpec.constant(1.0))
    grid = make_radial_grid(3, 1.0, M=128)
    cold = solve_radial_bvp(spec, 1.8, grid=grid)
    warm = solve_radial_bvp(spec, 1.8, initial=cold, grid=grid)
    assert np.allclose(warm.values, cold.values, atol=1e-6)


def test_newton_rejects_bad_input():
    spec = ProblemSpec.from_json_file(SPECS / "torsion_ball.json")
    with pytest.raises(DomainError):
        solve_radial_bvp(spec, 2.0)
    with pytest.raises(DomainError):
        solve_radial_bvp(spec, 1.0)
    with pytest.raises(SpecError):
        solve_radial_bvp(ProblemSpec.from_json_file(SPECS / "torsion_disk_grid.json"), 1.5)
    other = RadialField.zeros(make_radial_grid(2, 1.0, M=16))
    with pytest.raises(SpecError):
        solve_radial_bvp(spec, 1.5, initial=other)
    with pytest.raises(SpecError):
        NewtonSettings(tol=0.0)


def test_coercivity_warning():
    spec = ProblemSpec(N=3, lam=0.5)
    with pytest.warns(CoercivityWarning):
        u = solve_radial_bvp(spec, 2.0, grid=make_radial_grid(3, 1.0, M=32))
    assert np.all(u.values == 0)
    with warnings.catch_warnings():
        warnings.simplefilter("error", CoercivityWarning)
        solve_radial_bvp(spec.with_changes(lam=0.2), 2.0, grid=make_radial_grid(3, 1.0, M=32))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
