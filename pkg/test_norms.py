#!/usr/bin/env python3
"""
Tests for rearrangements, Lebesgue/Lorentz norms and the sharp constants.
"""

import sys
import math
import logging
from pathlib import Path

import numpy as np
import pytest

# Add the project to Python path
sys.path.insert(0, str(Path(__file__).parent))

from plaplace_lab.core.norms import (
    INF,
    LorentzIndex,
    SampledFunction,
    decreasing_rearrangement,
    distribution_function,
    gamma_constant,
    hardy_multiplier,
    hardy_threshold,
    lebesgue_norm,
    lorentz_norm,
    sobolev_constant,
    sphere_area,
    unit_ball_volume,
)
from plaplace_lab.core.fields import (
    lebesgue_norm_of_field,
    make_radial_grid,
    RadialField,
    total_variation,
)
from plaplace_lab.solvers.assembly import HardyQuadrature
from plaplace_lab.solvers.minimizer import EnergyModel
from plaplace_lab.problem.models import ProblemSpec
from plaplace_lab.utils.exceptions import DomainError, FieldError

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)


def inverse_radius(N: int, M: int = 512) -> SampledFunction:
    """1/|x| on B_1 in R^N, each cell taking its value at the outer radius."""
    grid = make_radial_grid(N, 1.0, M=M)
    return SampledFunction(1.0 / grid.nodes[1:], grid.cell_volumes)


# ---------------------------------------------------------------- constants

def test_ball_volumes_and_spheres():
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    with pytest.raises(DomainError):
        unit_ball_volume(0)


def test_sobolev_and_lorentz_constants():
    assert sobolev_constant(2) == pytest.approx(1 / (2 * math.sqrt(math.pi)))
    assert sobolev_constant(2) == pytest.approx(0.28209, abs=1e-5)
    assert sobolev_constant(3) == pytest.approx((36 * math.pi) ** (-1 / 3))
    assert gamma_constant(2) == pytest.approx(0.56419, abs=1e-5)
    with pytest.raises(DomainError):
        sobolev_constant(1)
    with pytest.raises(DomainError):
        gamma_constant(1)


@pytest.mark.parametrize("N, p, expected", [
    (3, 2.0, 4.0),
    (2, 1.0, 1.0),
    (4, 1.5, 0.6 ** 1.5),
])
def test_hardy_multiplier(N, p, expected):
    assert hardy_multiplier(N, p) == pytest.approx(expected)
    assert hardy_threshold(N, p) == pytest.approx(1 / expected)


def test_hardy_multiplier_needs_p_below_N():
    with pytest.raises(DomainError):
        hardy_multiplier(2, 2.0)
    with pytest.raises(DomainError):
        hardy_threshold(3, 3.5)


# ---------------------------------------------------------------- sampled data

def test_sampled_function_validation():
    with pytest.raises(FieldError):
        SampledFunction(np.array([1.0, 2.0]), np.array([1.0]))
    with pytest.raises(FieldError):
        SampledFunction(np.array([np.nan]), np.array([1.0]))
    with pytest.raises(FieldError):
        SampledFunction(np.array([1.0]), np.array([-1.0]))
    with pytest.raises(FieldError):
        SampledFunction(np.array([]), np.array([]))


def test_distribution_of_constant():
    f = SampledFunction.constant(1.0, 2.0)
    assert distribution_function(f, 0.5) == 2.0
    assert distribution_function(f, 1.0) == 0.0
    with pytest.raises(DomainError):
        distribution_function(f, -1.0)


def test_distribution_of_inverse_radius():
    f = inverse_radius(2)
    assert distribution_function(f, 2.0) == pytest.approx(math.pi / 4, abs=1e-2)


def test_rearrangement_of_steps():
    f = SampledFunction(np.array([3.0, 1.0, -2.0]), np.array([1.0, 1.0, 1.0]))
    t = np.array([0.5, 1.0, 1.5, 2.5, 3.5])
    assert list(decreasing_rearrangement(f, t)) == [3.0, 2.0, 2.0, 1.0, 0.0]
    assert decreasing_rearrangement(f, 0.5) == 3.0
    with pytest.raises(DomainError):
        decreasing_rearrangement(f, 0.0)


def test_rearrangement_of_constant():
    f = SampledFunction.constant(4.0, 2.0)
    assert decreasing_rearrangement(f, 1.0) == 4.0
    assert decreasing_rearrangement(f, 2.0) == 0.0


@pytest.mark.parametrize("N", [2, 3])
def test_rearrangement_of_inverse_radius(N):
    f = inverse_radius(N, M=1024)
    volume = unit_ball_volume(N)
    for t in (0.1 * volume, 0.5 * volume, 0.9 * volume):
        assert decreasing_rearrangement(f, t) == pytest.approx((volume / t) ** (1 / N), rel=1e-2)


def test_equimeasurability():
    rng = np.random.default_rng(7)
    values = rng.normal(size=200)
    measures = rng.uniform(0.1, 1.0, size=200)
    f = SampledFunction(values, measures)
    levels, cumulative = f.steps()
    widths = np.diff(np.concatenate(([0.0], cumulative)))
    for s in rng.uniform(0.0, 2.5, size=20):
        assert np.sum(widths[levels > s]) == pytest.approx(distribution_function(f, s), rel=1e-12, abs=1e-12)
    for p in (1.0, 2.0, 3.5):
        rearranged = np.sum(widths * levels ** p) ** (1 / p)
        assert rearranged == pytest.approx(lebesgue_norm(f, p), rel=1e-11)


# ---------------------------------------------------------------- norms

def test_lebesgue_norms():
    f = SampledFunction(np.array([3.0, 1.0, 2.0]), np.ones(3))
    assert lebesgue_norm(f, 1) == pytest.approx(6.0)
    assert lebesgue_norm(f, 2) == pytest.approx(math.sqrt(14.0))
    assert lebesgue_norm(f, INF) == 3.0
    with pytest.raises(DomainError):
        lebesgue_norm(f, 0.5)


@pytest.mark.parametrize("N", [2, 3, 4])
def test_norm_of_one_on_a_ball(N):
    R = 2.5
    f = SampledFunction.constant(1.0, unit_ball_volume(N) * R ** N)
    assert lebesgue_norm(f, N) == pytest.approx(R * unit_ball_volume(N) ** (1 / N))


def test_lorentz_index():
    idx = LorentzIndex(2.0)
    assert idx.is_weak
    dual = idx.conjugate()
    assert dual.p == pytest.approx(2.0) and dual.q == 1.0
    assert LorentzIndex(3.0, 1.0).conjugate().q == INF
    with pytest.raises(DomainError):
        LorentzIndex(0.5)
    with pytest.raises(DomainError):
        LorentzIndex(2.0, 0.5)
    with pytest.raises(DomainError):
        LorentzIndex(1.0).conjugate()


def test_lorentz_weak_norm_of_steps():
    f = SampledFunction(np.array([3.0, 1.0, 2.0]), np.ones(3))
    assert lorentz_norm(f, LorentzIndex(2.0)) == pytest.approx(3.0)


def test_lorentz_diagonal_matches_lebesgue():
    rng = np.random.default_rng(3)
    f = SampledFunction(rng.normal(size=50), rng.uniform(0.5, 2.0, size=50))
    for p in (1.5, 2.0, 4.0):
        assert lorentz_norm(f, LorentzIndex(p, p)) == pytest.approx(lebesgue_norm(f, p), rel=1e-12)


def test_lorentz_norm_of_zero():
    f = SampledFunction(np.zeros(4), np.ones(4))
    assert lorentz_norm(f, LorentzIndex(2.0)) == 0.0
    assert lorentz_norm(f, LorentzIndex(2.0, 1.0)) == 0.0


@pytest.mark.parametrize("N", [2, 3, 4, 5])
def test_weak_norm_of_inverse_radius(N):
    f = inverse_radius(N)
    assert lorentz_norm(f, LorentzIndex(N)) == pytest.approx(unit_ball_volume(N) ** (1 / N), rel=1e-12)


@pytest.mark.parametrize("N", [2, 3, 4, 5])
def test_extremal_identity(N):
    grid = make_radial_grid(N, 1.0, M=512)
    f = SampledFunction((N - 1) / grid.nodes[1:], grid.cell_volumes)
    assert gamma_constant(N) * lorentz_norm(f, LorentzIndex(N)) == pytest.approx(1.0, abs=1e-6)


# ---------------------------------------------------------------- inequalities

@pytest.mark.parametrize("index", [(3.0, 2.0), (2.0, 1.0), (1.5, INF), (4.0, 4.0)])
def test_lorentz_hoelder(index):
    rng = np.random.default_rng(11)
    idx = LorentzIndex(*index)
    dual = idx.conjugate()
    for _ in range(100):
        measures = rng.uniform(0.01, 1.0, size=30)
        f = SampledFunction(rng.normal(size=30), measures)
        g = SampledFunction(rng.exponential(size=30), measures)
        product = float(np.sum(measures * np.abs(f.values * g.values)))
        assert product <= lorentz_norm(f, idx) * lorentz_norm(g, dual) * (1 + 1e-9)


def _random_profile(rng, grid):
    values = np.cumsum(rng.exponential(size=grid.M + 1))[::-1]
    values = values - values[-1]
    return RadialField(grid, values * rng.uniform(0.1, 10.0))


@pytest.mark.parametrize("N, p", [(3, 2.0), (2, 1.5), (4, 2.0)])
def test_hardy_inequality(N, p):
    rng = np.random.default_rng(5)
    grid = make_radial_grid(N, 1.0, M=32)
    spec = ProblemSpec(N=N)
    model = EnergyModel(spec, grid, p)
    hardy = HardyQuadrature(grid, p)
    for _ in range(100):
        u = _random_profile(rng, grid)
        assert hardy_threshold(N, p) * hardy.energy(u.values) <= model.gradient_energy(u.values) * (1 + 1e-9)


@pytest.mark.parametrize("N", [2, 3])
def test_sobolev_inequality(N):
    rng = np.random.default_rng(9)
    grid = make_radial_grid(N, 1.0, M=32)
    for _ in range(100):
        u = _random_profile(rng, grid)
        lhs = lebesgue_norm_of_field(u, N / (N - 1))
        assert lhs <= sobolev_constant(N) * total_variation(u) * (1 + 1e-9)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
