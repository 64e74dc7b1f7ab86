#!/usr/bin/env python3
"""
Tests for grids, fields and the discrete calculus on them.
"""

import sys
import math
import logging
from pathlib import Path

import numpy as np
import pytest

# Add the project to Python path
sys.path.insert(0, str(Path(__file__).parent))

from plaplace_lab.core.fields import (
    CartesianGrid,
    GridField2D,
    RadialField,
    RadialGrid,
    VectorField,
    element_gradients,
    element_values,
    field_to_dict,
    flux,
    gradient_radial,
    lebesgue_norm_of_field,
    load_radial_field_csv,
    load_radial_vector_csv,
    make_cartesian_grid,
    make_radial_grid,
    p_energy,
    sample_radial,
    save_field_csv,
    save_vector_field_csv,
    sgn_set,
    total_variation,
    truncate,
    weighted_integral,
)
from plaplace_lab.core.norms import sphere_area
from plaplace_lab.utils.exceptions import DomainError, FieldError

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)


def cone(grid: RadialGrid) -> RadialField:
    return RadialField.from_function(grid, lambda r: grid.R - r)


# ---------------------------------------------------------------- grids

def test_uniform_and_graded_nodes():
    uniform = make_radial_grid(2, 1.0, M=8, grading=1.0)
    assert np.allclose(uniform.nodes, np.arange(9) / 8)
    graded = make_radial_grid(2, 1.0, M=8, grading=2.0)
    assert np.allclose(graded.nodes, (np.arange(9) / 8) ** 2)
    assert graded.nodes[-1] == 1.0
    assert np.all(graded.widths > 0)


def test_annulus_nodes_and_boundary():
    grid = make_radial_grid(3, 2.0, M=16, r_inner=0.5)
    assert grid.nodes[0] == 0.5 and grid.nodes[-1] == 2.0
    assert list(grid.boundary_nodes) == [0, 16]
    assert grid.total_measure == pytest.approx(4 * math.pi / 3 * (8 - 0.125))
    ball = make_radial_grid(3, 2.0, M=16)
    assert list(ball.boundary_nodes) == [16]
    assert len(ball.free_nodes) == 16


@pytest.mark.parametrize("kwargs", [
    dict(N=1, R=1.0),
    dict(N=2, R=1.0, M=4),
    dict(N=2, R=1.0, grading=0.5),
    dict(N=2, R=1.0, r_inner=1.0),
])
def test_radial_grid_rejects_bad_parameters(kwargs):
    with pytest.raises(DomainError):
        RadialGrid(**kwargs)


def test_cell_volumes_sum_to_ball():
    for N in (2, 3, 5):
        grid = make_radial_grid(N, 1.5, M=64)
        assert np.sum(grid.cell_volumes) == pytest.approx(grid.total_measure, rel=1e-12)
        _, weights, _ = grid.quadrature
        assert np.sum(weights) == pytest.approx(grid.total_measure, rel=1e-12)


def test_cartesian_grid_geometry():
    grid = make_cartesian_grid("box", half_widths=(2.0, 1.0), n=16)
    assert grid.L == 2.0 and grid.h == pytest.approx(0.25)
    assert grid.total_measure == pytest.approx(8.0)
    assert grid.n_elements == 2 * 16 * 16
    assert grid.mask[grid.origin_index]
    assert not grid.mask[0, 8]
    _, weights, _ = grid.quadrature
    assert np.sum(weights) == pytest.approx(16.0)
    assert not np.any(grid.element_radii == 0)


def test_cartesian_grid_rejects_bad_parameters():
    with pytest.raises(DomainError):
        CartesianGrid(L=1.0, n=15)
    with pytest.raises(DomainError):
        CartesianGrid(L=1.0, n=16, shape="triangle")
    with pytest.raises(DomainError):
        CartesianGrid(L=1.0, n=16, shape="disk", radius=2.0)


# ---------------------------------------------------------------- fields

def test_radial_field_validation():
    grid = make_radial_grid(2, 1.0, M=8)
    with pytest.raises(FieldError):
        RadialField(grid, np.zeros(8))
    with pytest.raises(FieldError):
        RadialField(grid, np.full(9, np.nan))
    u = cone(grid)
    assert u.center_value == 1.0
    assert u(0.5) == pytest.approx(0.5)
    assert u.with_values(np.zeros(9)).center_value == 0.0


def test_grid_field_must_vanish_off_mask():
    grid = make_cartesian_grid("disk", radius=1.0, n=16)
    with pytest.raises(FieldError):
        GridField2D(grid, np.ones((17, 17)))
    u = GridField2D.from_function(grid, lambda X, Y: 1.0 - np.hypot(X, Y))
    assert u.center_value == 1.0
    assert np.all(u.values[~grid.mask] == 0)


def test_vector_field_shapes():
    radial = make_radial_grid(2, 1.0, M=8)
    with pytest.raises(FieldError):
        VectorField(radial, np.zeros(9))
    z = VectorField(radial, -np.ones(8))
    assert z.layout == "radial"
    assert z.sup_norm() == 1.0
    assert z.scaled(0.5).sup_norm() == 0.5
    grid = make_cartesian_grid("box", n=8)
    with pytest.raises(FieldError):
        VectorField(grid, np.zeros(grid.n_elements))
    w = VectorField(grid, np.tile([0.6, 0.8], (grid.n_elements, 1)))
    assert w.layout == "triangle"
    assert w.sup_norm() == pytest.approx(1.0)


def test_sign_sets():
    assert sgn_set(2.0).to_tuple() == (1.0, 1.0)
    assert sgn_set(-0.1).to_tuple() == (-1.0, -1.0)
    zero = sgn_set(0.0)
    assert zero.contains(0.3) and zero.contains(-1.0)
    assert not zero.contains(1.2)
    assert zero.contains(1.05, tol=0.1)


# ---------------------------------------------------------------- calculus

def test_weighted_integrals():
    grid = make_radial_grid(2, 1.0, M=512)
    assert weighted_integral(np.ones(512), grid) == pytest.approx(math.pi, rel=1e-12)
    assert weighted_integral(1.0 / grid.midpoints, grid) == pytest.approx(2 * math.pi, rel=1e-12)
    grid3 = make_radial_grid(3, 1.0, M=4096)
    assert weighted_integral(sample_radial(lambda r: r ** 2, grid3), grid3) == pytest.approx(4 * math.pi / 5, abs=1e-6)
    with pytest.raises(FieldError):
        weighted_integral(np.ones(511), grid)
    with pytest.raises(DomainError):
        sample_radial(lambda r: r, grid, rule="left")


@pytest.mark.parametrize("N", [2, 3, 4])
def test_weighted_integral_is_second_order(N):
    exact = sphere_area(N) / (N + 2)
    errors = []
    for M in (64, 128, 256, 512):
        grid = make_radial_grid(N, 1.0, M=M)
        errors.append(abs(weighted_integral(sample_radial(lambda r: r ** 2, grid), grid) - exact))
    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert np.all(orders >= 1.9)


def test_radial_gradients():
    grid = make_radial_grid(3, 1.0, M=64)
    assert np.allclose(gradient_radial(cone(grid)), -1.0)
    square = RadialField.from_function(grid, lambda r: r ** 2)
    assert np.allclose(gradient_radial(square), 2 * grid.midpoints)
    assert element_gradients(square).shape == (64, 1)
    assert np.allclose(element_values(cone(grid)), 1.0 - grid.midpoints)


def test_p_energy_and_total_variation_of_cone():
    grid = make_radial_grid(2, 1.0, M=128)
    u = cone(grid)
    assert p_energy(u, 1.5) == pytest.approx(math.pi, rel=1e-12)
    assert p_energy(u.with_values(3.0 * u.values), 1.5) == pytest.approx(3.0 ** 1.5 * math.pi, rel=1e-12)
    assert total_variation(u) == pytest.approx(math.pi, rel=1e-12)
    with pytest.raises(DomainError):
        p_energy(u, 2.0)


def test_total_variation_on_disk():
    grid = make_cartesian_grid("disk", radius=1.0, n=128)
    u = GridField2D.from_function(grid, lambda X, Y: 1.0 - np.hypot(X, Y))
    tv = total_variation(u)
    assert tv == pytest.approx(math.pi, rel=2e-2)
    assert total_variation(u, interior_only=True) <= tv


def test_cartesian_gradients_of_linear_function():
    grid = make_cartesian_grid("box", half_widths=(1.0, 1.0), n=16)
    u = GridField2D.from_function(grid, lambda X, Y: 2 * X + 3 * Y)
    g = element_gradients(u)[grid.interior_elements]
    assert np.allclose(g[:, 0], 2.0)
    assert np.allclose(g[:, 1], 3.0)


def test_truncation():
    grid = make_radial_grid(2, 1.0, M=8, grading=1.0)
    u = RadialField.from_function(grid, lambda r: 4.0 * (1.0 - r))
    t = truncate(u, 1.0)
    assert t.values.max() == 1.0
    assert np.array_equal(t.values[-2:], u.values[-2:])
    with pytest.raises(DomainError):
        truncate(u, 0.0)
    box = make_cartesian_grid("box", n=8)
    v = GridField2D.from_function(box, lambda X, Y: -5.0 + 0 * X)
    assert truncate(v, 2.0).values.min() == -2.0


def test_flux_of_torsion_profile():
    grid = make_radial_grid(2, 1.0, M=256)
    u = RadialField.from_function(grid, lambda r: (1.0 - r ** 2) / 4)
    z = flux(u, 2.0)
    assert np.allclose(z.components, -grid.midpoints / 2, rtol=1e-9, atol=1e-9)
    assert np.allclose(flux(cone(grid), 3.0).components, -1.0)
    with pytest.raises(DomainError):
        flux(u, 1.0)


def test_flux_vanishes_where_gradient_vanishes():
    grid = make_radial_grid(3, 1.0, M=16)
    z = flux(RadialField.zeros(grid), 1.5)
    assert np.all(z.components == 0)


def test_lebesgue_norm_of_constant_field():
    grid = make_radial_grid(3, 1.0, M=32)
    u = RadialField(grid, np.ones(33))
    for q in (1.0, 1.5, 3.0):
        assert lebesgue_norm_of_field(u, q) == pytest.approx((4 * math.pi / 3) ** (1 / q), rel=1e-12)


# ---------------------------------------------------------------- files

def test_field_csv_files(tmp_path):
    grid = make_radial_grid(3, 1.0, M=32)
    u = RadialField.from_function(grid, lambda r: np.cos(r))
    path = save_field_csv(u, tmp_path / "u.csv", comment="profile")
    loaded = load_radial_field_csv(path, grid)
    assert np.array_equal(loaded.values, u.values)
    z = flux(u, 1.5)
    zpath = save_vector_field_csv(z, tmp_path / "z.csv")
    assert np.array_equal(load_radial_vector_csv(zpath, grid).components, z.components)
    with pytest.raises(FieldError):
        load_radial_field_csv(zpath, grid)
    with pytest.raises(FieldError):
        load_radial_field_csv(path, make_radial_grid(3, 1.0, M=16))


def test_grid_field_csv_header(tmp_path):
    grid = make_cartesian_grid("box", n=8)
    u = GridField2D.zeros(grid)
    path = save_field_csv(u, tmp_path / "u2d.csv")
    header = path.read_text().splitlines()[0]
    assert header == "x,y,u"


def test_field_to_dict():
    grid = make_radial_grid(2, 1.0, M=8)
    data = field_to_dict(cone(grid))
    assert data["grid"]["kind"] == "radial"
    assert len(data["values"]) == 9


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
