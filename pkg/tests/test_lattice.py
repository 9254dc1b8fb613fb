"""Tests for node lattices."""

import numpy as np
import pytest
from app.lattice import (
    fibonacci_sphere,
    circle_points,
    sphere_points,
    sphere_cells,
    sphere_product_grid,
    stratified_ball,
    unit_ball_volume,
    unit_sphere_area,
)


def test_unit_ball_volume():
    """Test closed-form ball volumes."""
    assert unit_ball_volume(2) == pytest.approx(np.pi)
    assert unit_ball_volume(3) == pytest.approx(4.0 * np.pi / 3.0)
    assert unit_sphere_area(3) == pytest.approx(4.0 * np.pi)
    assert unit_sphere_area(2) == pytest.approx(2.0 * np.pi)


def test_fibonacci_sphere_on_unit_sphere():
    """Fibonacci nodes are unit vectors with a vanishing mean."""
    points = fibonacci_sphere(1000)
    assert points.shape == (1000, 3)
    assert np.allclose(np.linalg.norm(points, axis=1), 1.0)
    assert np.linalg.norm(points.mean(axis=0)) < 1e-2


def test_circle_points_equispaced():
    points = circle_points(8)
    assert np.allclose(points[0], [1.0, 0.0])
    gaps = np.linalg.norm(np.diff(np.vstack((points, points[:1])), axis=0), axis=1)
    assert np.allclose(gaps, gaps[0])


def test_sphere_points_rejects_dimension():
    with pytest.raises(ValueError, match="Unsupported dimension"):
        sphere_points(4, 10)


def test_sphere_cells_partition_the_sphere():
    """Voronoi cells of the relaxed lattice tile the sphere with near-equal areas."""
    points, areas = sphere_cells(3, 500)
    assert points.shape == (500, 3)
    assert np.allclose(np.linalg.norm(points, axis=1), 1.0)
    assert np.sum(areas) == pytest.approx(4.0 * np.pi, rel=1e-9)
    assert np.max(areas) / np.min(areas) < 1.5
    # Cached arrays are handed out as copies
    areas[0] = 0.0
    assert sphere_cells(3, 500)[1][0] > 0.0


def test_sphere_cells_circle():
    points, arcs = sphere_cells(2, 12)
    assert np.allclose(points, circle_points(12))
    assert np.allclose(arcs, 2.0 * np.pi / 12)
    with pytest.raises(ValueError, match="Unsupported dimension"):
        sphere_cells(4, 100)


@pytest.mark.parametrize("d", [2, 3])
def test_product_grid_integrates_polynomials(d):
    """Product quadrature integrates low-degree polynomials exactly."""
    points, weights = sphere_product_grid(d, 16)
    assert np.sum(weights) == pytest.approx(unit_sphere_area(d))
    # Integral of x_0^2 is |S|/d
    assert np.sum(weights * points[:, 0] ** 2) == pytest.approx(unit_sphere_area(d) / d)


@pytest.mark.parametrize("d", [2, 3])
def test_stratified_ball_fills_volume(d):
    """Cells of the stratification add up to the ball volume."""
    points, cells, edges, h = stratified_ball(d, 2000)
    assert np.sum(cells) == pytest.approx(unit_ball_volume(d))
    assert len(points) == len(cells)
    assert np.max(np.linalg.norm(points, axis=1)) == pytest.approx(1.0 - h / 2.0)
    assert edges[0] == 0.0 and edges[-1] == 1.0
