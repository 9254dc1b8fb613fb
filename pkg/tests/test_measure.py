"""Tests for discrete measures."""

import numpy as np
import pytest
from pathlib import Path
import tempfile
from scipy import integrate
from app.exceptions import ContractError, SerializationError
from app.measure import (
    DiscreteMeasure,
    point_measure,
    uniform_sphere_measure,
    interior_density_exponent,
    ball_interior_density,
    ball_interior_measure,
    rescale_measure,
    normalize,
)


def test_point_measure_defaults_to_unit_charges():
    """Test point charges without patches."""
    mu = point_measure([[0.0, 0.0], [1.0, 0.0]])
    assert len(mu) == 2
    assert mu.total_mass == 2.0
    assert not mu.has_patches
    assert mu.dimension == 2


def test_measure_is_immutable():
    mu = point_measure([[0.0, 0.0]])
    with pytest.raises(ValueError):
        mu.weights[0] = 5.0


def test_measure_rejects_bad_input():
    """Invalid measures raise ContractError."""
    with pytest.raises(ContractError, match="weights for"):
        DiscreteMeasure([[0.0, 0.0], [1.0, 0.0]], [1.0])
    with pytest.raises(ContractError, match="pairwise distinct"):
        point_measure([[0.0, 0.0], [0.0, 0.0]])
    with pytest.raises(ContractError, match="finite"):
        point_measure([[0.0, np.nan]])
    with pytest.raises(ContractError, match="patch_dims given"):
        DiscreteMeasure([[0.0, 0.0]], [1.0], None, [1])


def test_uniform_sphere_measure():
    """Uniform sphere measure is a probability measure with total area patches."""
    mu = uniform_sphere_measure(3, 2.0, 500)
    assert mu.is_probability()
    assert np.sum(mu.patch_areas) == pytest.approx(4.0 * np.pi * 4.0)
    assert np.allclose(np.linalg.norm(mu.nodes, axis=1), 2.0)
    assert np.all(mu.patch_dims == 2)


def test_uniform_sphere_measure_contract():
    with pytest.raises(ContractError, match="at least 12"):
        uniform_sphere_measure(3, 1.0, 11)
    with pytest.raises(ContractError, match="Radius"):
        uniform_sphere_measure(2, 0.0, 100)


def test_interior_density_normalized():
    """The optimal interior density of the ball integrates to one."""
    d, alpha = 3, 2.0
    assert interior_density_exponent(d, alpha) == -0.5

    def radial(r):
        return ball_interior_density(d, alpha, np.array([[r, 0.0, 0.0]]))[0] * 4.0 * np.pi * r * r

    total, _ = integrate.quad(radial, 0.0, 1.0, limit=200)
    assert total == pytest.approx(1.0, rel=1e-6)


def test_interior_density_profile():
    """Density ratio between |x| = 0.9 and the center is 0.19^e."""
    x = np.array([[0.0, 0.0, 0.0], [0.9, 0.0, 0.0]])
    density = ball_interior_density(3, 1.5, x)
    assert density[1] / density[0] == pytest.approx(0.19 ** -0.75, rel=1e-12)


def test_interior_density_regime():
    with pytest.raises(ContractError, match="d-2 < alpha < d"):
        ball_interior_density(3, 1.0, np.zeros((1, 3)))


def test_ball_interior_measure():
    """Interior measure is a probability measure on volume cells inside the ball."""
    mu = ball_interior_measure(3, 1.5, 2000)
    assert mu.is_probability()
    assert np.all(mu.patch_dims == 3)
    assert np.max(np.linalg.norm(mu.nodes, axis=1)) < 1.0
    # Density blows up toward the boundary, so outer nodes carry more weight per cell
    densities = mu.densities()
    radii = np.linalg.norm(mu.nodes, axis=1)
    assert densities[np.argmax(radii)] > densities[np.argmin(radii)]


def test_rescale_measure():
    """Pushing forward scales nodes and patch measures by their dimension."""
    mu = uniform_sphere_measure(3, 1.0, 100)
    scaled = rescale_measure(mu, 3.0)
    assert np.allclose(scaled.nodes, 3.0 * mu.nodes)
    assert np.allclose(scaled.weights, mu.weights)
    assert np.allclose(scaled.patch_areas, 9.0 * mu.patch_areas)
    with pytest.raises(ContractError):
        rescale_measure(mu, -1.0)


def test_normalize():
    mu = point_measure([[0.0, 0.0], [1.0, 0.0]], [1.0, 3.0])
    assert np.allclose(normalize(mu).weights, [0.25, 0.75])
    with pytest.raises(ContractError, match="negative"):
        normalize(mu.with_weights([1.0, -1.0]))


def test_concatenate():
    a = uniform_sphere_measure(3, 1.0, 20)
    b = uniform_sphere_measure(3, 2.0, 30)
    joined = DiscreteMeasure.concatenate([a, b])
    assert len(joined) == 50
    assert joined.total_mass == pytest.approx(2.0)
    with pytest.raises(ContractError, match="mix"):
        DiscreteMeasure.concatenate([a, point_measure([[5.0, 5.0, 5.0]])])


def test_csv_round_trip():
    """Test saving and loading a measure."""
    mu = uniform_sphere_measure(2, 1.0, 16)
    with tempfile.TemporaryDirectory() as tmpdir:
        path = Path(tmpdir) / 'measure.csv'
        mu.to_csv(str(path))
        loaded = DiscreteMeasure.from_csv(str(path))
    assert np.allclose(loaded.nodes, mu.nodes)
    assert np.allclose(loaded.weights, mu.weights)
    assert np.array_equal(loaded.patch_dims, mu.patch_dims)


def test_from_csv_missing_file():
    with pytest.raises(SerializationError, match="not found"):
        DiscreteMeasure.from_csv('/nonexistent/measure.csv')
