"""Node lattices on spheres, circles and balls."""

from functools import lru_cache
from typing import Tuple
import numpy as np
from scipy.spatial import SphericalVoronoi
from scipy.special import gamma

GOLDEN_RATIO = (1.0 + 5.0 ** 0.5) / 2.0
LLOYD_SWEEPS = 12


def unit_ball_volume(d: int) -> float:
    """Volume ω_d of the unit ball in R^d."""
    return float(np.pi ** (d / 2.0) / gamma(d / 2.0 + 1.0))


def unit_sphere_area(d: int) -> float:
    """Surface measure d·ω_d of the unit sphere in R^d."""
    return d * unit_ball_volume(d)


def fibonacci_sphere(n: int, twist: float = 0.0) -> np.ndarray:
    """
    Quasi-uniform points on the unit sphere S^2 (spherical Fibonacci lattice).

    Args:
        n: Number of points
        twist: Azimuthal offset in radians, used to decorrelate stacked shells

    Returns:
        Array of shape (n, 3)
    """
    indices = np.arange(n, dtype=float) + 0.5
    polar = np.arccos(1.0 - 2.0 * indices / n)
    azimuth = 2.0 * np.pi * indices / GOLDEN_RATIO + twist

    return np.column_stack((
        np.cos(azimuth) * np.sin(polar),
        np.sin(azimuth) * np.sin(polar),
        np.cos(polar),
    ))


def circle_points(n: int, offset: float = 0.0) -> np.ndarray:
    """Equispaced points on the unit circle, starting at angle offset·2π/n."""
    angles = 2.0 * np.pi * (np.arange(n) + offset) / n
    return np.column_stack((np.cos(angles), np.sin(angles)))


def sphere_points(d: int, n: int, twist: float = 0.0) -> np.ndarray:
    """Near-equal-area points on the unit sphere of R^d for d in {2, 3}."""
    if d == 2:
        return circle_points(n, offset=twist * n / (2.0 * np.pi))
    if d == 3:
        return fibonacci_sphere(n, twist)
    raise ValueError(f"Unsupported dimension {d}")


def _voronoi(points: np.ndarray) -> SphericalVoronoi:
    voronoi = SphericalVoronoi(points, radius=1.0, center=np.zeros(3))
    voronoi.sort_vertices_of_regions()
    return voronoi


def _cell_centroids(voronoi: SphericalVoronoi) -> np.ndarray:
    """Area-weighted centroids of the Voronoi cells, projected back to the sphere."""
    centroids = np.empty_like(voronoi.points)
    for i, region in enumerate(voronoi.regions):
        generator = voronoi.points[i]
        a = voronoi.vertices[region]
        b = np.roll(a, -1, axis=0)
        fan = np.linalg.norm(np.cross(a - generator, b - generator), axis=1)
        centroids[i] = fan @ (generator + a + b) / (3.0 * np.sum(fan))
    return centroids / np.linalg.norm(centroids, axis=1)[:, None]


@lru_cache(maxsize=32)
def _relaxed_sphere_cells(n: int, sweeps: int) -> Tuple[np.ndarray, np.ndarray]:
    points = fibonacci_sphere(n)
    for _ in range(sweeps):
        points = _cell_centroids(_voronoi(points))
    areas = _voronoi(points).calculate_areas()
    points.setflags(write=False)
    areas.setflags(write=False)
    return points, areas


def sphere_cells(d: int, n: int, sweeps: int = LLOYD_SWEEPS) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes on the unit sphere with the measure of the cell each node stands for.

    d=3 starts from the Fibonacci lattice, moves every node to the centroid of
    its spherical Voronoi cell for a few Lloyd sweeps (the spiral centers at
    the poles are irregular) and returns the Voronoi cell areas. d=2 uses
    equispaced points with equal arcs.

    Returns:
        (points of shape (n, d), cell measures summing to the sphere area)
    """
    if d == 2:
        return circle_points(n), np.full(n, 2.0 * np.pi / n)
    if d != 3:
        raise ValueError(f"Unsupported dimension {d}")
    points, areas = _relaxed_sphere_cells(n, sweeps)
    return points.copy(), areas.copy()


def sphere_product_grid(d: int, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    High-order product quadrature on the unit sphere.

    d=3 uses Gauss-Legendre in cos(polar) times the trapezoid rule in azimuth,
    d=2 the trapezoid rule on the circle. Both integrate band-limited
    functions exactly and analytic functions spectrally.

    Args:
        d: Ambient dimension (2 or 3)
        n: Number of polar nodes (d=3) or circle nodes (d=2)

    Returns:
        (points, weights) with weights summing to the sphere area
    """
    if d == 2:
        return circle_points(n), np.full(n, 2.0 * np.pi / n)
    if d != 3:
        raise ValueError(f"Unsupported dimension {d}")

    cos_polar, gl_weights = np.polynomial.legendre.leggauss(n)
    n_azimuth = 2 * n
    azimuth = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
    sin_polar = np.sqrt(1.0 - cos_polar ** 2)

    ct, az = np.meshgrid(cos_polar, azimuth, indexing='ij')
    st = np.meshgrid(sin_polar, azimuth, indexing='ij')[0]
    points = np.column_stack((
        (st * np.cos(az)).ravel(),
        (st * np.sin(az)).ravel(),
        ct.ravel(),
    ))
    weights = np.repeat(gl_weights * (2.0 * np.pi / n_azimuth), n_azimuth)
    return points, weights


def stratified_ball(d: int, n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """
    Radially stratified cells filling the unit ball.

    Shells of equal radial step h carry a node count proportional to their
    volume; nodes sit on the mid-radius of each shell, so the outermost layer
    lies at 1 - h/2.

    Args:
        d: Ambient dimension (2 or 3)
        n: Target number of nodes

    Returns:
        (points, cell_volumes, shell_edges, h) where shell_edges[k] and
        shell_edges[k + 1] bound the shell of the k-th layer
    """
    volume = unit_ball_volume(d)
    n_shells = max(2, int(np.ceil(1.0 / (volume / n) ** (1.0 / d))))
    h = 1.0 / n_shells
    edges = np.linspace(0.0, 1.0, n_shells + 1)

    points, cells = [], []
    for k in range(n_shells):
        shell_volume = volume * (edges[k + 1] ** d - edges[k] ** d)
        count = max(1, int(round(n * shell_volume / volume)))
        radius = 0.5 * (edges[k] + edges[k + 1])
        twist = 2.0 * np.pi * k / GOLDEN_RATIO
        points.append(radius * sphere_points(d, count, twist))
        cells.append(np.full(count, shell_volume / count))

    return np.vstack(points), np.concatenate(cells), edges, h
