"""Parametric shapes, surface quadrature, perimeter/volume/deficit and the delta-ball check."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Tuple, Union
import numpy as np
from dotenv import dotenv_values
from scipy.spatial import ConvexHull
from scipy.spatial.distance import pdist
from scipy.special import sph_harm_y

from app.exceptions import ContractError, ValidationError
from app.input_validators import InputValidator
from app.lattice import (
    sphere_cells,
    sphere_points,
    sphere_product_grid,
    stratified_ball,
    unit_ball_volume,
    unit_sphere_area,
)

DEFAULT_DEGREE = 8
FD_STEP = 1e-4
CURVATURE_OVERSAMPLING = 4

Mode = Tuple[int, int]


@dataclass(frozen=True)
class Ball:
    """Closed ball with given center and radius."""

    center: Tuple[float, ...]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, 'center', tuple(float(c) for c in self.center))
        if len(self.center) < 2:
            raise ContractError("Ball center needs at least two coordinates")
        if self.radius <= 0:
            raise ContractError(f"Ball radius must be positive, got {self.radius}")

    @property
    def dimension(self) -> int:
        return len(self.center)

    @classmethod
    def unit(cls, d: int = 3) -> 'Ball':
        return cls((0.0,) * d, 1.0)


@dataclass(frozen=True)
class BallUnion:
    """Finite union of pairwise disjoint balls (touching balls are rejected)."""

    balls: Tuple[Ball, ...]

    def __post_init__(self):
        balls = tuple(self.balls)
        if not balls:
            raise ContractError("BallUnion needs at least one ball")
        if len({b.dimension for b in balls}) != 1:
            raise ContractError("All balls must live in the same dimension")
        for i in range(len(balls)):
            for j in range(i + 1, len(balls)):
                gap = _center_distance(balls[i], balls[j]) - balls[i].radius - balls[j].radius
                if gap <= 0:
                    raise ContractError(f"Balls {i} and {j} overlap or touch")
        object.__setattr__(self, 'balls', balls)

    @property
    def dimension(self) -> int:
        return self.balls[0].dimension


@dataclass(frozen=True)
class NearlySpherical:
    """
    Star-shaped set whose boundary is the radial graph R(x) = base_radius + phi(x)
    over the unit sphere, phi a finite expansion in real orthonormal spherical
    harmonics (d=3) or Fourier modes (d=2).

    Coefficients are keyed by (l, m). In d=2, (l, l) is cos(l t)/sqrt(pi) and
    (l, -l) is sin(l t)/sqrt(pi).
    """

    base_radius: float
    coeffs: Tuple[Tuple[Mode, float], ...] = ()
    dimension: int = 3

    def __post_init__(self):
        items = self.coeffs.items() if isinstance(self.coeffs, dict) else self.coeffs
        coeffs = tuple(sorted(((int(l), int(m)), float(c)) for (l, m), c in items))
        object.__setattr__(self, 'coeffs', coeffs)
        if self.dimension not in (2, 3):
            raise ContractError(f"NearlySpherical supports d in {{2, 3}}, got {self.dimension}")
        if self.base_radius <= 0:
            raise ContractError(f"Base radius must be positive, got {self.base_radius}")
        for (l, m), _ in coeffs:
            _check_mode(self.dimension, l, m)
        sup = self.sup_phi()
        if sup >= self.base_radius:
            raise ContractError(
                f"Graph condition violated: sup|phi| = {sup:.4g} >= base radius {self.base_radius:.4g}"
            )

    @property
    def coefficient_dict(self) -> Dict[Mode, float]:
        return dict(self.coeffs)

    @property
    def degree(self) -> int:
        return max((l for (l, _), _ in self.coeffs), default=0)

    def phi(self, directions: np.ndarray) -> np.ndarray:
        """phi at unit directions (N, d)."""
        values = np.zeros(len(directions))
        for (l, m), c in self.coeffs:
            values += c * real_harmonic(self.dimension, l, m, directions)
        return values

    def radius_at(self, directions: np.ndarray) -> np.ndarray:
        return self.base_radius + self.phi(directions)

    def sup_phi(self) -> float:
        if not self.coeffs:
            return 0.0
        points, _ = sphere_product_grid(self.dimension, 8 * self.degree + 32)
        return float(np.max(np.abs(self.phi(points))))

    def unit_perturbation(self) -> Dict[Mode, float]:
        """Coefficients of phi with R = 1 + phi (the base radius moves into the l=0 mode)."""
        coeffs = self.coefficient_dict
        offset = (self.base_radius - 1.0) * np.sqrt(unit_sphere_area(self.dimension))
        coeffs[(0, 0)] = coeffs.get((0, 0), 0.0) + offset
        return coeffs


@dataclass(frozen=True)
class Cube:
    """Axis-aligned cube (square in d=2)."""

    side: float
    dimension: int = 3
    center: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.side <= 0:
            raise ContractError(f"Cube side must be positive, got {self.side}")
        if self.dimension not in (2, 3):
            raise ContractError(f"Cube supports d in {{2, 3}}, got {self.dimension}")
        center = self.center if self.center is not None else (0.0,) * self.dimension
        if len(center) != self.dimension:
            raise ContractError("Cube center has the wrong dimension")
        object.__setattr__(self, 'center', tuple(float(c) for c in center))


Shape = Union[Ball, BallUnion, NearlySpherical, Cube]


@dataclass(frozen=True)
class SurfaceQuadrature:
    """Nodes on a boundary with their patch areas and outward unit normals."""

    points: np.ndarray
    areas: np.ndarray
    normals: np.ndarray
    patch_dims: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.patch_dims is None:
            object.__setattr__(self, 'patch_dims', np.full(len(self.areas), self.points.shape[1] - 1))
        if np.any(self.areas <= 0):
            raise ContractError("Surface patch areas must be positive")

    def __len__(self) -> int:
        return len(self.areas)

    @property
    def total_area(self) -> float:
        return float(np.sum(self.areas))


class Seminorms(NamedTuple):
    """Squared spectral seminorms of a perturbation."""

    l2: float
    h1: float
    hs: float


def _center_distance(a: Ball, b: Ball) -> float:
    return float(np.linalg.norm(np.subtract(a.center, b.center)))


def _check_mode(d: int, l: int, m: int):
    if l < 0:
        raise ContractError(f"Harmonic degree must be nonnegative, got {l}")
    if d == 3 and abs(m) > l:
        raise ContractError(f"Invalid spherical harmonic ({l}, {m})")
    if d == 2 and not (m == l or m == -l):
        raise ContractError(f"Invalid Fourier mode ({l}, {m}); expected m = +l or -l")


def real_harmonic(d: int, l: int, m: int, directions: np.ndarray) -> np.ndarray:
    """
    Real orthonormal harmonic Y_{l,m} at unit directions.

    d=3 uses m > 0 for cosine and m < 0 for sine terms; d=2 uses cos/sin(l t)
    normalized on the unit circle.
    """
    directions = np.atleast_2d(directions)
    if d == 2:
        angle = np.arctan2(directions[:, 1], directions[:, 0])
        if l == 0:
            return np.full(len(angle), 1.0 / np.sqrt(2.0 * np.pi))
        if m > 0:
            return np.cos(l * angle) / np.sqrt(np.pi)
        return np.sin(l * angle) / np.sqrt(np.pi)

    polar = np.arccos(np.clip(directions[:, 2], -1.0, 1.0))
    azimuth = np.arctan2(directions[:, 1], directions[:, 0])
    complex_value = sph_harm_y(l, abs(m), polar, azimuth)
    if m > 0:
        return np.sqrt(2.0) * (-1.0) ** m * complex_value.real
    if m < 0:
        return np.sqrt(2.0) * (-1.0) ** m * complex_value.imag
    return complex_value.real


def harmonic_modes(d: int, max_degree: int) -> List[Mode]:
    """All (l, m) keys up to the given degree."""
    if d == 2:
        return [(0, 0)] + [(l, s * l) for l in range(1, max_degree + 1) for s in (1, -1)]
    return [(l, m) for l in range(max_degree + 1) for m in range(-l, l + 1)]


def project_onto_harmonics(d: int, values_fn, max_degree: int) -> Dict[Mode, float]:
    """Coefficients of a function on the unit sphere up to max_degree."""
    n = 2 * max_degree + 8 if d == 3 else 8 * max_degree + 32
    points, weights = sphere_product_grid(d, n)
    values = values_fn(points)
    return {
        mode: float(np.sum(values * real_harmonic(d, mode[0], mode[1], points) * weights))
        for mode in harmonic_modes(d, max_degree)
    }


# --- radial graph calculus ------------------------------------------------

def _level_function(shape: NearlySpherical, y: np.ndarray) -> np.ndarray:
    """F(y) = |y| - R(y/|y|); negative inside the set."""
    norms = np.linalg.norm(y, axis=1)
    return norms - shape.radius_at(y / norms[:, None])


def _gradient_and_hessian(shape: NearlySpherical, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Central-difference gradient and Hessian of the level function at points y."""
    d = y.shape[1]
    h = FD_STEP
    eye = np.eye(d)
    f0 = _level_function(shape, y)
    gradient = np.empty_like(y)
    hessian = np.empty((len(y), d, d))

    plus = [_level_function(shape, y + h * eye[i]) for i in range(d)]
    minus = [_level_function(shape, y - h * eye[i]) for i in range(d)]
    for i in range(d):
        gradient[:, i] = (plus[i] - minus[i]) / (2.0 * h)
        hessian[:, i, i] = (plus[i] - 2.0 * f0 + minus[i]) / (h * h)
        for j in range(i + 1, d):
            pp = _level_function(shape, y + h * (eye[i] + eye[j]))
            pm = _level_function(shape, y + h * (eye[i] - eye[j]))
            mp = _level_function(shape, y + h * (-eye[i] + eye[j]))
            mm = _level_function(shape, y - h * (eye[i] + eye[j]))
            hessian[:, i, j] = hessian[:, j, i] = (pp - pm - mp + mm) / (4.0 * h * h)
    return gradient, hessian


def _tangential_gradient(shape: NearlySpherical, directions: np.ndarray) -> np.ndarray:
    """Gradient of R along the unit sphere (the 0-homogeneous extension's gradient)."""
    h = FD_STEP
    d = directions.shape[1]
    gradient = np.empty_like(directions)
    for i in range(d):
        step = h * np.eye(d)[i]
        plus = directions + step
        minus = directions - step
        gradient[:, i] = (
            shape.radius_at(plus / np.linalg.norm(plus, axis=1)[:, None])
            - shape.radius_at(minus / np.linalg.norm(minus, axis=1)[:, None])
        ) / (2.0 * h)
    return gradient


def _area_element(shape: NearlySpherical, directions: np.ndarray) -> np.ndarray:
    """R^(d-2) * sqrt(R^2 + |grad_tau R|^2), the Jacobian of the radial graph."""
    radius = shape.radius_at(directions)
    grad = _tangential_gradient(shape, directions)
    return radius ** (shape.dimension - 2) * np.sqrt(radius ** 2 + np.sum(grad ** 2, axis=1))


def _graph_resolution(shape: NearlySpherical) -> int:
    if shape.dimension == 3:
        return max(48, 4 * shape.degree + 16)
    return max(512, 16 * shape.degree + 64)


def principal_curvatures(shape: Shape, N: int = 2000) -> np.ndarray:
    """
    Principal curvatures sampled on the boundary, shape (n, d-1).

    Cubes have unbounded curvature at their edges and report inf.
    """
    if isinstance(shape, Ball):
        return np.full((1, shape.dimension - 1), 1.0 / shape.radius)
    if isinstance(shape, BallUnion):
        return np.vstack([principal_curvatures(b) for b in shape.balls])
    if isinstance(shape, Cube):
        return np.full((1, shape.dimension - 1), np.inf)

    d = shape.dimension
    directions = sphere_points(d, N)
    points = shape.radius_at(directions)[:, None] * directions
    gradient, hessian = _gradient_and_hessian(shape, points)
    norms = np.linalg.norm(gradient, axis=1)
    normals = gradient / norms[:, None]

    if d == 2:
        tangent = np.column_stack((-normals[:, 1], normals[:, 0]))
        kappa = np.einsum('ni,nij,nj->n', tangent, hessian, tangent) / norms
        return kappa[:, None]

    helper = np.where(np.abs(normals[:, 2:3]) < 0.9, np.array([[0.0, 0.0, 1.0]]), np.array([[1.0, 0.0, 0.0]]))
    t1 = helper - np.sum(helper * normals, axis=1)[:, None] * normals
    t1 /= np.linalg.norm(t1, axis=1)[:, None]
    t2 = np.cross(normals, t1)
    basis = np.stack((t1, t2), axis=2)
    shape_operator = np.einsum('nia,nij,njb->nab', basis, hessian, basis) / norms[:, None, None]
    return np.linalg.eigvalsh(shape_operator)


# --- quadrature, perimeter, volume -----------------------------------------

def _split_count(N: int, fractions: np.ndarray) -> np.ndarray:
    counts = np.floor(N * fractions).astype(int)
    counts[np.argmax(fractions)] += N - int(np.sum(counts))
    return counts


def surface_quadrature(shape: Shape, N: int) -> SurfaceQuadrature:
    """
    Nodes on the boundary with areas and outward normals.

    Raises:
        ContractError: If a connected component would get fewer than 12 nodes
    """
    if isinstance(shape, Ball):
        if N < 12:
            raise ContractError(f"Need at least 12 nodes per component, got {N}")
        d = shape.dimension
        if d not in (2, 3):
            raise ContractError(f"Surface quadrature supports d in {{2, 3}}, got {d}")
        directions, cells = sphere_cells(d, N)
        return SurfaceQuadrature(
            shape.radius * directions + np.asarray(shape.center),
            cells * shape.radius ** (d - 1),
            directions,
        )

    if isinstance(shape, BallUnion):
        areas = np.array([perimeter(b) for b in shape.balls])
        counts = _split_count(N, areas / np.sum(areas))
        parts = [surface_quadrature(b, int(n)) for b, n in zip(shape.balls, counts)]
        return SurfaceQuadrature(
            np.vstack([p.points for p in parts]),
            np.concatenate([p.areas for p in parts]),
            np.vstack([p.normals for p in parts]),
        )

    if isinstance(shape, Cube):
        return _cube_quadrature(shape, N)

    if N < 12:
        raise ContractError(f"Need at least 12 nodes, got {N}")
    d = shape.dimension
    directions, cells = sphere_cells(d, N)
    radius = shape.radius_at(directions)
    tangential = _tangential_gradient(shape, directions)
    normals = directions - tangential / radius[:, None]
    normals /= np.linalg.norm(normals, axis=1)[:, None]
    areas = _area_element(shape, directions) * cells
    return SurfaceQuadrature(radius[:, None] * directions, areas, normals)


def _cube_quadrature(cube: Cube, N: int) -> SurfaceQuadrature:
    d = cube.dimension
    faces = 2 * d
    if N < 12:
        raise ContractError(f"Need at least 12 nodes, got {N}")
    half = cube.side / 2.0
    points, areas, normals = [], [], []
    per_face = N // faces
    grid = per_face if d == 2 else max(2, int(round(np.sqrt(per_face))))
    cells = (np.arange(grid) + 0.5) / grid * cube.side - half
    if d == 2:
        tangential = cells[:, None]
    else:
        u, v = np.meshgrid(cells, cells, indexing='ij')
        tangential = np.column_stack((u.ravel(), v.ravel()))
    patch = (cube.side / grid) ** (d - 1)

    for axis in range(d):
        others = [i for i in range(d) if i != axis]
        for sign in (1.0, -1.0):
            face = np.empty((len(tangential), d))
            face[:, axis] = sign * half
            face[:, others] = tangential
            normal = np.zeros((len(tangential), d))
            normal[:, axis] = sign
            points.append(face)
            normals.append(normal)
            areas.append(np.full(len(tangential), patch))

    return SurfaceQuadrature(
        np.vstack(points) + np.asarray(cube.center),
        np.concatenate(areas),
        np.vstack(normals),
    )


def perimeter(shape: Shape) -> float:
    """Perimeter P(E): analytic for balls and cubes, spectral quadrature for graphs."""
    if isinstance(shape, Ball):
        return unit_sphere_area(shape.dimension) * shape.radius ** (shape.dimension - 1)
    if isinstance(shape, BallUnion):
        return float(sum(perimeter(b) for b in shape.balls))
    if isinstance(shape, Cube):
        return 2.0 * shape.dimension * shape.side ** (shape.dimension - 1)
    directions, weights = sphere_product_grid(shape.dimension, _graph_resolution(shape))
    return float(np.sum(_area_element(shape, directions) * weights))


def volume(shape: Shape) -> float:
    """Volume |E|; (1/d) * integral of R^d over the sphere for graphs."""
    if isinstance(shape, Ball):
        return unit_ball_volume(shape.dimension) * shape.radius ** shape.dimension
    if isinstance(shape, BallUnion):
        return float(sum(volume(b) for b in shape.balls))
    if isinstance(shape, Cube):
        return shape.side ** shape.dimension
    d = shape.dimension
    directions, weights = sphere_product_grid(d, _graph_resolution(shape))
    return float(np.sum(shape.radius_at(directions) ** d * weights) / d)


def barycenter(shape: Shape) -> np.ndarray:
    """Volumetric barycenter of E."""
    if isinstance(shape, Ball):
        return np.asarray(shape.center)
    if isinstance(shape, BallUnion):
        volumes = np.array([volume(b) for b in shape.balls])
        centers = np.array([b.center for b in shape.balls])
        return volumes @ centers / np.sum(volumes)
    if isinstance(shape, Cube):
        return np.asarray(shape.center)
    d = shape.dimension
    directions, weights = sphere_product_grid(d, _graph_resolution(shape))
    moments = (shape.radius_at(directions) ** (d + 1) * weights) @ directions / (d + 1)
    return moments / volume(shape)


def dilate(shape: Shape, factor: float) -> Shape:
    """Image of E under x -> factor * x."""
    if factor <= 0:
        raise ContractError(f"Dilation factor must be positive, got {factor}")
    if isinstance(shape, Ball):
        return Ball(tuple(factor * np.asarray(shape.center)), factor * shape.radius)
    if isinstance(shape, BallUnion):
        return BallUnion(tuple(dilate(b, factor) for b in shape.balls))
    if isinstance(shape, Cube):
        return Cube(factor * shape.side, shape.dimension, tuple(factor * np.asarray(shape.center)))
    return NearlySpherical(
        factor * shape.base_radius,
        {mode: factor * c for mode, c in shape.coeffs},
        shape.dimension,
    )


def translate(shape: Shape, shift) -> Shape:
    """Image of E under x -> x + shift (graphs are re-expressed over the sphere)."""
    shift = np.asarray(shift, dtype=float)
    if isinstance(shape, Ball):
        return Ball(tuple(np.asarray(shape.center) + shift), shape.radius)
    if isinstance(shape, BallUnion):
        return BallUnion(tuple(translate(b, shift) for b in shape.balls))
    if isinstance(shape, Cube):
        return Cube(shape.side, shape.dimension, tuple(np.asarray(shape.center) + shift))
    return _regraph(shape, -shift)


def _regraph(shape: NearlySpherical, origin: np.ndarray, iterations: int = 200) -> NearlySpherical:
    """
    Express the boundary of E as a radial graph around a new origin.

    Raises:
        ContractError: If the boundary is not a graph over the new origin
    """
    d = shape.dimension
    degree = max(shape.degree, 1) + 4

    def new_radius(directions: np.ndarray) -> np.ndarray:
        t = shape.radius_at(directions).copy()
        for _ in range(iterations):
            q = t[:, None] * directions + origin
            norms = np.linalg.norm(q, axis=1)
            residual = norms - shape.radius_at(q / norms[:, None])
            t -= residual
            if np.max(np.abs(residual)) < 1e-13 * shape.base_radius:
                break
        else:
            raise ContractError("Re-graphing did not converge; the perturbation is too large")
        if np.any(t <= 0):
            raise ContractError("Re-graphing failed: the new origin is not inside the set")
        return t - shape.base_radius

    coeffs = project_onto_harmonics(d, new_radius, degree)
    coeffs = {mode: c for mode, c in coeffs.items() if abs(c) > 1e-15}
    return NearlySpherical(shape.base_radius, coeffs, d)


def enforce_volume(shape: Shape, m: float) -> Shape:
    """
    Dilate E about the origin so that |E| = m.

    Volume scales exactly with the d-th power of the dilation, so the factor
    is (m / |E|)^(1/d).
    """
    if m <= 0:
        raise ContractError(f"Target volume must be positive, got {m}")
    factor = (m / volume(shape)) ** (1.0 / _dimension(shape))
    if abs(factor - 1.0) < 1e-15:
        return shape
    return dilate(shape, factor)


def recenter_barycenter(shape: Shape, tol: float = 1e-10, max_rounds: int = 5) -> Shape:
    """
    Translate E so that its barycenter sits at the origin.

    Raises:
        ContractError: If the re-graphed boundary fails the graph condition
    """
    for _ in range(max_rounds):
        center = barycenter(shape)
        if np.linalg.norm(center) <= tol:
            return shape
        shape = translate(shape, -center)
    residual = float(np.linalg.norm(barycenter(shape)))
    if residual > 1e-8:
        raise ContractError(f"Barycenter still off the origin by {residual:.3g} after re-graphing")
    return shape


def normalize_shape(shape: Shape) -> Shape:
    """Barycenter at the origin and volume equal to the unit ball's."""
    shape = recenter_barycenter(shape)
    return enforce_volume(shape, unit_ball_volume(_dimension(shape)))


def _dimension(shape: Shape) -> int:
    return shape.dimension


def isoperimetric_deficit(shape: Shape, volume_tol: float = 1e-8) -> float:
    """
    D(E) = P(E) - P(B) for a set of the unit ball's volume.

    Raises:
        ContractError: If |E| differs from omega_d by more than volume_tol (relative)
    """
    d = _dimension(shape)
    target = unit_ball_volume(d)
    if abs(volume(shape) - target) > volume_tol * target:
        raise ContractError(
            f"Deficit needs volume {target:.10g}, got {volume(shape):.10g}; call enforce_volume first"
        )
    return perimeter(shape) - unit_sphere_area(d)


def delta_ball_check(shape: Shape, delta: float, N: int = 2000) -> bool:
    """
    Curvature form of the delta-ball condition.

    Graphs are checked on a lattice CURVATURE_OVERSAMPLING times denser than N.
    For ball unions every radius must be at least delta and every gap at
    least 2*delta (room for the exterior balls).
    """
    if delta <= 0:
        raise ContractError(f"delta must be positive, got {delta}")
    if isinstance(shape, Ball):
        return shape.radius >= delta
    if isinstance(shape, BallUnion):
        if any(b.radius < delta for b in shape.balls):
            return False
        balls = shape.balls
        for i in range(len(balls)):
            for j in range(i + 1, len(balls)):
                gap = _center_distance(balls[i], balls[j]) - balls[i].radius - balls[j].radius
                if gap < 2.0 * delta:
                    return False
        return True
    if isinstance(shape, Cube):
        return False
    kappa = principal_curvatures(shape, CURVATURE_OVERSAMPLING * N)
    return bool(np.max(np.abs(kappa)) <= (1.0 + 1e-9) / delta)


def delta_ball_threshold(l: int, m: int, delta: float, d: int = 3, base_radius: float = 1.0,
                         iterations: int = 40, N: int = 500) -> float:
    """Largest amplitude of a single mode (l, m) that keeps the delta-ball check true."""
    _check_mode(d, l, m)
    points, _ = sphere_product_grid(d, 8 * l + 32)
    peak = float(np.max(np.abs(real_harmonic(d, l, m, points))))
    low, high = 0.0, 0.99 * base_radius / peak

    def passes(amplitude: float) -> bool:
        shape = NearlySpherical(base_radius, {(l, m): amplitude}, d)
        return delta_ball_check(shape, delta, N)

    if not passes(low):
        return 0.0
    if passes(high):
        return high
    for _ in range(iterations):
        mid = 0.5 * (low + high)
        if passes(mid):
            low = mid
        else:
            high = mid
    return low


def diameter(shape: Shape, N: int = 4000) -> float:
    """Diameter from shape parameters (convex hull of a dense boundary sample for graphs)."""
    if isinstance(shape, Ball):
        return 2.0 * shape.radius
    if isinstance(shape, BallUnion):
        balls = shape.balls
        best = max(2.0 * b.radius for b in balls)
        for i in range(len(balls)):
            for j in range(i + 1, len(balls)):
                best = max(best, _center_distance(balls[i], balls[j]) + balls[i].radius + balls[j].radius)
        return best
    if isinstance(shape, Cube):
        return float(np.sqrt(shape.dimension) * shape.side)
    directions = sphere_points(shape.dimension, N)
    points = shape.radius_at(directions)[:, None] * directions
    hull = ConvexHull(points)
    return float(np.max(pdist(points[hull.vertices])))


def diameter_bound(delta: float, m: float, d: int) -> float:
    """Upper bound sqrt(d) 2^(d+2) (m/omega_d) delta^(1-d) on the diameter of connected sets in K_delta."""
    if delta <= 0 or m <= 0:
        raise ContractError("diameter_bound needs positive delta and m")
    return float(np.sqrt(d) * 2.0 ** (d + 2) * (m / unit_ball_volume(d)) * delta ** (1 - d))


def laplace_eigenvalue(l: int, d: int) -> float:
    """Eigenvalue l(l+d-2) of minus the Laplacian on the unit sphere of R^d."""
    return float(l * (l + d - 2))


def spectral_norm(coeffs: Dict[Mode, float], d: int, order: float) -> float:
    """sum over l >= 1 of (l(l+d-2))^order * phi_{l,m}^2; the mean mode is excluded."""
    return float(sum(
        laplace_eigenvalue(l, d) ** order * c * c for (l, _), c in coeffs.items() if l >= 1
    ))


def sobolev_seminorms(coeffs: Dict[Mode, float], d: int = 3, alpha: float = 1.0) -> Seminorms:
    """Squared L2, H1 and H^s (s = (d - alpha)/2) seminorms from harmonic coefficients."""
    return Seminorms(
        spectral_norm(coeffs, d, 0.0),
        spectral_norm(coeffs, d, 1.0),
        spectral_norm(coeffs, d, (d - alpha) / 2.0),
    )


def interpolation_gap(coeffs: Dict[Mode, float], p: float, q: float, r: float, d: int = 3) -> float:
    """
    N_r^t * N_p^(1-t) - N_q with t = (q-p)/(r-p), N_s the squared spectral norm.

    Nonnegative for every coefficient vector (Hoelder's inequality).
    """
    if not 0 <= p < q < r:
        raise ContractError(f"Interpolation needs 0 <= p < q < r, got {p}, {q}, {r}")
    t = (q - p) / (r - p)
    return (spectral_norm(coeffs, d, r) ** t * spectral_norm(coeffs, d, p) ** (1.0 - t)
            - spectral_norm(coeffs, d, q))


def interior_nodes(shape: Shape, N: int) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    Stratified volume cells inside E.

    Returns:
        (points, cell_volumes, mesh_width)
    """
    d = _dimension(shape)
    if isinstance(shape, Ball):
        points, cells, _, h = stratified_ball(d, N)
        return shape.radius * points + np.asarray(shape.center), cells * shape.radius ** d, h * shape.radius
    if isinstance(shape, BallUnion):
        volumes = np.array([volume(b) for b in shape.balls])
        counts = _split_count(N, volumes / np.sum(volumes))
        parts = [interior_nodes(b, max(int(n), 1)) for b, n in zip(shape.balls, counts)]
        return (np.vstack([p[0] for p in parts]), np.concatenate([p[1] for p in parts]),
                max(p[2] for p in parts))
    if isinstance(shape, Cube):
        grid = max(2, int(round(N ** (1.0 / d))))
        cells = (np.arange(grid) + 0.5) / grid * shape.side - shape.side / 2.0
        mesh = np.meshgrid(*([cells] * d), indexing='ij')
        points = np.column_stack([axis.ravel() for axis in mesh]) + np.asarray(shape.center)
        return points, np.full(len(points), (shape.side / grid) ** d), shape.side / grid
    points, cells, _, h = stratified_ball(d, N)
    norms = np.linalg.norm(points, axis=1)
    directions = points / norms[:, None]
    radius = shape.radius_at(directions)
    return points * radius[:, None], cells * radius ** d, h * float(np.max(radius))


def distance_to_boundary(shape: Shape, points) -> np.ndarray:
    """Distance from points to the boundary (radial distance for graphs)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if isinstance(shape, Ball):
        return np.abs(shape.radius - np.linalg.norm(points - np.asarray(shape.center), axis=1))
    if isinstance(shape, BallUnion):
        return np.min([distance_to_boundary(b, points) for b in shape.balls], axis=0)
    if isinstance(shape, Cube):
        offsets = np.abs(points - np.asarray(shape.center)) - shape.side / 2.0
        inside = np.all(offsets <= 0, axis=1)
        outside_distance = np.linalg.norm(np.maximum(offsets, 0.0), axis=1)
        return np.where(inside, -np.max(offsets, axis=1), outside_distance)
    norms = np.linalg.norm(points, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    directions = np.where(norms[:, None] > 0, points / safe[:, None], np.eye(points.shape[1])[0])
    return np.abs(shape.radius_at(directions) - norms)


# --- loading ---------------------------------------------------------------

def shape_from_params(params: Dict[str, str]) -> Shape:
    """
    Build a shape from key-value parameters.

    Keys: variant (ball | ball_union | nearly_spherical | cube), dimension,
    radius, center, centers (';'-separated points), radii, base_radius,
    coeffs ('l:m:value' list), side.

    Raises:
        ValidationError: On unknown variants or malformed values
    """
    variant = str(params.get('variant', 'ball')).strip().lower()
    d = InputValidator.validate_int(params.get('dimension', 3), 2)

    if variant == 'ball':
        center = (InputValidator.validate_number_list(params['center'])
                  if params.get('center') else [0.0] * d)
        return Ball(tuple(center), InputValidator.validate_positive(params.get('radius', 1.0)))
    if variant == 'ball_union':
        if not params.get('centers') or not params.get('radii'):
            raise ValidationError("ball_union needs 'centers' and 'radii'")
        centers = [InputValidator.validate_number_list(c) for c in str(params['centers']).split(';') if c.strip()]
        radii = InputValidator.validate_number_list(params['radii'])
        if len(centers) != len(radii):
            raise ValidationError("ball_union needs one radius per center")
        return BallUnion(tuple(Ball(tuple(c), r) for c, r in zip(centers, radii)))
    if variant == 'nearly_spherical':
        coeffs = InputValidator.validate_coefficients(params.get('coeffs', ''))
        return NearlySpherical(InputValidator.validate_positive(params.get('base_radius', 1.0)), coeffs, d)
    if variant == 'cube':
        return Cube(InputValidator.validate_positive(params.get('side', 1.0)), d)
    raise ValidationError(f"Unknown shape variant: '{variant}'")


def load_shape(filepath: str) -> Shape:
    """
    Load a shape from a plain-text key=value file.

    Raises:
        ValidationError: If the file is missing or malformed
    """
    if not Path(filepath).exists():
        raise ValidationError(f"Shape file not found: {filepath}")
    return shape_from_params({k: v for k, v in dotenv_values(filepath).items() if v is not None})
