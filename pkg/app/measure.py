"""Discrete measures, canonical optimal measures of the ball and their utilities."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence
import numpy as np
import pandas as pd
from scipy.spatial import cKDTree
from scipy.special import beta, betainc

from app.exceptions import ContractError, SerializationError
from app.lattice import sphere_cells, stratified_ball, unit_sphere_area

COINCIDENCE_RADIUS = 1e-13


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class DiscreteMeasure:
    """
    Weighted nodes in R^d, optionally carrying the patch each node stands for.

    Attributes:
        nodes: Array of shape (N, d)
        weights: Array of shape (N,)
        patch_areas: Measure of each node's patch, or None
        patch_dims: Intrinsic dimension of each patch (d-1 surface, d volume)
    """

    nodes: np.ndarray
    weights: np.ndarray
    patch_areas: Optional[np.ndarray] = None
    patch_dims: Optional[np.ndarray] = None
    total_mass: float = field(init=False)

    def __post_init__(self):
        nodes = _frozen(self.nodes)
        if nodes.ndim != 2 or nodes.shape[0] < 1:
            raise ContractError("Nodes must be a non-empty (N, d) array")
        weights = _frozen(np.ravel(self.weights))
        if weights.shape[0] != nodes.shape[0]:
            raise ContractError(
                f"Got {weights.shape[0]} weights for {nodes.shape[0]} nodes"
            )
        if not (np.all(np.isfinite(nodes)) and np.all(np.isfinite(weights))):
            raise ContractError("Nodes and weights must be finite")

        object.__setattr__(self, 'nodes', nodes)
        object.__setattr__(self, 'weights', weights)
        object.__setattr__(self, 'total_mass', float(np.sum(weights)))

        if self.patch_areas is not None:
            areas = _frozen(np.ravel(self.patch_areas))
            if areas.shape != weights.shape:
                raise ContractError("patch_areas must have one entry per node")
            if np.any(areas <= 0):
                raise ContractError("patch_areas must be positive")
            dims = self.patch_dims
            if dims is None:
                dims = np.full(len(areas), nodes.shape[1] - 1)
            dims = np.array(np.ravel(dims), dtype=int)
            if dims.shape != weights.shape or np.any(dims < 1) or np.any(dims > nodes.shape[1]):
                raise ContractError("patch_dims must lie in 1..d for every node")
            dims.setflags(write=False)
            object.__setattr__(self, 'patch_areas', areas)
            object.__setattr__(self, 'patch_dims', dims)
        elif self.patch_dims is not None:
            raise ContractError("patch_dims given without patch_areas")

        if len(nodes) > 1 and cKDTree(nodes).query_pairs(COINCIDENCE_RADIUS):
            raise ContractError("Measure nodes must be pairwise distinct")

    @property
    def dimension(self) -> int:
        """Ambient dimension d."""
        return self.nodes.shape[1]

    def __len__(self) -> int:
        return self.nodes.shape[0]

    @property
    def has_patches(self) -> bool:
        return self.patch_areas is not None

    def is_probability(self, tol: float = 1e-10) -> bool:
        """True when weights are nonnegative and sum to one within tol."""
        return bool(np.all(self.weights >= 0) and abs(self.total_mass - 1.0) <= tol)

    def with_weights(self, weights: Sequence[float]) -> 'DiscreteMeasure':
        """Same nodes and patches, new weights."""
        return DiscreteMeasure(self.nodes, weights, self.patch_areas, self.patch_dims)

    def scale_weights(self, factor: float) -> 'DiscreteMeasure':
        return self.with_weights(factor * self.weights)

    def densities(self) -> np.ndarray:
        """Weight per unit patch measure at each node."""
        if not self.has_patches:
            raise ContractError("Densities need patch areas")
        return self.weights / self.patch_areas

    @classmethod
    def concatenate(cls, measures: Sequence['DiscreteMeasure']) -> 'DiscreteMeasure':
        """Union of several measures in the same ambient space."""
        if not measures:
            raise ContractError("Nothing to concatenate")
        with_patches = [mu.has_patches for mu in measures]
        if any(with_patches) and not all(with_patches):
            raise ContractError("Cannot mix measures with and without patch areas")
        nodes = np.vstack([mu.nodes for mu in measures])
        weights = np.concatenate([mu.weights for mu in measures])
        if all(with_patches):
            areas = np.concatenate([mu.patch_areas for mu in measures])
            dims = np.concatenate([mu.patch_dims for mu in measures])
            return cls(nodes, weights, areas, dims)
        return cls(nodes, weights)

    def to_frame(self) -> pd.DataFrame:
        """One row per node: coordinates, weight, patch area and patch dimension."""
        frame = pd.DataFrame(self.nodes, columns=[f"x{i}" for i in range(self.dimension)])
        frame['weight'] = self.weights
        if self.has_patches:
            frame['patch_area'] = self.patch_areas
            frame['patch_dim'] = self.patch_dims
        return frame

    def to_csv(self, filepath: str, float_format: str = "%.17g"):
        """
        Save the measure as a flat CSV.

        Raises:
            SerializationError: If writing fails
        """
        try:
            Path(filepath).parent.mkdir(parents=True, exist_ok=True)
            self.to_frame().to_csv(filepath, index=False, float_format=float_format)
        except OSError as e:
            raise SerializationError(f"Failed to save measure: {str(e)}")

    @classmethod
    def from_csv(cls, filepath: str) -> 'DiscreteMeasure':
        """
        Load a measure written by to_csv.

        Raises:
            SerializationError: If the file is missing or malformed
        """
        if not Path(filepath).exists():
            raise SerializationError(f"Measure file not found: {filepath}")
        try:
            frame = pd.read_csv(filepath)
            coords = [c for c in frame.columns if c.startswith('x')]
            nodes = frame[coords].to_numpy(dtype=float)
            weights = frame['weight'].to_numpy(dtype=float)
            if 'patch_area' in frame:
                dims = frame['patch_dim'].to_numpy(dtype=int) if 'patch_dim' in frame else None
                return cls(nodes, weights, frame['patch_area'].to_numpy(dtype=float), dims)
            return cls(nodes, weights)
        except (KeyError, ValueError) as e:
            raise SerializationError(f"Failed to load measure: {str(e)}")


def point_measure(points, weights=None) -> DiscreteMeasure:
    """Point charges without patches (unit charges by default)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if weights is None:
        weights = np.ones(len(points))
    return DiscreteMeasure(points, np.atleast_1d(np.asarray(weights, dtype=float)))


def uniform_sphere_measure(d: int, radius: float, N: int) -> DiscreteMeasure:
    """
    Uniform probability measure on the sphere of given radius.

    Nodes come from sphere_cells; weights are 1/N and every patch gets
    the equal share area / N.

    Raises:
        ContractError: For unsupported d, non-positive radius or N < 12
    """
    if d not in (2, 3):
        raise ContractError(f"uniform_sphere_measure supports d in {{2, 3}}, got {d}")
    if radius <= 0:
        raise ContractError(f"Radius must be positive, got {radius}")
    if N < 12:
        raise ContractError(f"Need at least 12 nodes, got {N}")

    directions, _ = sphere_cells(d, N)
    return DiscreteMeasure(
        radius * directions,
        np.full(N, 1.0 / N),
        np.full(N, unit_sphere_area(d) * radius ** (d - 1) / N),
        np.full(N, d - 1),
    )


def interior_density_exponent(d: int, alpha: float) -> float:
    """Exponent e of the interior optimal density (1 - |x|^2)^e of the unit ball."""
    return (alpha - d) / 2.0


def _check_interior_regime(d: int, alpha: float):
    if d not in (2, 3):
        raise ContractError(f"Interior ball measures support d in {{2, 3}}, got {d}")
    if not d - 2 < alpha < d:
        raise ContractError(
            f"Interior optimal density needs d-2 < alpha < d, got d={d}, alpha={alpha}"
        )


def _radial_mass(d: int, alpha: float, radius) -> np.ndarray:
    """Fraction of the interior optimal measure inside the ball of given radius."""
    e = interior_density_exponent(d, alpha)
    return betainc(d / 2.0, e + 1.0, np.clip(np.asarray(radius, dtype=float), 0.0, 1.0) ** 2)


def ball_interior_density(d: int, alpha: float, x) -> np.ndarray:
    """
    Normalized density C·(1 - |x|^2)^e of the unit ball's optimal measure.

    The renormalization constant C makes the density a probability density.
    """
    _check_interior_regime(d, alpha)
    e = interior_density_exponent(d, alpha)
    constant = 1.0 / (0.5 * unit_sphere_area(d) * beta(d / 2.0, e + 1.0))
    r2 = np.sum(np.atleast_2d(x) ** 2, axis=1)
    return constant * (1.0 - r2) ** e


def ball_interior_measure(d: int, alpha: float, N: int) -> DiscreteMeasure:
    """
    Volumetric quadrature of the unit ball's optimal measure for d-2 < alpha < d.

    Every shell of the radial stratification receives the exact mass of the
    density over that shell, split evenly among its nodes.

    Raises:
        ContractError: If alpha is outside (d-2, d) or d is unsupported
    """
    _check_interior_regime(d, alpha)
    points, cells, edges, _ = stratified_ball(d, N)

    radii = np.linalg.norm(points, axis=1)
    shell = np.clip(np.searchsorted(edges, radii, side='right') - 1, 0, len(edges) - 2)
    shell_mass = np.diff(_radial_mass(d, alpha, edges))
    counts = np.bincount(shell, minlength=len(edges) - 1)
    weights = shell_mass[shell] / counts[shell]

    return DiscreteMeasure(points, weights / np.sum(weights), cells, np.full(len(cells), d))


def rescale_measure(mu: DiscreteMeasure, lam: float) -> DiscreteMeasure:
    """
    Push the measure forward by x -> lam·x.

    Weights are unchanged; each patch measure scales by lam^k for its
    intrinsic dimension k.

    Raises:
        ContractError: If lam is not positive
    """
    if lam <= 0:
        raise ContractError(f"Scale factor must be positive, got {lam}")
    if not mu.has_patches:
        return DiscreteMeasure(lam * mu.nodes, mu.weights)
    return DiscreteMeasure(
        lam * mu.nodes,
        mu.weights,
        mu.patch_areas * lam ** mu.patch_dims,
        mu.patch_dims,
    )


def normalize(mu: DiscreteMeasure) -> DiscreteMeasure:
    """
    Divide the weights by the total mass.

    Raises:
        ContractError: On negative weights or non-positive total mass
    """
    if np.any(mu.weights < 0):
        raise ContractError("Cannot normalize a measure with negative weights")
    if mu.total_mass <= 0:
        raise ContractError(f"Cannot normalize total mass {mu.total_mass}")
    return mu.with_weights(mu.weights / mu.total_mass)
