"""Riesz and logarithmic pair kernels, potentials and interaction energies.

Kernels are created through KernelFactory from an immutable KernelSpec.
Energies of discrete measures are accumulated block by block; each block is
reduced with numpy and the block partials are combined with math.fsum in a
fixed order, so results do not depend on the number of worker threads.
"""

import math
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Type
import numpy as np
from scipy import integrate
from scipy.spatial.distance import cdist
from scipy.special import gamma

from app.exceptions import ContractError, SingularityError
from app.lattice import unit_ball_volume
from app.measure import DiscreteMeasure

BLOCK_ROWS = 512


@dataclass(frozen=True)
class KernelSpec:
    """
    Ambient dimension and kernel family.

    Attributes:
        dimension: Ambient dimension d >= 2
        family: 'riesz' or 'logarithmic'
        alpha: Riesz exponent in (0, d); None for the logarithmic family
    """

    dimension: int
    family: str = 'riesz'
    alpha: Optional[float] = None

    def __post_init__(self):
        if self.dimension < 2:
            raise ContractError(f"Dimension must be at least 2, got {self.dimension}")
        if self.family == 'riesz':
            if self.alpha is None or not 0 < self.alpha < self.dimension:
                raise ContractError(
                    f"Riesz exponent must lie in (0, {self.dimension}), got {self.alpha}"
                )
            object.__setattr__(self, 'alpha', float(self.alpha))
        elif self.family == 'logarithmic':
            if self.dimension != 2:
                raise ContractError("The logarithmic kernel is only supported in d = 2")
            object.__setattr__(self, 'alpha', None)
        else:
            raise ContractError(f"Unknown kernel family: {self.family}")

    @classmethod
    def riesz(cls, dimension: int, alpha: float) -> 'KernelSpec':
        return cls(dimension, 'riesz', alpha)

    @classmethod
    def logarithmic(cls, dimension: int = 2) -> 'KernelSpec':
        return cls(dimension, 'logarithmic')

    @property
    def is_riesz(self) -> bool:
        return self.family == 'riesz'

    @property
    def is_coulombic_or_below(self) -> bool:
        """True when the optimal measure of a set lives on its boundary (alpha <= d-2, or log)."""
        return not self.is_riesz or self.alpha <= self.dimension - 2 + 1e-12

    def describe(self) -> str:
        if self.is_riesz:
            return f"riesz(d={self.dimension}, alpha={self.alpha:g})"
        return f"logarithmic(d={self.dimension})"


# Distance density of two independent uniform points in the unit k-ball,
# divided by r^(k-1); the power is carried by the quadrature weight.
_REDUCED_DISTANCE_DENSITIES = {
    1: lambda r: (2.0 - r) / 2.0,
    2: lambda r: (4.0 / np.pi) * (np.arccos(r / 2.0) - (r / 2.0) * np.sqrt(max(0.0, 1.0 - r * r / 4.0))),
    3: lambda r: 3.0 * (1.0 - 0.75 * r + r ** 3 / 16.0),
}


def _distance_density(k: int):
    density = _REDUCED_DISTANCE_DENSITIES.get(k)
    if density is None:
        raise ContractError(f"Patch dimension {k} is not supported (expected 1, 2 or 3)")
    return density


@lru_cache(maxsize=None)
def disk_self_constant(k: int, alpha: float) -> float:
    """
    Self-interaction constant of a flat k-dimensional disk.

    A disk of k-measure A carrying unit mass uniformly has Riesz self energy
    disk_self_constant(k, alpha) * A**(-alpha / k).

    Raises:
        ContractError: If alpha >= k (the disk energy diverges)
    """
    if not 0 < alpha < k:
        raise ContractError(
            f"A {k}-dimensional patch has infinite Riesz-{alpha:g} self energy"
        )
    density = _distance_density(k)
    mean, _ = integrate.quad(density, 0.0, 2.0, weight='alg', wvar=(k - 1 - alpha, 0.0), limit=200)
    return mean * unit_ball_volume(k) ** (alpha / k)


@lru_cache(maxsize=None)
def disk_log_constant(k: int) -> float:
    """Mean of log|X - Y| for two uniform points in the unit k-ball."""
    density = _distance_density(k)
    mean, _ = integrate.quad(density, 0.0, 2.0, weight='alg-loga', wvar=(k - 1.0, 0.0), limit=200)
    return mean


class Kernel(ABC):
    """Abstract base class for pair kernels."""

    def __init__(self, spec: KernelSpec):
        self.spec = spec

    @abstractmethod
    def evaluate(self, distances: np.ndarray) -> np.ndarray:
        """Kernel value at positive distances."""
        pass

    @abstractmethod
    def patch_self_term(self, areas: np.ndarray, dims: np.ndarray) -> np.ndarray:
        """Self-interaction per unit mass squared of flat patches of given measure."""
        pass


class RieszKernel(Kernel):
    """|x - y|^(-alpha)."""

    def evaluate(self, distances: np.ndarray) -> np.ndarray:
        return np.power(distances, -self.spec.alpha)

    def patch_self_term(self, areas: np.ndarray, dims: np.ndarray) -> np.ndarray:
        alpha = self.spec.alpha
        terms = np.empty(len(areas))
        for k in np.unique(dims):
            mask = dims == k
            terms[mask] = disk_self_constant(int(k), alpha) * areas[mask] ** (-alpha / k)
        return terms


class LogarithmicKernel(Kernel):
    """-log|x - y|."""

    def evaluate(self, distances: np.ndarray) -> np.ndarray:
        return -np.log(distances)

    def patch_self_term(self, areas: np.ndarray, dims: np.ndarray) -> np.ndarray:
        terms = np.empty(len(areas))
        for k in np.unique(dims):
            mask = dims == k
            radius = (areas[mask] / unit_ball_volume(int(k))) ** (1.0 / k)
            terms[mask] = -np.log(radius) - disk_log_constant(int(k))
        return terms


class KernelFactory:
    """Factory for creating kernel instances."""

    _kernels: Dict[str, Type[Kernel]] = {
        'riesz': RieszKernel,
        'logarithmic': LogarithmicKernel,
    }

    @classmethod
    def create_kernel(cls, spec: KernelSpec) -> Kernel:
        """
        Create the kernel described by spec.

        Raises:
            ContractError: If the family is not recognized
        """
        kernel_class = cls._kernels.get(spec.family)
        if kernel_class is None:
            raise ContractError(f"Unknown kernel family: {spec.family}")
        return kernel_class(spec)

    @classmethod
    def get_available_kernels(cls) -> List[str]:
        return list(cls._kernels.keys())


def kernel_block(spec: KernelSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """
    Kernel matrix k(x_i, y_j) between two point sets.

    Raises:
        SingularityError: If any pair of points coincides
    """
    distances = cdist(np.atleast_2d(x), np.atleast_2d(y))
    if np.any(distances == 0.0):
        raise SingularityError(f"Kernel {spec.describe()} evaluated at coincident points")
    return KernelFactory.create_kernel(spec).evaluate(distances)


def eval_kernel(spec: KernelSpec, x, y) -> float:
    """
    Evaluate k(x, y).

    Raises:
        SingularityError: If x and y coincide
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    distance = float(np.linalg.norm(x - y))
    if distance == 0.0:
        raise SingularityError(f"Kernel {spec.describe()} evaluated at coincident points")
    return float(KernelFactory.create_kernel(spec).evaluate(np.array([distance]))[0])


def potential(spec: KernelSpec, mu: DiscreteMeasure, x) -> float:
    """
    Potential v(x) = sum_i w_i k(x, x_i) of a discrete measure.

    Raises:
        SingularityError: If x coincides with a node of mu
    """
    row = kernel_block(spec, np.atleast_2d(np.asarray(x, dtype=float)), mu.nodes)[0]
    return math.fsum(row * mu.weights)


def potentials(spec: KernelSpec, mu: DiscreteMeasure, points) -> np.ndarray:
    """Potential of mu at several points."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    values = np.empty(len(points))
    for start in range(0, len(points), BLOCK_ROWS):
        stop = start + BLOCK_ROWS
        values[start:stop] = kernel_block(spec, points[start:stop], mu.nodes) @ mu.weights
    return values


def _bilinear_sum(spec: KernelSpec, x: np.ndarray, wx: np.ndarray, y: np.ndarray,
                  wy: np.ndarray, skip_diagonal: bool, threads: int) -> float:
    """Sum_ij wx_i wy_j k(x_i, y_j) over row blocks with a fixed reduction order."""
    kernel = KernelFactory.create_kernel(spec)

    def block(start: int) -> float:
        stop = min(start + BLOCK_ROWS, len(x))
        distances = cdist(x[start:stop], y)
        if skip_diagonal:
            rows = np.arange(stop - start)
            distances[rows, rows + start] = np.inf
        if np.any(distances == 0.0):
            raise SingularityError(f"Kernel {spec.describe()} evaluated at coincident nodes")
        values = kernel.evaluate(distances)
        if skip_diagonal:
            values[rows, rows + start] = 0.0
        return float(wx[start:stop] @ (values @ wy))

    starts = range(0, len(x), BLOCK_ROWS)
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(block, starts))
    else:
        partials = [block(start) for start in starts]
    return math.fsum(partials)


def interaction_energy(spec: KernelSpec, mu: DiscreteMeasure, nu: DiscreteMeasure,
                       threads: int = 1) -> float:
    """
    Mutual energy sum_ij w_i u_j k(x_i, y_j).

    Bilinear and symmetric in (mu, nu); the diagonal of a measure with itself
    is singular, so mu and nu must not share nodes.

    Raises:
        SingularityError: If a node of mu coincides with a node of nu
    """
    if mu.dimension != nu.dimension or mu.dimension != spec.dimension:
        raise ContractError("Measures and kernel must share the ambient dimension")
    # Fixed operand order keeps the result exactly symmetric
    if (len(mu), mu.nodes.tobytes()) > (len(nu), nu.nodes.tobytes()):
        mu, nu = nu, mu
    return _bilinear_sum(spec, mu.nodes, mu.weights, nu.nodes, nu.weights, False, threads)


def diagonal_terms(spec: KernelSpec, mu: DiscreteMeasure) -> np.ndarray:
    """
    Flat-patch self terms K_ii per unit weight squared.

    Raises:
        ContractError: If mu carries no patch areas
    """
    if not mu.has_patches:
        raise ContractError("Self energy quadrature needs patch areas on every node")
    return KernelFactory.create_kernel(spec).patch_self_term(mu.patch_areas, mu.patch_dims)


def self_energy_quadrature(spec: KernelSpec, mu: DiscreteMeasure, threads: int = 1) -> float:
    """
    Approximate I(mu) for a measure with a density on patches.

    Off-diagonal pairs are summed as point interactions; each diagonal term
    models node i as a flat disk of measure A_i carrying density w_i / A_i.

    Raises:
        ContractError: If patch areas are missing
    """
    diagonal = diagonal_terms(spec, mu)
    off_diagonal = _bilinear_sum(spec, mu.nodes, mu.weights, mu.nodes, mu.weights, True, threads)
    return math.fsum([off_diagonal, math.fsum(diagonal * mu.weights ** 2)])


def sphere_riesz_energy(d: int, alpha: float) -> float:
    """
    Riesz energy of the uniform probability measure on the unit sphere of R^d.

    Raises:
        ContractError: If alpha >= d - 1 (infinite energy)
    """
    if not 0 < alpha < d - 1:
        raise ContractError(f"Uniform sphere energy is infinite for alpha={alpha}, d={d}")
    return float(
        2.0 ** (d - 2 - alpha) * gamma(d / 2.0) * gamma((d - 1 - alpha) / 2.0)
        / (np.sqrt(np.pi) * gamma(d - 1 - alpha / 2.0))
    )


def ball_riesz_energy(d: int, alpha: float) -> float:
    """
    Riesz energy I_alpha(B) of the unit ball.

    For alpha <= d-2 the optimal measure is uniform on the sphere; for
    d-2 < alpha < d it has density proportional to (1 - |x|^2)^((alpha-d)/2),
    whose potential on the ball is a closed-form constant.
    """
    if not 0 < alpha < d:
        raise ContractError(f"Riesz exponent must lie in (0, {d}), got {alpha}")
    if alpha <= d - 2:
        return sphere_riesz_energy(d, alpha)
    a = d - alpha
    level = np.pi ** (d / 2.0 + 1.0) / (gamma(d / 2.0) * np.sin(np.pi * a / 2.0))
    mass = 0.5 * d * unit_ball_volume(d) * gamma(d / 2.0) * gamma(1.0 - a / 2.0) / gamma(d / 2.0 + 1.0 - a / 2.0)
    return float(level / mass)


def circle_log_energy(radius: float) -> float:
    """Logarithmic energy -log r of the circle (or disk) of radius r."""
    if radius <= 0:
        raise ContractError(f"Radius must be positive, got {radius}")
    return -math.log(radius)
