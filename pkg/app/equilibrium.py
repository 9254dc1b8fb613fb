"""Equilibrium measures: kernel assembly, simplex-constrained solver, capacity and structural checks."""

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, NamedTuple, Optional, Union
import numpy as np
import pandas as pd
from scipy.sparse.linalg import LinearOperator, eigsh
from scipy.spatial.distance import cdist

from app.exceptions import ContractError, ConvergenceError, SerializationError
from app.geometry import (
    Ball,
    Shape,
    SurfaceQuadrature,
    distance_to_boundary,
    interior_nodes,
    surface_quadrature,
)
from app.kernel import BLOCK_ROWS, KernelFactory, KernelSpec, diagonal_terms
from app.logger import Logger
from app.measure import DiscreteMeasure
from app.results_store import with_provenance

DEFAULT_TOLERANCE = 1e-6
DEFAULT_MAX_ITER = 50_000
DEFAULT_WEIGHT_FLOOR = 1e-12
RESIDUAL_CHECK_EVERY = 10
DENSE_EIGEN_LIMIT = 200

NodeSet = Union[SurfaceQuadrature, DiscreteMeasure]

logger = Logger.get_child(__name__)


@dataclass(frozen=True)
class EquilibriumSolution:
    """
    Optimal probability weights on a node set.

    Attributes:
        measure: Probability measure on the nodes (patch areas preserved)
        energy: Quadratic form w^T K w at the returned weights
        capacity: 1/energy for the Riesz family, nan for the logarithmic one
        el_spread: max - min of the potential over active nodes
        el_violation: max(energy - potential, 0) over inactive nodes
        iterations: Solver iterations used
        potentials: Discrete potential (K w) at every node
    """

    measure: DiscreteMeasure
    energy: float
    capacity: float
    el_spread: float
    el_violation: float
    iterations: int
    residual: float = math.nan
    converged: bool = True
    potentials: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def weights(self) -> np.ndarray:
        return self.measure.weights

    def to_frame(self) -> pd.DataFrame:
        """One row per node: coordinates, weight, patch area and potential."""
        frame = self.measure.to_frame()
        if self.potentials is not None:
            frame['potential'] = self.potentials
        return frame

    def summary(self) -> dict:
        return {
            'energy': self.energy,
            'capacity': self.capacity,
            'el_spread': self.el_spread,
            'el_violation': self.el_violation,
            'residual': self.residual,
            'iterations': self.iterations,
            'converged': self.converged,
            'nodes': len(self.measure),
        }

    def save(self, csv_path: str, float_format: str = "%.17g", provenance: Optional[Dict[str, Any]] = None):
        """
        Write the node table as CSV and the summary as a JSON sidecar.

        The provenance (artifact version, tolerances) goes into meta.* columns
        of the table and under "provenance" in the sidecar.

        Raises:
            SerializationError: If either file cannot be written
        """
        try:
            Path(csv_path).parent.mkdir(parents=True, exist_ok=True)
            with_provenance(self.to_frame(), provenance).to_csv(csv_path, index=False, float_format=float_format)
            summary = self.summary() | {'provenance': dict(provenance or {})}
            with open(Path(csv_path).with_suffix('.json'), 'w', encoding='utf-8') as handle:
                json.dump(summary, handle, indent=2, sort_keys=True)
        except OSError as e:
            raise SerializationError(f"Failed to save solution: {e}")


class ResidualReport(NamedTuple):
    spread: float
    violation: float


class DensityBound(NamedTuple):
    max_density: float
    bound: float
    holds: bool


def as_node_set(nodes: NodeSet) -> DiscreteMeasure:
    """
    Turn a surface quadrature or a patched measure into a node set.

    Weights start proportional to patch areas.

    Raises:
        ContractError: If the nodes carry no patch areas
    """
    if isinstance(nodes, SurfaceQuadrature):
        return DiscreteMeasure(nodes.points, nodes.areas / nodes.total_area, nodes.areas, nodes.patch_dims)
    if not nodes.has_patches:
        raise ContractError("Equilibrium nodes need patch areas for the diagonal terms")
    return nodes


def mixed_node_set(shape: Shape, n_surface: int, n_interior: int) -> DiscreteMeasure:
    """Boundary nodes (patch dimension d-1) together with interior volume cells (dimension d)."""
    surface = as_node_set(surface_quadrature(shape, n_surface))
    if n_interior <= 0:
        return surface
    points, cells, _ = interior_nodes(shape, n_interior)
    d = surface.dimension
    interior = DiscreteMeasure(points, cells, cells, np.full(len(cells), d))
    return DiscreteMeasure.concatenate([surface, interior]).scale_weights(
        1.0 / (surface.total_mass + interior.total_mass)
    )


def assemble_kernel_matrix(spec: KernelSpec, nodes: NodeSet, threads: int = 1) -> np.ndarray:
    """
    Dense symmetric kernel matrix with flat-patch diagonal terms.

    Raises:
        ContractError: If nodes coincide or lack patch areas
    """
    mu = as_node_set(nodes)
    if mu.dimension != spec.dimension:
        raise ContractError(f"Nodes live in R^{mu.dimension}, kernel in R^{spec.dimension}")
    kernel = KernelFactory.create_kernel(spec)
    points = mu.nodes
    n = len(points)
    matrix = np.empty((n, n))

    def fill(start: int):
        stop = min(start + BLOCK_ROWS, n)
        distances = cdist(points[start:stop], points)
        rows = np.arange(stop - start)
        distances[rows, rows + start] = 1.0
        if np.any(distances == 0.0):
            raise ContractError("Duplicate nodes in the equilibrium node set")
        block = kernel.evaluate(distances)
        block[rows, rows + start] = 0.0
        matrix[start:stop] = block

    starts = range(0, n, BLOCK_ROWS)
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill, starts))
    else:
        for start in starts:
            fill(start)

    matrix = 0.5 * (matrix + matrix.T)
    matrix[np.diag_indices(n)] = diagonal_terms(spec, mu)
    return matrix


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {w >= 0, sum w = 1} (sort-based, exact)."""
    n = len(v)
    u = np.sort(v)[::-1]
    cumulative = np.cumsum(u) - 1.0
    index = np.arange(1, n + 1)
    rho = np.nonzero(u - cumulative / index > 0)[0][-1]
    tau = cumulative[rho] / (rho + 1.0)
    w = np.maximum(v - tau, 0.0)
    return w / math.fsum(w)


def _tangent_lipschitz(matrix: np.ndarray) -> float:
    """Largest eigenvalue of P K P with P the projector onto zero-sum vectors."""
    n = len(matrix)
    if n <= DENSE_EIGEN_LIMIT:
        projector = np.eye(n) - 1.0 / n
        return float(np.linalg.eigvalsh(projector @ matrix @ projector)[-1])

    def matvec(v):
        v = np.ravel(v)
        v = v - v.mean()
        out = matrix @ v
        return out - out.mean()

    operator = LinearOperator((n, n), matvec=matvec, dtype=float)
    start = np.cos(np.arange(n) + 1.0)
    value = eigsh(operator, k=1, which='LA', v0=start, return_eigenvectors=False, tol=1e-6)
    return float(value[0])


def _residual_scale(spec: KernelSpec, energy: float) -> float:
    return energy if spec.is_riesz else max(abs(energy), 1.0)


def kkt_residual(weights: np.ndarray, potentials: np.ndarray, energy: float,
                 weight_floor: float = DEFAULT_WEIGHT_FLOOR) -> ResidualReport:
    """
    Discrete Euler-Lagrange residual.

    Active nodes (w > weight_floor * max w) should see the constant potential
    energy; inactive nodes must see at least that value.
    """
    active = weights > weight_floor * np.max(weights)
    spread = float(np.ptp(potentials[active])) if np.any(active) else 0.0
    inactive = ~active
    violation = float(max(np.max(energy - potentials[inactive]), 0.0)) if np.any(inactive) else 0.0
    return ResidualReport(spread, violation)


def _initial_weights(mu: DiscreteMeasure) -> np.ndarray:
    if np.all(mu.weights >= 0) and mu.total_mass > 0:
        return mu.weights / mu.total_mass
    return np.full(len(mu), 1.0 / len(mu))


def solve_equilibrium(spec: KernelSpec, nodes: NodeSet, tol: float = DEFAULT_TOLERANCE,
                      max_iter: int = DEFAULT_MAX_ITER, weight_floor: float = DEFAULT_WEIGHT_FLOOR,
                      threads: int = 1, seed: Optional[int] = None,
                      matrix: Optional[np.ndarray] = None) -> EquilibriumSolution:
    """
    Minimize w^T K w over the probability simplex.

    Accelerated projected gradient with restart whenever the energy would
    increase; accepted iterates are monotone. Starts from the area-proportional
    weights of the node set, or from a Dirichlet draw when a seed is given.

    Raises:
        ContractError: If tol is not positive
        ConvergenceError: If the residual is above tol after max_iter iterations
    """
    if tol <= 0:
        raise ContractError(f"Tolerance must be positive, got {tol}")
    mu = as_node_set(nodes)
    K = assemble_kernel_matrix(spec, mu, threads) if matrix is None else matrix
    n = len(mu)

    if seed is None:
        w = _initial_weights(mu)
    else:
        w = project_simplex(np.random.default_rng(seed).dirichlet(np.ones(n)))
    Kw = K @ w
    energy = float(w @ Kw)

    lipschitz = _tangent_lipschitz(K) if n > 1 else 0.0
    if lipschitz <= 0.0:
        return _finish(spec, mu, w, Kw, energy, 0, tol, weight_floor)
    step = 1.0 / (2.0 * 1.01 * lipschitz)
    logger.debug(f"Solving {spec.describe()} on {n} nodes, step {step:.3e}")

    y, Ky, momentum = w.copy(), Kw.copy(), 1.0
    restarts = 0
    residual = math.inf
    for iteration in range(1, max_iter + 1):
        w_next = project_simplex(y - 2.0 * step * Ky)
        Kw_next = K @ w_next
        energy_next = float(w_next @ Kw_next)

        if energy_next > energy:
            restarts += 1
            w_next = project_simplex(w - 2.0 * step * Kw)
            Kw_next = K @ w_next
            energy_next = float(w_next @ Kw_next)
            momentum = 1.0
            if energy_next > energy:
                w_next, Kw_next, energy_next = w, Kw, energy

        momentum_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * momentum ** 2))
        beta = (momentum - 1.0) / momentum_next
        y = w_next + beta * (w_next - w)
        Ky = Kw_next + beta * (Kw_next - Kw)
        w, Kw, energy, momentum = w_next, Kw_next, energy_next, momentum_next

        if iteration % RESIDUAL_CHECK_EVERY == 0:
            report = kkt_residual(w, Kw, energy, weight_floor)
            residual = max(report) / _residual_scale(spec, energy)
            if residual <= tol:
                logger.debug(f"Converged after {iteration} iterations ({restarts} restarts), residual {residual:.3e}")
                return _finish(spec, mu, w, Kw, energy, iteration, tol, weight_floor)

    solution = _finish(spec, mu, w, Kw, energy, max_iter, tol, weight_floor, converged=False)
    logger.warning(f"No convergence after {max_iter} iterations: residual {solution.residual:.3e} > {tol:.1e}")
    raise ConvergenceError(
        f"Equilibrium solver stopped at max_iter={max_iter} with residual {solution.residual:.3e}",
        solution=solution,
        residual=solution.residual,
    )


def _finish(spec: KernelSpec, mu: DiscreteMeasure, w: np.ndarray, Kw: np.ndarray, energy: float,
            iterations: int, tol: float, weight_floor: float, converged: bool = True) -> EquilibriumSolution:
    report = kkt_residual(w, Kw, energy, weight_floor)
    scale = _residual_scale(spec, energy)
    potentials = np.array(Kw)
    potentials.setflags(write=False)
    return EquilibriumSolution(
        measure=mu.with_weights(w),
        energy=energy,
        capacity=1.0 / energy if spec.is_riesz and energy > 0 else math.nan,
        el_spread=report.spread,
        el_violation=report.violation,
        iterations=iterations,
        residual=max(report) / scale,
        converged=converged,
        potentials=potentials,
    )


def solve_or_partial(spec: KernelSpec, nodes: NodeSet, **kwargs) -> EquilibriumSolution:
    """Solve, falling back to the last iterate (logged) when the solver does not converge."""
    try:
        return solve_equilibrium(spec, nodes, **kwargs)
    except ConvergenceError as e:
        logger.warning(f"Using unconverged iterate: {e}")
        return e.solution


def capacity(sol: EquilibriumSolution) -> float:
    """
    Riesz capacity 1/I(E).

    Raises:
        ContractError: For the logarithmic family or a non-positive energy
    """
    if math.isnan(sol.capacity):
        raise ContractError("Capacity is only defined for the Riesz family with positive energy")
    return sol.capacity


def el_residual(spec: KernelSpec, sol: EquilibriumSolution, nodes: Optional[NodeSet] = None,
                weight_floor: float = DEFAULT_WEIGHT_FLOOR,
                exclude: Optional[np.ndarray] = None) -> ResidualReport:
    """
    Spread and violation of the equilibrium potential recomputed from scratch.

    Args:
        nodes: Node set the solution lives on; defaults to the solution's own nodes
        exclude: Boolean mask of nodes left out of both statistics (e.g. near corners)
    """
    mu = sol.measure if nodes is None else as_node_set(nodes).with_weights(sol.weights)
    values = assemble_kernel_matrix(spec, mu) @ mu.weights
    weights = mu.weights
    if exclude is not None:
        keep = ~np.asarray(exclude, dtype=bool)
        values, weights = values[keep], weights[keep]
    return kkt_residual(weights, values, sol.energy, weight_floor)


def boundary_mass_fraction(sol: EquilibriumSolution, shape: Shape, width: float) -> float:
    """Share of the equilibrium mass within width of the boundary."""
    distances = distance_to_boundary(shape, sol.measure.nodes)
    near = distances <= width
    return math.fsum(sol.weights[near]) / math.fsum(sol.weights)


def boundary_concentration_check(spec: KernelSpec, shape: Shape, n_surface: int, n_interior: int,
                                 width: Optional[float] = None, **solver_options) -> float:
    """
    Equilibrium mass within width (default: two interior mesh widths) of the boundary
    for a node set mixing boundary and interior nodes.
    """
    nodes = mixed_node_set(shape, n_surface, n_interior)
    if width is None:
        if n_interior > 0:
            width = 2.0 * interior_nodes(shape, n_interior)[2]
        else:
            width = 0.0
    sol = solve_or_partial(spec, nodes, **solver_options)
    fraction = boundary_mass_fraction(sol, shape, width)
    logger.info(f"{spec.describe()}: {fraction:.4f} of the mass within {width:.3g} of the boundary")
    return fraction


def bounded_density_check(spec: KernelSpec, sol: EquilibriumSolution, delta: float,
                          tol: float = 0.05) -> DensityBound:
    """
    Compare the largest surface density with the delta-ball bound.

    Riesz (alpha = d-2): max w_i/A_i <= I(E) (d-2) / delta.
    Logarithmic (d = 2): max w_i/A_i <= I_log(E) / |log delta|.

    Raises:
        ContractError: For Riesz exponents other than d-2, or missing patch areas
    """
    if delta <= 0:
        raise ContractError(f"delta must be positive, got {delta}")
    d = spec.dimension
    if spec.is_riesz:
        if not math.isclose(spec.alpha, d - 2, rel_tol=0.0, abs_tol=1e-12):
            raise ContractError(f"Density bound needs alpha = d - 2, got alpha={spec.alpha}, d={d}")
        bound = sol.energy * (d - 2) / delta
    else:
        bound = math.inf if delta == 1.0 else sol.energy / abs(math.log(delta))
    max_density = float(np.max(sol.measure.densities()))
    return DensityBound(max_density, bound, bool(max_density <= bound * (1.0 + tol)))


def ball_boundary_nodes(d: int, radius: float, N: int) -> SurfaceQuadrature:
    """Surface quadrature of the centered ball of the given radius."""
    return surface_quadrature(Ball((0.0,) * d, radius), N)
