"""The charged-drop functionals F and G, charge normalization and closed-form bounds."""

import math
from dataclasses import asdict, dataclass

from app.equilibrium import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOLERANCE,
    DEFAULT_WEIGHT_FLOOR,
    EquilibriumSolution,
    as_node_set,
    mixed_node_set,
    solve_equilibrium,
)
from app.exceptions import ContractError
from app.geometry import Shape, perimeter, surface_quadrature, volume
from app.kernel import KernelSpec, ball_riesz_energy, circle_log_energy
from app.lattice import unit_ball_volume, unit_sphere_area
from app.logger import Logger

INTERIOR_SHARE = 0.75

logger = Logger.get_child(__name__)


@dataclass(frozen=True)
class FunctionalReport:
    """
    One evaluation of F (or G) on a shape.

    deficit is P(E) minus the perimeter of the ball with the same volume, so
    it equals D(E) once |E| = omega_d.
    """

    perimeter: float
    riesz_energy: float
    charge: float
    total: float
    deficit: float
    normalized_charge: float
    volume: float = math.nan
    el_spread: float = math.nan
    el_violation: float = math.nan
    residual: float = math.nan
    iterations: int = 0
    nodes: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> 'FunctionalReport':
        return cls(**{key: data[key] for key in cls.__dataclass_fields__ if key in data})


def _check_charge(Q: float):
    if Q < 0:
        raise ContractError(f"Charge must be nonnegative, got {Q}")


def _charge_exponent(d: int, alpha: float) -> float:
    return (d - 1 + alpha) / (2.0 * d)


def _exponent_of(spec: KernelSpec) -> float:
    return spec.alpha if spec.is_riesz else 0.0


def normalized_charge(Q: float, m: float, d: int, alpha: float) -> float:
    """Scale-invariant charge Q / m^((d-1+alpha)/(2d))."""
    if m <= 0:
        raise ContractError(f"Volume must be positive, got {m}")
    return Q / m ** _charge_exponent(d, alpha)


def rescaled_charge(Q: float, m: float, d: int, alpha: float) -> float:
    """Charge Q' such that (E, Q) at volume m matches (E / lambda, Q') at volume omega_d."""
    return normalized_charge(Q, m, d, alpha) * unit_ball_volume(d) ** _charge_exponent(d, alpha)


def rescale_functional(report: FunctionalReport, lam: float, d: int, spec: KernelSpec) -> float:
    """
    F(lambda E) at the same charge from a report on E.

    Riesz: lambda^(d-1) P + Q^2 lambda^(-alpha) I; logarithmic: I shifts by -log lambda.
    """
    if lam <= 0:
        raise ContractError(f"Scale factor must be positive, got {lam}")
    scaled_perimeter = lam ** (d - 1) * report.perimeter
    if spec.is_riesz:
        energy = lam ** (-spec.alpha) * report.riesz_energy
    else:
        energy = report.riesz_energy - math.log(lam)
    return scaled_perimeter + report.charge ** 2 * energy


def ball_functional(d: int, alpha: float, m: float, Q: float) -> float:
    """Closed-form F of the ball of volume m."""
    _check_charge(Q)
    if m <= 0:
        raise ContractError(f"Volume must be positive, got {m}")
    lam = (m / unit_ball_volume(d)) ** (1.0 / d)
    return lam ** (d - 1) * unit_sphere_area(d) + Q * Q * lam ** (-alpha) * ball_riesz_energy(d, alpha)


def _report(shape: Shape, spec: KernelSpec, Q: float, sol: EquilibriumSolution) -> FunctionalReport:
    d = spec.dimension
    set_perimeter = perimeter(shape)
    set_volume = volume(shape)
    ball_perimeter = (set_volume / unit_ball_volume(d)) ** ((d - 1.0) / d) * unit_sphere_area(d)
    return FunctionalReport(
        perimeter=set_perimeter,
        riesz_energy=sol.energy,
        charge=Q,
        total=set_perimeter + Q * Q * sol.energy,
        deficit=set_perimeter - ball_perimeter,
        normalized_charge=normalized_charge(Q, set_volume, d, _exponent_of(spec)),
        volume=set_volume,
        el_spread=sol.el_spread,
        el_violation=sol.el_violation,
        residual=sol.residual,
        iterations=sol.iterations,
        nodes=len(sol.measure),
    )


def functional_nodes(shape: Shape, spec: KernelSpec, N: int):
    """Boundary nodes when alpha <= d-2 (or logarithmic); boundary plus interior at 1:3 otherwise."""
    if spec.is_coulombic_or_below:
        return as_node_set(surface_quadrature(shape, N))
    n_interior = int(round(INTERIOR_SHARE * N))
    return mixed_node_set(shape, N - n_interior, n_interior)


def evaluate_F(shape: Shape, spec: KernelSpec, Q: float, N: int,
               tol: float = DEFAULT_TOLERANCE, max_iter: int = DEFAULT_MAX_ITER,
               threads: int = 1, weight_floor: float = DEFAULT_WEIGHT_FLOOR) -> FunctionalReport:
    """
    F(E) = P(E) + Q^2 I(E).

    Raises:
        ContractError: If Q < 0
        ConvergenceError: If the equilibrium solve fails
    """
    _check_charge(Q)
    nodes = functional_nodes(shape, spec, N)
    sol = solve_equilibrium(spec, nodes, tol=tol, max_iter=max_iter, weight_floor=weight_floor, threads=threads)
    report = _report(shape, spec, Q, sol)
    logger.debug(f"F = {report.total:.10g} (P = {report.perimeter:.10g}, I = {report.riesz_energy:.10g})")
    return report


def evaluate_G(shape: Shape, spec: KernelSpec, Q: float, N: int,
               tol: float = DEFAULT_TOLERANCE, max_iter: int = DEFAULT_MAX_ITER,
               threads: int = 1, weight_floor: float = DEFAULT_WEIGHT_FLOOR) -> FunctionalReport:
    """
    G(E) = P(E) + Q^2 I(boundary of E), the charge constrained to the boundary.

    Raises:
        ContractError: If Q < 0 or alpha >= d-1 (infinite boundary energy)
        ConvergenceError: If the equilibrium solve fails
    """
    _check_charge(Q)
    if spec.is_riesz and spec.alpha >= spec.dimension - 1:
        raise ContractError(f"G is infinite for alpha={spec.alpha} >= d-1={spec.dimension - 1}")
    n_surface = N if spec.is_coulombic_or_below else N - int(round(INTERIOR_SHARE * N))
    nodes = as_node_set(surface_quadrature(shape, n_surface))
    sol = solve_equilibrium(spec, nodes, tol=tol, max_iter=max_iter, weight_floor=weight_floor, threads=threads)
    return _report(shape, spec, Q, sol)


def connected_lower_bound(delta: float, m: float, Q: float, d: int, alpha: float) -> float:
    """
    Lower bound on F over connected sets of volume m with the delta-ball condition:
    (m/omega_d)^((d-1)/d) P(B) + (sqrt(d) 2^(d+2))^(-alpha) (m/omega_d)^(-alpha) Q^2 delta^((d-1) alpha).
    """
    if delta <= 0 or m <= 0:
        raise ContractError("connected_lower_bound needs positive delta and m")
    _check_charge(Q)
    ratio = m / unit_ball_volume(d)
    constant = math.sqrt(d) * 2.0 ** (d + 2)
    return (ratio ** ((d - 1.0) / d) * unit_sphere_area(d)
            + constant ** (-alpha) * ratio ** (-alpha) * Q * Q * delta ** ((d - 1) * alpha))


def splitting_threshold_charge(d: int, alpha: float, delta: float) -> float:
    """Charge above which 1/delta split balls beat every connected set (unit-ball volume)."""
    if delta <= 0:
        raise ContractError(f"delta must be positive, got {delta}")
    constant = math.sqrt(d) * 2.0 ** (d + 2)
    return (math.sqrt(2.0 * unit_sphere_area(d)) * constant ** (alpha / 2.0)
            * delta ** (-(d * alpha + 1.0 - alpha) / 2.0))


def splitting_delta_condition(d: int, alpha: float, delta: float) -> bool:
    """Small-delta condition I(B) delta^(d-alpha) <= (1/2) (sqrt(d) 2^(d+2))^(-alpha) delta^((d-1) alpha)."""
    constant = math.sqrt(d) * 2.0 ** (d + 2)
    return bool(ball_riesz_energy(d, alpha) * delta ** (d - alpha)
                <= 0.5 * constant ** (-alpha) * delta ** ((d - 1) * alpha))


def ball_energy(spec: KernelSpec, radius: float = 1.0) -> float:
    """Equilibrium energy of the centered ball of the given radius (closed form)."""
    if radius <= 0:
        raise ContractError(f"Radius must be positive, got {radius}")
    if spec.is_riesz:
        return radius ** (-spec.alpha) * ball_riesz_energy(spec.dimension, spec.alpha)
    if spec.dimension != 2:
        raise ContractError("Closed-form logarithmic energy is available for the disk only")
    return circle_log_energy(radius)
