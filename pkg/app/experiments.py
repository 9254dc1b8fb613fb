"""
Constructions and sweeps around the charged-drop problem.

Each experiment returns SweepRecords (or a list of them) so the runner can
store, log and save them uniformly. Closed-form constructions never touch the
solver; sweeps that do are parallel over shapes and merged in input order.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple
import numpy as np

from app.equilibrium import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOLERANCE,
    DEFAULT_WEIGHT_FLOOR,
    as_node_set,
    bounded_density_check,
    el_residual,
    solve_equilibrium,
    solve_or_partial,
)
from app.exceptions import ContractError, ConvergenceError
from app.functional import (
    ball_functional,
    connected_lower_bound,
    splitting_delta_condition,
    splitting_threshold_charge,
)
from app.geometry import (
    Ball,
    BallUnion,
    Cube,
    Mode,
    NearlySpherical,
    delta_ball_check,
    isoperimetric_deficit,
    normalize_shape,
    perimeter,
    sobolev_seminorms,
    surface_quadrature,
)
from app.kernel import KernelSpec, ball_riesz_energy, circle_log_energy
from app.lattice import unit_ball_volume, unit_sphere_area
from app.logger import Logger
from app.measure import rescale_measure
from app.sweep_record import SweepRecord

SLACK = 0.2
SUITE_AMPLITUDES = (0.01, 0.02, 0.05)
SUITE_DEGREES = (2, 3, 4)
MAX_AMPLITUDE = 0.05

logger = Logger.get_child(__name__)


class ConstantFit(NamedTuple):
    """Least-squares slope through the origin, envelope ratio and the slack-adjusted constant."""

    slope: float
    envelope: float
    constant: float


def fit_constant(x: Sequence[float], y: Sequence[float], kind: str = 'lower',
                 slack: float = SLACK) -> ConstantFit:
    """
    Fit y ~ c x over points with x > 0.

    kind='lower' looks for y >= c x (constant = min(y/x) shrunk by slack),
    kind='upper' for y <= c x (constant = max(y/x) grown by slack).

    Raises:
        ContractError: On an unknown kind or when no point has x > 0
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    usable = x > 0
    if not np.any(usable):
        raise ContractError("fit_constant needs at least one point with x > 0")
    x, y = x[usable], y[usable]
    slope = float(np.dot(x, y) / np.dot(x, x))
    ratios = y / x
    if kind == 'lower':
        envelope = float(np.min(ratios))
        constant = envelope * (1.0 - slack) if envelope > 0 else envelope * (1.0 + slack)
    elif kind == 'upper':
        envelope = float(np.max(ratios))
        constant = envelope * (1.0 + slack) if envelope > 0 else envelope * (1.0 - slack)
    else:
        raise ContractError(f"Unknown fit kind: '{kind}' (expected 'lower' or 'upper')")
    return ConstantFit(slope, envelope, constant)


def _mode_label(coeffs: Dict[Mode, float]) -> str:
    return ";".join(f"{l}:{m}:{c:.6g}" for (l, m), c in sorted(coeffs.items()))


# --- shape suite -----------------------------------------------------------

def default_shape_suite(seed: int = 0, count: int = 20, d: int = 3) -> List[NearlySpherical]:
    """
    Volume-normalized, recentered nearly spherical shapes.

    The first shapes are the single zonal modes l in {2, 3, 4} at amplitudes
    {0.01, 0.02, 0.05}; the rest mix one to three random modes with a total
    coefficient budget of 0.05.
    """
    if count < 1:
        raise ContractError(f"Suite size must be positive, got {count}")
    rng = np.random.default_rng(seed)
    raw: List[Dict[Mode, float]] = []
    for l in SUITE_DEGREES:
        for amplitude in SUITE_AMPLITUDES:
            raw.append({(l, 0) if d == 3 else (l, l): amplitude})
    while len(raw) < count:
        coeffs: Dict[Mode, float] = {}
        for _ in range(int(rng.integers(1, 4))):
            l = int(rng.choice(SUITE_DEGREES))
            m = int(rng.integers(-l, l + 1)) if d == 3 else int(rng.choice((l, -l)))
            coeffs[(l, m)] = coeffs.get((l, m), 0.0) + float(rng.uniform(-1.0, 1.0))
        budget = rng.uniform(0.2, 1.0) * MAX_AMPLITUDE
        total = sum(abs(c) for c in coeffs.values())
        raw.append({mode: c * budget / total for mode, c in coeffs.items()})
    return [normalize_shape(NearlySpherical(1.0, coeffs, d)) for coeffs in raw[:count]]


# --- closed-form constructions -----------------------------------------------

def nonexistence_sweep(d: int, alpha: float, m: float, Q: float, beta: float,
                       N_list: Iterable[int]) -> List[SweepRecord]:
    """
    Energy of an uncharged reservoir ball plus N small balls of radius N^(-beta),
    each carrying Q/N, with cross interactions dropped.

    Raises:
        ContractError: If beta is outside (1/(d-1), 1/alpha), N_list is not
            increasing, or the small balls exceed the volume m
    """
    if not 1.0 / (d - 1) < beta < 1.0 / alpha:
        raise ContractError(f"beta must lie in ({1.0 / (d - 1):g}, {1.0 / alpha:g}), got {beta}")
    N_list = [int(n) for n in N_list]
    if any(b <= a for a, b in zip(N_list, N_list[1:])) or not N_list or N_list[0] < 1:
        raise ContractError(f"N_list must be positive and strictly increasing, got {N_list}")

    omega = unit_ball_volume(d)
    sphere = unit_sphere_area(d)
    unit_energy = ball_riesz_energy(d, alpha)
    limit = (m / omega) ** ((d - 1.0) / d) * sphere
    ball_value = ball_functional(d, alpha, m, Q)

    records: List[SweepRecord] = []
    previous = math.inf
    for N in N_list:
        r = N ** (-beta)
        small_volume = N * omega * r ** d
        if small_volume >= m:
            raise ContractError(f"N={N} balls of radius {r:.4g} exceed the volume m={m}")
        reservoir = ((m - small_volume) / omega) ** ((d - 1.0) / d) * sphere
        small_perimeter = N * sphere * r ** (d - 1)
        charge_energy = Q * Q / N * r ** (-alpha) * unit_energy
        total = reservoir + small_perimeter + charge_energy
        records.append(SweepRecord(
            'nonexistence',
            {'d': d, 'alpha': alpha, 'm': m, 'Q': Q, 'beta': beta, 'N': N},
            {'total': total, 'reservoir': reservoir, 'small_perimeter': small_perimeter,
             'charge_energy': charge_energy, 'limit': limit, 'ball': ball_value},
            {'below_ball': total < ball_value, 'decreasing': total < previous,
             'near_limit': abs(total - limit) <= 0.05 * limit},
        ))
        previous = total
    return records


def splitting_construction(d: int, alpha: float, delta: float, Q: float) -> SweepRecord:
    """
    N = round(delta^-d) equal balls of total volume omega_d, equally charged and
    infinitely far apart, against the lower bound for connected sets.
    """
    if delta <= 0 or delta > 1:
        raise ContractError(f"delta must lie in (0, 1], got {delta}")
    if Q < 0:
        raise ContractError(f"Charge must be nonnegative, got {Q}")
    N = max(1, int(round(delta ** (-d))))
    r = N ** (-1.0 / d)
    sphere = unit_sphere_area(d)
    total = N * r ** (d - 1) * sphere + Q * Q / N * r ** (-alpha) * ball_riesz_energy(d, alpha)
    bound = connected_lower_bound(delta, unit_ball_volume(d), Q, d, alpha)
    threshold = splitting_threshold_charge(d, alpha, delta)
    proven_regime = alpha < 1.0
    small_delta = splitting_delta_condition(d, alpha, delta)
    below = total < bound
    guaranteed = proven_regime and small_delta and Q > threshold
    return SweepRecord(
        'splitting',
        {'d': d, 'alpha': alpha, 'delta': delta, 'Q': Q, 'N': N},
        {'total': total, 'connected_bound': bound, 'threshold_charge': threshold, 'radius': r},
        {'proven_regime': proven_regime, 'small_delta': small_delta, 'split_below_bound': below,
         'consistent': below or not guaranteed},
    )


def reservoir_splitting_construction(d: int, alpha: float, delta: float, Q: float,
                                     beta: float) -> SweepRecord:
    """
    delta^(-beta) charged balls of radius delta next to an uncharged reservoir
    ball holding the remaining volume; for alpha < (d-1)/d and beta in
    (d alpha, d-1) this beats connected sets at smaller charges.
    """
    if not alpha < (d - 1.0) / d:
        raise ContractError(f"Reservoir splitting needs alpha < {(d - 1.0) / d:g}, got {alpha}")
    if not d * alpha < beta < d - 1:
        raise ContractError(f"beta must lie in ({d * alpha:g}, {d - 1}), got {beta}")
    omega = unit_ball_volume(d)
    sphere = unit_sphere_area(d)
    N = max(1, int(round(delta ** (-beta))))
    small_volume = N * omega * delta ** d
    if small_volume >= omega:
        raise ContractError(f"{N} balls of radius {delta} exceed the unit ball volume")
    reservoir = (1.0 - small_volume / omega) ** ((d - 1.0) / d) * sphere
    total = (reservoir + N * delta ** (d - 1) * sphere
             + Q * Q / N * delta ** (-alpha) * ball_riesz_energy(d, alpha))
    bound = connected_lower_bound(delta, omega, Q, d, alpha)
    return SweepRecord(
        'reservoir_splitting',
        {'d': d, 'alpha': alpha, 'delta': delta, 'Q': Q, 'beta': beta, 'N': N},
        {'total': total, 'connected_bound': bound, 'reservoir': reservoir},
        {'split_below_bound': total < bound},
    )


def expansion_identity_check(num_trials: int = 100_000, seed: int = 0, d: int = 3) -> float:
    """
    Largest error of |R(x)x - R(y)y|^2 = |x-y|^2 (1 + a + b + ab + psi),
    a = phi(x), b = phi(y), psi = (a - b)^2 / |x-y|^2, over random unit x != y.
    """
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(num_trials, d))
    y = rng.normal(size=(num_trials, d))
    x /= np.linalg.norm(x, axis=1)[:, None]
    y /= np.linalg.norm(y, axis=1)[:, None]
    a = rng.uniform(-0.5, 0.5, num_trials)
    b = rng.uniform(-0.5, 0.5, num_trials)
    separation = np.sum((x - y) ** 2, axis=1)
    keep = separation > 1e-12
    x, y, a, b, separation = x[keep], y[keep], a[keep], b[keep], separation[keep]
    lhs = np.sum(((1.0 + a)[:, None] * x - (1.0 + b)[:, None] * y) ** 2, axis=1)
    psi = (a - b) ** 2 / separation
    rhs = separation * (1.0 + a + b + a * b + psi)
    return float(np.max(np.abs(lhs - rhs)))


# --- solver-backed sweeps -------------------------------------------------------

def _boundary_energy(spec: KernelSpec, shape, N: int, tol: float, max_iter: int,
                     weight_floor: float = DEFAULT_WEIGHT_FLOOR) -> float:
    nodes = surface_quadrature(shape, N)
    return solve_equilibrium(spec, nodes, tol=tol, max_iter=max_iter, weight_floor=weight_floor).energy


def _stability_point(shape: NearlySpherical, delta: float, N: int, tol: float,
                     max_iter: int, weight_floor: float) -> Optional[Tuple[float, float]]:
    """(deficit, boundary energy) of a normalized shape, or None when it is skipped."""
    label = _mode_label(shape.unit_perturbation())
    if not delta_ball_check(shape, delta, N):
        logger.info(f"Skipping {label}: fails the {delta:g}-ball check")
        return None
    try:
        energy = _boundary_energy(KernelSpec.riesz(3, 1.0), shape, N, tol, max_iter, weight_floor)
    except ConvergenceError as e:
        logger.warning(f"Skipping {label}: {e}")
        return None
    return isoperimetric_deficit(shape), energy


def stability_sweep(delta: float, Q_list: Sequence[float], modes: Sequence[Mode],
                    amplitudes: Sequence[float], N: int = 2000, tol: float = DEFAULT_TOLERANCE,
                    max_iter: int = DEFAULT_MAX_ITER, threads: int = 1,
                    weight_floor: float = DEFAULT_WEIGHT_FLOOR) -> List[SweepRecord]:
    """
    F(E) - F(B) = D(E) + Q^2 (I(E) - I(B)) for single-mode perturbations of
    the unit ball (d=3, alpha=1), with I(B) solved on the same N.

    One record per (Q, mode, amplitude) plus one summary record per Q.
    """
    if delta <= 0:
        raise ContractError(f"delta must be positive, got {delta}")
    if any(Q < 0 for Q in Q_list):
        raise ContractError("Charges must be nonnegative")
    spec = KernelSpec.riesz(3, 1.0)
    ball_energy = _boundary_energy(spec, Ball.unit(3), N, tol, max_iter, weight_floor)

    cases = [(mode, amplitude) for mode in modes for amplitude in amplitudes]

    def evaluate(case):
        mode, amplitude = case
        try:
            shape = normalize_shape(NearlySpherical(1.0, {mode: amplitude}, 3))
        except ContractError as e:
            logger.info(f"Skipping mode {mode} at amplitude {amplitude}: {e}")
            return None
        return _stability_point(shape, delta, N, tol, max_iter, weight_floor)

    if threads > 1 and len(cases) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            points = list(pool.map(evaluate, cases))
    else:
        points = [evaluate(case) for case in cases]

    records: List[SweepRecord] = []
    ball_perimeter = unit_sphere_area(3)
    for Q in Q_list:
        gaps = []
        for (mode, amplitude), point in zip(cases, points):
            if point is None:
                continue
            deficit, energy = point
            gap = deficit + Q * Q * (energy - ball_energy)
            q_star = math.sqrt(deficit / (ball_energy - energy)) if energy < ball_energy else math.inf
            gaps.append(gap)
            records.append(SweepRecord(
                'stability',
                {'delta': delta, 'Q': Q, 'l': mode[0], 'm': mode[1], 'amplitude': amplitude, 'N': N},
                {'deficit': deficit, 'energy': energy, 'ball_energy': ball_energy, 'gap': gap,
                 'F_shape': ball_perimeter + deficit + Q * Q * energy,
                 'F_ball': ball_perimeter + Q * Q * ball_energy, 'critical_charge': q_star},
                {'ball_wins': gap > 0},
            ))
        records.append(SweepRecord(
            'stability_summary',
            {'delta': delta, 'Q': Q, 'N': N, 'shapes': len(gaps)},
            {'min_gap': min(gaps) if gaps else math.nan},
            {'ball_wins': bool(gaps) and min(gaps) > 0},
        ))
    return records


def empirical_threshold(records: Sequence[SweepRecord]) -> float:
    """Largest tested Q whose stability summary says the ball wins (nan if none)."""
    winners = [r.parameters['Q'] for r in records
               if r.kind == 'stability_summary' and r.verdicts.get('ball_wins')]
    return max(winners) if winners else math.nan


def _ball_boundary_energy(N: int, tol: float, max_iter: int, weight_floor: float) -> float:
    return _boundary_energy(KernelSpec.riesz(3, 1.0), Ball.unit(3), N, tol, max_iter, weight_floor)


def mainstab_check(shape: NearlySpherical, N: int = 2000, tol: float = DEFAULT_TOLERANCE,
                   max_iter: int = DEFAULT_MAX_ITER, ball_energy: Optional[float] = None,
                   weight_floor: float = DEFAULT_WEIGHT_FLOOR) -> SweepRecord:
    """
    Ratio ((P(B)/P(E))^2 I(B) - I(E)) / (|f|_inf^2 D(E)) for a normalized shape
    (d=3, alpha=1), f the equilibrium surface density; the numerator is the
    energy of the perimeter average of f spread on the unit sphere minus I(E).

    Raises:
        ContractError: If the shape is not a normalized d=3 graph
        ConvergenceError: If the equilibrium solve fails
    """
    if shape.dimension != 3:
        raise ContractError("mainstab_check is set up for d=3, alpha=1")
    if ball_energy is None:
        ball_energy = _ball_boundary_energy(N, tol, max_iter, weight_floor)
    coeffs = shape.unit_perturbation()
    norms = sobolev_seminorms(coeffs, 3, 1.0)
    sol = solve_equilibrium(KernelSpec.riesz(3, 1.0), surface_quadrature(shape, N), tol=tol, max_iter=max_iter,
                            weight_floor=weight_floor)
    sup_density = float(np.max(sol.measure.densities()))

    if norms.h1 == 0.0:
        deficit, numerator, ratio = 0.0, 0.0, 0.0
    else:
        deficit = isoperimetric_deficit(shape)
        numerator = (unit_sphere_area(3) / perimeter(shape)) ** 2 * ball_energy - sol.energy
        ratio = numerator / (sup_density ** 2 * deficit)
    return SweepRecord(
        'mainstab',
        {'coeffs': _mode_label(coeffs), 'N': N},
        {'numerator': numerator, 'deficit': deficit, 'sup_density': sup_density,
         'energy': sol.energy, 'ball_energy': ball_energy, 'ratio': ratio, 'h1': norms.h1},
        {'positive_deficit': deficit > 0 or norms.h1 == 0.0},
    )


def mainstab_sweep(shapes: Sequence[NearlySpherical], N: int = 2000, tol: float = DEFAULT_TOLERANCE,
                   max_iter: int = DEFAULT_MAX_ITER, threads: int = 1,
                   weight_floor: float = DEFAULT_WEIGHT_FLOOR) -> Tuple[List[SweepRecord], ConstantFit]:
    """mainstab_check over a suite with the fitted upper constant C; unconverged shapes are skipped."""
    ball_energy = _ball_boundary_energy(N, tol, max_iter, weight_floor)

    def check(shape):
        try:
            return mainstab_check(shape, N, tol, max_iter, ball_energy, weight_floor)
        except ConvergenceError as e:
            logger.warning(f"Skipping shape in mainstab sweep: {e}")
            return None

    if threads > 1 and len(shapes) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = [r for r in pool.map(check, shapes) if r is not None]
    else:
        records = [r for r in map(check, shapes) if r is not None]

    fit = fit_constant([1.0] * len(records), [r.energies['ratio'] for r in records], 'upper')
    for record in records:
        record.energies['fitted_C'] = fit.constant
        record.verdicts['within_fit'] = record.energies['ratio'] <= fit.constant
    return records, fit


def fuglede_sweep(shapes: Sequence[NearlySpherical]) -> Tuple[List[SweepRecord], ConstantFit, ConstantFit]:
    """
    Deficit against the spectral H1 and L2 norms of phi (R = 1 + phi).

    Returns:
        (records, c0 fit of D >= c0 H1, fit of |mean phi| <= C L2)
    """
    rows = []
    for shape in shapes:
        coeffs = shape.unit_perturbation()
        d = shape.dimension
        norms = sobolev_seminorms(coeffs, d, 1.0)
        mean = abs(coeffs.get((0, 0), 0.0)) * math.sqrt(unit_sphere_area(d))
        rows.append((coeffs, isoperimetric_deficit(shape), norms, mean))

    c0 = fit_constant([r[2].h1 for r in rows], [r[1] for r in rows], 'lower')
    mean_fit = fit_constant([r[2].l2 for r in rows], [r[3] for r in rows], 'upper')
    records = []
    for coeffs, deficit, norms, mean in rows:
        records.append(SweepRecord(
            'fuglede',
            {'coeffs': _mode_label(coeffs)},
            {'deficit': deficit, 'h1': norms.h1, 'l2': norms.l2, 'mean': mean,
             'ratio': deficit / norms.h1 if norms.h1 > 0 else math.nan,
             'fitted_c0': c0.constant, 'fitted_mean_C': mean_fit.constant},
            {'positive_c0': c0.constant > 0, 'deficit_controls_h1': deficit >= c0.constant * norms.h1,
             'poincare_chain': norms.h1 >= (d - 1) * norms.l2 * (1.0 - 1e-12),
             'mean_controlled': mean <= mean_fit.constant * norms.l2 + 1e-15},
        ))
    return records, c0, mean_fit


def density_bound_sweep(shapes: Sequence, delta: float, N: int = 2000, tol: float = DEFAULT_TOLERANCE,
                        max_iter: int = DEFAULT_MAX_ITER,
                        weight_floor: float = DEFAULT_WEIGHT_FLOOR) -> List[SweepRecord]:
    """Largest equilibrium density against I(E)(d-2)/delta on every delta-ball-feasible shape (alpha = d-2)."""
    records = []
    for shape in shapes:
        d = shape.dimension
        if not delta_ball_check(shape, delta, N):
            logger.info(f"Skipping shape in density sweep: fails the {delta:g}-ball check")
            continue
        spec = KernelSpec.riesz(d, d - 2.0)
        sol = solve_equilibrium(spec, surface_quadrature(shape, N), tol=tol, max_iter=max_iter,
                                weight_floor=weight_floor)
        check = bounded_density_check(spec, sol, delta)
        label = _mode_label(shape.unit_perturbation()) if isinstance(shape, NearlySpherical) else type(shape).__name__
        records.append(SweepRecord(
            'density_bound',
            {'shape': label, 'delta': delta, 'N': N},
            {'max_density': check.max_density, 'bound': check.bound, 'energy': sol.energy},
            {'holds': check.holds},
        ))
    return records


# --- logarithmic checks ----------------------------------------------------------

def _corner_distance(cube: Cube, points: np.ndarray) -> np.ndarray:
    """Arc distance from square boundary nodes to the nearest corner."""
    offsets = np.abs(points - np.asarray(cube.center))
    return cube.side / 2.0 - np.min(offsets, axis=1)


def _corner_profile(cube: Cube, N: int, tol: float, max_iter: int, weight_floor: float):
    sol = solve_or_partial(KernelSpec.logarithmic(2), surface_quadrature(cube, N), tol=tol, max_iter=max_iter,
                           weight_floor=weight_floor)
    return sol, _corner_distance(cube, sol.measure.nodes), sol.measure.densities()


def _monotone_toward_corner(distance: np.ndarray, density: np.ndarray, window: float) -> bool:
    near = distance <= window
    levels = np.round(distance[near], 12)
    unique = np.unique(levels)
    means = np.array([np.mean(density[near][levels == level]) for level in unique])
    return bool(len(means) < 2 or np.all(np.diff(means) < 0))


def corner_blowup_study(side: float = 2.0, N: int = 4000, tol: float = DEFAULT_TOLERANCE,
                        max_iter: int = DEFAULT_MAX_ITER,
                        weight_floor: float = DEFAULT_WEIGHT_FLOOR) -> SweepRecord:
    """
    Logarithmic equilibrium density on the boundary of a square.

    The density grows toward the corners; the coarse run at N/2 checks that
    the largest density keeps growing under refinement. The potential spread
    is reported away from the corners (beyond three mesh widths) and near them.
    """
    cube = Cube(side, 2)
    sol, distance, density = _corner_profile(cube, N, tol, max_iter, weight_floor)
    _, _, coarse_density = _corner_profile(cube, N // 2, tol, max_iter, weight_floor)

    mesh = 4.0 * side / len(sol.measure)
    near_corner = distance <= 3.0 * mesh
    spec = KernelSpec.logarithmic(2)
    away = el_residual(spec, sol, weight_floor=weight_floor, exclude=near_corner)
    close = el_residual(spec, sol, weight_floor=weight_floor, exclude=~near_corner)
    midpoint = float(np.mean(density[distance >= np.max(distance) - 1e-12]))
    corner = float(np.max(density))
    return SweepRecord(
        'corner',
        {'side': side, 'N': N},
        {'corner_density': corner, 'midpoint_density': midpoint, 'ratio': corner / midpoint,
         'coarse_max_density': float(np.max(coarse_density)), 'energy': sol.energy,
         'spread_away': away.spread, 'spread_near_corner': close.spread, 'residual': sol.residual},
        {'corner_exceeds_midpoint': corner / midpoint > 1.5,
         'monotone_toward_corner': _monotone_toward_corner(distance, density, 0.1 * side),
         'grows_under_refinement': corner > float(np.max(coarse_density)),
         'converged': sol.converged},
    )


def circle_density_profile(radius: float = 1.0, N: int = 1000, tol: float = DEFAULT_TOLERANCE,
                           max_iter: int = DEFAULT_MAX_ITER,
                           weight_floor: float = DEFAULT_WEIGHT_FLOOR) -> SweepRecord:
    """Logarithmic equilibrium on a circle: flat density and energy -log r."""
    circle = Ball((0.0, 0.0), radius)
    sol = solve_equilibrium(KernelSpec.logarithmic(2), surface_quadrature(circle, N), tol=tol, max_iter=max_iter,
                            weight_floor=weight_floor)
    density = sol.measure.densities()
    expected = circle_log_energy(radius)
    spread = float(np.ptp(density) / np.mean(density))
    return SweepRecord(
        'circle',
        {'radius': radius, 'N': N},
        {'energy': sol.energy, 'expected': expected, 'density_spread': spread},
        {'flat': spread < 1e-6, 'energy_matches': abs(sol.energy - expected) <= 0.01 * max(abs(expected), 1.0)},
    )


def log_divergence_and_scaling(radius: float = 1.0, separations: Sequence[float] = (8.0, 16.0, 32.0, 64.0),
                               lambda_list: Sequence[float] = (0.5, 2.0, 3.7), N: int = 800,
                               tol: float = DEFAULT_TOLERANCE,
                               max_iter: int = DEFAULT_MAX_ITER,
                               weight_floor: float = DEFAULT_WEIGHT_FLOOR) -> List[SweepRecord]:
    """
    Two circles at growing center distance s: the logarithmic energy follows
    -(1/2) log r - (1/2) log s without a lower bound. Dilating a set by lambda
    shifts its logarithmic energy by exactly -log lambda.
    """
    spec = KernelSpec.logarithmic(2)
    options = {'tol': tol, 'max_iter': max_iter, 'weight_floor': weight_floor}
    records = []
    previous = None
    for s in separations:
        if s <= 2.0 * radius:
            raise ContractError(f"Separation {s} lets circles of radius {radius} overlap")
        pair = BallUnion((Ball((-s / 2.0, 0.0), radius), Ball((s / 2.0, 0.0), radius)))
        energy = solve_equilibrium(spec, surface_quadrature(pair, N), **options).energy
        predicted = -0.5 * math.log(radius) - 0.5 * math.log(s)
        verdicts = {}
        energies = {'energy': energy, 'predicted': predicted}
        if previous is not None:
            slope = (energy - previous[1]) / math.log(s / previous[0])
            energies['slope'] = slope
            verdicts['slope_matches'] = abs(slope + 0.5) <= 0.02 * 0.5
            verdicts['decreasing'] = energy < previous[1]
        records.append(SweepRecord('log_divergence', {'radius': radius, 's': s, 'N': N}, energies, verdicts))
        previous = (s, energy)

    base = as_node_set(surface_quadrature(Ball((0.0, 0.0), radius), N))
    base_energy = solve_equilibrium(spec, base, **options).energy
    for lam in lambda_list:
        scaled = solve_equilibrium(spec, rescale_measure(base, lam), **options).energy
        defect = scaled - base_energy + math.log(lam)
        records.append(SweepRecord(
            'log_scaling',
            {'radius': radius, 'lambda': lam, 'N': N},
            {'energy': base_energy, 'scaled_energy': scaled, 'defect': defect},
            {'shift_exact': abs(defect) <= 1e-10},
        ))
    return records
