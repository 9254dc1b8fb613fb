"""Tests for the equilibrium solver and its checks."""

import json
import math
from pathlib import Path
import tempfile
import numpy as np
import pandas as pd
import pytest
from app.exceptions import ContractError, ConvergenceError
from app.geometry import Ball, Cube, surface_quadrature
from app.kernel import KernelSpec, sphere_riesz_energy, self_energy_quadrature
from app.equilibrium import (
    EquilibriumSolution,
    as_node_set,
    mixed_node_set,
    assemble_kernel_matrix,
    project_simplex,
    _tangent_lipschitz,
    kkt_residual,
    solve_equilibrium,
    solve_or_partial,
    capacity,
    el_residual,
    boundary_concentration_check,
    bounded_density_check,
    ball_boundary_nodes,
)
from app.measure import point_measure


@pytest.fixture(scope='module')
def sphere_solution():
    """Coulomb equilibrium of the unit sphere in R^3."""
    spec = KernelSpec.riesz(3, 1.0)
    return spec, solve_equilibrium(spec, ball_boundary_nodes(3, 1.0, 400), tol=1e-5)


def test_project_simplex():
    """Projection lands on the simplex and fixes points already there."""
    w = project_simplex(np.array([0.9, 0.5, -2.0, 0.1]))
    assert np.all(w >= 0)
    assert math.fsum(w) == pytest.approx(1.0)
    assert w[2] == 0.0

    inside = np.array([0.2, 0.3, 0.5])
    assert np.allclose(project_simplex(inside), inside)


def test_as_node_set_requires_patches():
    with pytest.raises(ContractError, match="patch areas"):
        as_node_set(point_measure([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]))


def test_ball_boundary_nodes():
    quadrature = ball_boundary_nodes(3, 2.0, 100)
    assert len(quadrature) == 100
    assert quadrature.total_area == pytest.approx(16.0 * np.pi)
    nodes = as_node_set(quadrature)
    assert nodes.is_probability()


def test_assemble_kernel_matrix_symmetric():
    """Kernel matrix is symmetric with patch self terms on the diagonal."""
    spec = KernelSpec.riesz(3, 1.0)
    nodes = ball_boundary_nodes(3, 1.0, 600)
    matrix = assemble_kernel_matrix(spec, nodes)
    assert np.array_equal(matrix, matrix.T)
    assert np.all(np.diag(matrix) > 0)
    # Area-proportional weights reproduce the patch quadrature energy
    mu = as_node_set(nodes)
    assert mu.weights @ matrix @ mu.weights == pytest.approx(self_energy_quadrature(spec, mu), rel=1e-12)
    assert np.array_equal(matrix, assemble_kernel_matrix(spec, nodes, threads=3))


def test_assemble_kernel_matrix_dimension_mismatch():
    with pytest.raises(ContractError, match="Nodes live in"):
        assemble_kernel_matrix(KernelSpec.riesz(2, 0.5), ball_boundary_nodes(3, 1.0, 50))


def test_tangent_lipschitz_paths_agree():
    """Dense and iterative eigenvalue estimates agree."""
    spec = KernelSpec.riesz(3, 0.5)
    matrix = assemble_kernel_matrix(spec, ball_boundary_nodes(3, 1.0, 260))
    projector = np.eye(260) - 1.0 / 260
    dense = np.linalg.eigvalsh(projector @ matrix @ projector)[-1]
    assert _tangent_lipschitz(matrix) == pytest.approx(dense, rel=1e-4)


def test_kkt_residual():
    """Active nodes report spread, inactive nodes report violation."""
    weights = np.array([0.5, 0.5, 0.0])
    assert kkt_residual(weights, np.array([1.0, 1.0, 2.0]), 1.0) == (0.0, 0.0)
    report = kkt_residual(weights, np.array([1.0, 1.2, 0.5]), 1.0)
    assert report.spread == pytest.approx(0.2)
    assert report.violation == pytest.approx(0.5)


def test_sphere_equilibrium_energy(sphere_solution):
    """Coulomb energy of the unit sphere is 1."""
    _, sol = sphere_solution
    assert sol.converged
    assert sol.measure.is_probability()
    assert sol.energy == pytest.approx(sphere_riesz_energy(3, 1.0), rel=0.02)
    assert capacity(sol) == pytest.approx(1.0 / sol.energy)
    assert sol.residual <= 1e-5
    density = sol.measure.densities()
    assert np.max(density) / np.min(density) < 1.1


def test_sphere_equilibrium_density_uniform():
    """2000 sphere nodes: energy within 1%, density spread under 2%, EL residual under 1e-3."""
    spec = KernelSpec.riesz(3, 1.0)
    sol = solve_equilibrium(spec, ball_boundary_nodes(3, 1.0, 2000), tol=1e-5)
    assert sol.energy == pytest.approx(1.0, rel=0.01)
    density = sol.measure.densities()
    assert np.ptp(density) / np.mean(density) < 0.02
    assert sol.el_spread / sol.energy < 1e-3
    assert sol.el_violation / sol.energy < 1e-3


def test_el_residual_recomputed(sphere_solution):
    """Recomputing the potential reproduces the solver's residual."""
    spec, sol = sphere_solution
    report = el_residual(spec, sol)
    assert report.spread == pytest.approx(sol.el_spread, abs=1e-10)
    assert report.violation == pytest.approx(sol.el_violation, abs=1e-10)


def test_solution_save():
    """Test saving a solution writes a CSV and a JSON sidecar."""
    spec = KernelSpec.logarithmic()
    sol = solve_equilibrium(spec, ball_boundary_nodes(2, 1.0, 40))
    with tempfile.TemporaryDirectory() as tmpdir:
        path = Path(tmpdir) / 'out' / 'equilibrium.csv'
        sol.save(str(path), provenance={'version': '0.1.0', 'tolerance': 1e-6})
        assert path.exists()
        summary = json.loads(path.with_suffix('.json').read_text())
        frame = pd.read_csv(path, dtype={'meta.version': str})
    assert summary['nodes'] == 40
    assert summary['provenance'] == {'version': '0.1.0', 'tolerance': 1e-6}
    assert len(frame) == 40
    assert set(frame['meta.version']) == {'0.1.0'}
    assert set(frame['meta.tolerance']) == {1e-6}
    assert summary['converged'] is True
    assert 'potential' in sol.to_frame().columns


def test_circle_log_equilibrium():
    """Uniform weights are optimal on equispaced circle nodes."""
    spec = KernelSpec.logarithmic()
    N = 200
    sol = solve_equilibrium(spec, ball_boundary_nodes(2, 2.0, N))
    assert np.allclose(sol.weights, 1.0 / N)
    assert abs(sol.energy + math.log(2.0)) < 1.0 / N
    assert math.isnan(sol.capacity)
    with pytest.raises(ContractError, match="Riesz family"):
        capacity(sol)


def test_solver_raises_with_partial_solution():
    """Hitting max_iter raises ConvergenceError carrying the last iterate."""
    spec = KernelSpec.riesz(3, 1.0)
    nodes = ball_boundary_nodes(3, 1.0, 100)
    with pytest.raises(ConvergenceError) as info:
        solve_equilibrium(spec, nodes, tol=1e-15, max_iter=10, seed=3)
    partial = info.value.solution
    assert isinstance(partial, EquilibriumSolution)
    assert not partial.converged
    assert partial.iterations == 10
    assert info.value.residual == partial.residual

    fallback = solve_or_partial(spec, nodes, tol=1e-15, max_iter=10, seed=3)
    assert fallback.energy == partial.energy


def test_solver_energy_decreases_from_seeded_start():
    """Accepted iterates never increase the energy."""
    spec = KernelSpec.riesz(3, 0.5)
    nodes = ball_boundary_nodes(3, 1.0, 100)
    mu = as_node_set(nodes)
    start = project_simplex(np.random.default_rng(7).dirichlet(np.ones(100)))
    matrix = assemble_kernel_matrix(spec, mu)
    energy_start = start @ matrix @ start
    short = solve_or_partial(spec, nodes, tol=1e-15, max_iter=20, seed=7, matrix=matrix)
    longer = solve_or_partial(spec, nodes, tol=1e-15, max_iter=200, seed=7, matrix=matrix)
    assert short.energy <= energy_start
    assert longer.energy <= short.energy


def test_solver_rejects_bad_tolerance():
    with pytest.raises(ContractError, match="Tolerance"):
        solve_equilibrium(KernelSpec.riesz(3, 1.0), ball_boundary_nodes(3, 1.0, 20), tol=0.0)


def test_mixed_node_set():
    """Boundary and interior nodes carry their own patch dimensions."""
    nodes = mixed_node_set(Ball.unit(3), 200, 300)
    assert nodes.is_probability()
    assert set(np.unique(nodes.patch_dims)) == {2, 3}
    assert len(mixed_node_set(Ball.unit(3), 200, 0)) == 200


def test_boundary_concentration():
    """Mass leaves the interior for alpha = d-2 and stays inside for larger alpha."""
    shape = Ball.unit(3)
    options = {'tol': 1e-6, 'max_iter': 5000}
    coulomb = boundary_concentration_check(KernelSpec.riesz(3, 1.0), shape, 400, 400, **options)
    interior = boundary_concentration_check(KernelSpec.riesz(3, 1.5), shape, 400, 400, **options)
    assert coulomb > 0.99
    # More than a tenth of the mass stays in the interior
    assert interior < 0.9


def test_boundary_concentration_without_interior():
    spec = KernelSpec.riesz(3, 1.0)
    assert boundary_concentration_check(spec, Ball.unit(3), 100, 0) == pytest.approx(1.0)


def test_bounded_density_check(sphere_solution):
    """Surface density of the unit sphere stays under E (d-2) / delta."""
    _, sol = sphere_solution
    check = bounded_density_check(KernelSpec.riesz(3, 1.0), sol, delta=1.0)
    assert check.holds
    assert 0.9 / (4.0 * np.pi) < check.max_density < 1.5 / (4.0 * np.pi)
    assert check.bound == pytest.approx(sol.energy)


def test_bounded_density_check_log():
    spec = KernelSpec.logarithmic()
    sol = solve_equilibrium(spec, ball_boundary_nodes(2, 0.5, 100))
    check = bounded_density_check(spec, sol, delta=0.5)
    assert check.holds
    assert math.isinf(bounded_density_check(spec, sol, delta=1.0).bound)


def test_bounded_density_check_contract(sphere_solution):
    _, sol = sphere_solution
    with pytest.raises(ContractError, match="alpha = d - 2"):
        bounded_density_check(KernelSpec.riesz(3, 0.5), sol, delta=1.0)
    with pytest.raises(ContractError, match="delta"):
        bounded_density_check(KernelSpec.riesz(3, 1.0), sol, delta=0.0)


def test_equilibrium_independent_of_start():
    """Two random starting points reach the same minimizer."""
    spec = KernelSpec.riesz(3, 1.0)
    nodes = ball_boundary_nodes(3, 1.0, 200)
    matrix = assemble_kernel_matrix(spec, nodes)
    first = solve_equilibrium(spec, nodes, tol=1e-9, seed=1, matrix=matrix)
    second = solve_equilibrium(spec, nodes, tol=1e-9, seed=2, matrix=matrix)
    assert first.energy == pytest.approx(second.energy, rel=1e-8)
    assert np.max(np.abs(first.weights - second.weights)) < 1e-2 * np.max(first.weights)


def test_capacity_monotone_under_inclusion():
    """B(0.5) inside B(1) inside the side-2 cube inside B(2)."""
    spec = KernelSpec.riesz(3, 1.0)
    options = {'tol': 1e-5, 'max_iter': 20000}
    capacities = [capacity(solve_equilibrium(spec, ball_boundary_nodes(3, r, 400), **options))
                  for r in (0.5, 1.0)]
    cube = solve_or_partial(spec, surface_quadrature(Cube(2.0), 600), **options)
    capacities.append(capacity(cube))
    capacities.append(capacity(solve_equilibrium(spec, ball_boundary_nodes(3, 2.0, 400), **options)))
    assert all(a < b for a, b in zip(capacities, capacities[1:]))
    assert capacities[0] == pytest.approx(0.5, rel=0.02)
    assert capacities[-1] == pytest.approx(2.0, rel=0.02)
