"""Tests for the charged-drop functionals."""

import math
import numpy as np
import pytest
from app.exceptions import ContractError
from app.geometry import Ball
from app.kernel import KernelSpec, sphere_riesz_energy
from app.lattice import unit_ball_volume
from app.functional import (
    FunctionalReport,
    normalized_charge,
    rescaled_charge,
    rescale_functional,
    ball_functional,
    functional_nodes,
    evaluate_F,
    evaluate_G,
    connected_lower_bound,
    splitting_threshold_charge,
    splitting_delta_condition,
    ball_energy,
)


def test_normalized_charge_scale_invariant():
    """The normalized charge at the unit ball volume is the rescaled charge divided back."""
    omega = unit_ball_volume(3)
    assert rescaled_charge(2.0, omega, 3, 1.0) == pytest.approx(2.0)
    assert normalized_charge(2.0, 8.0 * omega, 3, 1.0) == pytest.approx(
        2.0 / (8.0 * omega) ** (3.0 / 6.0)
    )
    with pytest.raises(ContractError):
        normalized_charge(1.0, 0.0, 3, 1.0)


def test_ball_functional():
    """F of the unit ball with alpha = 1 is 4 pi + Q^2."""
    omega = unit_ball_volume(3)
    assert ball_functional(3, 1.0, omega, 1.0) == pytest.approx(4.0 * np.pi + 1.0)
    assert ball_functional(3, 1.0, 8.0 * omega, 2.0) == pytest.approx(16.0 * np.pi + 2.0)
    with pytest.raises(ContractError, match="Charge"):
        ball_functional(3, 1.0, omega, -1.0)


def test_rescale_functional():
    """Riesz energies scale by lambda^-alpha, logarithmic ones shift by -log lambda."""
    report = FunctionalReport(perimeter=4.0 * np.pi, riesz_energy=1.0, charge=2.0,
                              total=4.0 * np.pi + 4.0, deficit=0.0, normalized_charge=2.0)
    assert rescale_functional(report, 2.0, 3, KernelSpec.riesz(3, 1.0)) == pytest.approx(16.0 * np.pi + 2.0)

    circle = FunctionalReport(perimeter=2.0 * np.pi, riesz_energy=0.0, charge=1.0,
                              total=2.0 * np.pi, deficit=0.0, normalized_charge=1.0)
    assert rescale_functional(circle, math.e, 2, KernelSpec.logarithmic()) == pytest.approx(2.0 * np.pi * math.e - 1.0)
    with pytest.raises(ContractError):
        rescale_functional(report, 0.0, 3, KernelSpec.riesz(3, 1.0))


def test_report_round_trip_ignores_unknown_keys():
    report = FunctionalReport(1.0, 2.0, 3.0, 19.0, 0.5, 3.0, iterations=7, nodes=12)
    data = report.to_dict() | {'unrelated': 1}
    assert FunctionalReport.from_dict(data) == report


def test_functional_nodes():
    """Interior nodes are added only above the Coulomb exponent."""
    shape = Ball.unit(3)
    surface_only = functional_nodes(shape, KernelSpec.riesz(3, 1.0), 200)
    assert len(surface_only) == 200 and set(np.unique(surface_only.patch_dims)) == {2}
    mixed = functional_nodes(shape, KernelSpec.riesz(3, 1.5), 400)
    assert set(np.unique(mixed.patch_dims)) == {2, 3}
    assert np.sum(mixed.patch_dims == 2) == 100


def test_evaluate_F_ball():
    """F of the unit ball matches the closed form."""
    report = evaluate_F(Ball.unit(3), KernelSpec.riesz(3, 1.0), 1.0, 400, tol=1e-5)
    assert report.perimeter == pytest.approx(4.0 * np.pi)
    assert report.riesz_energy == pytest.approx(1.0, rel=0.02)
    assert report.total == pytest.approx(report.perimeter + report.riesz_energy)
    assert report.deficit == pytest.approx(0.0, abs=1e-12)
    assert report.nodes == 400


def test_evaluate_F_disk_log():
    report = evaluate_F(Ball((0.0, 0.0), 2.0), KernelSpec.logarithmic(), 1.0, 200)
    assert report.total == pytest.approx(4.0 * np.pi - math.log(2.0), abs=1.0 / 200)


def test_evaluate_G_sphere():
    """G puts the charge on the boundary; below d-2 it equals F."""
    report = evaluate_G(Ball.unit(3), KernelSpec.riesz(3, 0.5), 1.0, 400, tol=1e-5)
    assert report.riesz_energy == pytest.approx(sphere_riesz_energy(3, 0.5), rel=0.02)


def test_G_at_least_F():
    """The boundary node set of G is contained in the node set of F."""
    spec = KernelSpec.riesz(3, 1.5)
    options = {'tol': 1e-6, 'max_iter': 20000}
    f_report = evaluate_F(Ball.unit(3), spec, 1.0, 400, **options)
    g_report = evaluate_G(Ball.unit(3), spec, 1.0, 400, **options)
    assert f_report.riesz_energy <= g_report.riesz_energy * (1.0 + 1e-5)


def test_evaluate_G_contract():
    with pytest.raises(ContractError, match="G is infinite"):
        evaluate_G(Ball.unit(3), KernelSpec.riesz(3, 2.5), 1.0, 100)
    with pytest.raises(ContractError, match="Charge"):
        evaluate_F(Ball.unit(3), KernelSpec.riesz(3, 1.0), -1.0, 100)


def test_connected_lower_bound():
    omega = unit_ball_volume(3)
    constant = math.sqrt(3.0) * 32.0
    expected = 4.0 * np.pi + constant ** -0.5 * 100.0 ** 2 * 0.1
    assert connected_lower_bound(0.1, omega, 100.0, 3, 0.5) == pytest.approx(expected)
    with pytest.raises(ContractError):
        connected_lower_bound(0.0, omega, 1.0, 3, 0.5)


def test_splitting_threshold_charge():
    """alpha = 0.5, delta = 0.1 in d = 3 gives a threshold near 136.8."""
    assert splitting_threshold_charge(3, 0.5, 0.1) == pytest.approx(136.8, rel=1e-3)


def test_splitting_delta_condition():
    assert splitting_delta_condition(3, 0.5, 0.1)
    assert not splitting_delta_condition(3, 0.5, 0.9)


def test_ball_energy():
    assert ball_energy(KernelSpec.riesz(3, 1.0), 2.0) == pytest.approx(0.5)
    assert ball_energy(KernelSpec.logarithmic(), 2.0) == pytest.approx(-math.log(2.0))
    with pytest.raises(ContractError):
        ball_energy(KernelSpec.riesz(3, 1.0), 0.0)
