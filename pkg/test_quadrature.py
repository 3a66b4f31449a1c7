"""
Quadrature rules, windows and finite-difference helpers, plus the curve and
P^N rule sets built from them.

Run with:
    pytest test_quadrature.py
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from app.core.errors import NearDiscriminantError, TargetNearDiscriminantError, UnsupportedRankError
from app.models.scenario import GridSpec
from app.services.curves import fermat_curve
from app.services.operators import CurveQuadrature, ProjectiveQuadrature, target_on_sheet
from app.utils.numerics import (
    ball_rule,
    bump,
    convergence_slope,
    dyadic_polar_rules,
    gauss_legendre,
    polar_rule,
    wirtinger_d,
    wirtinger_dbar,
)


def test_gauss_legendre_on_an_interval():
    x, w = gauss_legendre(6, 0.0, 2.0)
    assert np.all((x > 0) & (x < 2))
    assert np.dot(w, x**2) == pytest.approx(8.0 / 3.0, rel=1e-13)


def test_polar_rule_areas():
    assert polar_rule(16, 16).weights.sum() == pytest.approx(np.pi, rel=1e-13)
    annulus = polar_rule(8, 8, 0.5, 1.0, center=1.0 + 1.0j)
    assert annulus.weights.sum() == pytest.approx(0.75 * np.pi, rel=1e-13)
    assert np.allclose(np.abs(annulus.nodes - (1.0 + 1.0j)), annulus.radii[:, None])


def test_dyadic_annuli_tile_the_disk():
    rules = dyadic_polar_rules(0j, 0.0, 1.0, 3, 8, 8)
    assert len(rules) == 4
    assert sum(rule.weights.sum() for rule in rules) == pytest.approx(np.pi, rel=1e-13)
    assert rules[0].radii.min() >= 0.5


def test_ball_rule_volume():
    rule = ball_rule(6, 16, 0.0, 0.5)
    assert rule.nodes.shape == (rule.size, 2)
    assert rule.weights.sum() == pytest.approx(np.pi**2 * 0.5**4 / 2.0, rel=1e-12)


def test_bump_window():
    distance = np.array([0.0, 0.1, 0.3, 0.5, 0.9, 1.0, 2.0])
    window = bump(distance, support=1.0, plateau=0.3)
    np.testing.assert_allclose(window[:3], 1.0)
    np.testing.assert_allclose(window[-2:], 0.0)
    assert 0.0 < window[4] < window[3] < 1.0


def test_wirtinger_derivatives():
    t = np.array([0.3 + 0.2j, -0.5 + 0.1j])
    np.testing.assert_allclose(wirtinger_dbar(lambda x: np.conj(x) ** 2, t, 1e-3), 2 * np.conj(t), atol=1e-8)
    np.testing.assert_allclose(wirtinger_dbar(lambda x: x**3, t, 1e-3), 0.0, atol=1e-8)
    np.testing.assert_allclose(wirtinger_d(lambda x: x**3, t, 1e-3), 3 * t**2, atol=1e-8)


def test_convergence_slope():
    grids = [16, 32, 64]
    assert convergence_slope(grids, [1.0 / n for n in grids]) == pytest.approx(1.0)
    assert convergence_slope(grids, [1.0 / n**2 for n in grids]) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        convergence_slope([16], [0.1])


def test_curve_area_covers_both_chart_disks():
    fermat = fermat_curve()
    quadrature = CurveQuadrature(fermat)
    radius = fermat.chart_radius(0)
    expected = np.pi * (radius**2 + radius**-2)
    assert quadrature.area().value.real == pytest.approx(expected, rel=1e-2)
    assert len(quadrature.branch_patches) == 3


def test_curve_area_with_a_target_patch():
    fermat = fermat_curve()
    quadrature = CurveQuadrature(fermat)
    target = target_on_sheet(fermat, 0.1 + 0.05j)
    with_target = quadrature.integrate(lambda block: np.ones((block.samples.nodes, 1)), target)
    assert with_target.value.real == pytest.approx(quadrature.area().value.real, rel=1e-2)


def test_exclusion_radius_must_fit_in_the_branch_window():
    quadrature = CurveQuadrature(fermat_curve(), GridSpec(exclusion_radius=0.2))
    with pytest.raises(NearDiscriminantError):
        _ = quadrature.branch_radii


def test_target_inside_a_branch_window_is_rejected():
    fermat = fermat_curve()
    quadrature = CurveQuadrature(fermat, GridSpec.square(16))
    with pytest.raises(TargetNearDiscriminantError):
        quadrature.target_radius(target_on_sheet(fermat, -0.9 + 0.0j))


@pytest.mark.parametrize("n, expected, rel", [(1, np.pi, 1e-10), (2, np.pi**2 / 2.0, 1e-6)])
def test_projective_volume(n, expected, rel):
    assert ProjectiveQuadrature(n).volume().real == pytest.approx(expected, rel=rel)


def test_projective_volume_with_a_target_patch():
    quadrature = ProjectiveQuadrature(1)
    z = np.array([1.0, 0.3 + 0.2j])
    volume = quadrature.integrate(lambda block: np.sum(np.abs(block.zeta) ** 2, axis=-1) ** -2, z)
    assert volume.real == pytest.approx(np.pi, rel=1e-3)


def test_projective_quadrature_dimensions():
    with pytest.raises(UnsupportedRankError):
        ProjectiveQuadrature(3)
