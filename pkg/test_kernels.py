"""
Kernel assembly: the Fermat closed form, ℂ*-scaling, the exact structure and
reduction identities, the cusp leading term and the ambient P^N kernels.

Run with:
    pytest test_kernels.py
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from app.core.errors import CurveNotSmoothError, TwistBelowThresholdError, TwistRangeError, UnsupportedRankError
from app.services.algebra import get_universe, parse_poly
from app.services.curves import fermat_curve, sample_points
from app.services.hefer import koszul_data_new
from app.services.kernels import (
    assemble_plane_kernel,
    assemble_pn_kernel,
    assemble_pN_curve_kernel,
    assemble_projection_kernel,
    cusp_curve,
    cusp_kernel,
    cusp_leading_defect,
    cusp_leading_reference,
    fermat_closed_form,
    kernel_residual_on_curve,
    on_curve_pairs,
    plane_relation_residual,
    principal_remainder_split,
    reduction_identity_residual,
    structure_form,
    twist_kappa,
    weighted_kernel_form,
)
from app.services.scenarios import fermat_regression

SCALING = (0.7 + 0.4j, -1.3 + 0.2j)


@pytest.fixture(scope="module")
def fermat():
    return fermat_curve()


def test_fermat_kernel_matches_its_closed_form():
    regression = fermat_regression(s=1, count=100, seed=0)
    assert regression["closed_form"] <= 1e-12
    assert regression["scaling"] <= 1e-12


def test_fermat_closed_form_at_higher_twist(fermat):
    kernel = assemble_plane_kernel(fermat, 2)
    assert kernel.kappa == 1
    zeta, z = on_curve_pairs(fermat, 40, seed=4)
    expected = fermat_closed_form(zeta, z, s=2)
    np.testing.assert_allclose(kernel(zeta, z), expected, rtol=1e-12)


@pytest.mark.parametrize("s", [1, 2, 3])
def test_plane_kernel_is_scaling_invariant(fermat, s):
    kernel = assemble_plane_kernel(fermat, s)
    assert kernel.zeta_weight == -(s + 2)
    assert kernel.z_weight == s
    zeta, z = on_curve_pairs(fermat, 50, seed=s)
    assert kernel.scaling_defect(zeta, z, *SCALING) <= 1e-12


def test_twist_below_threshold(fermat):
    assert twist_kappa(fermat, 1) == 0
    with pytest.raises(TwistBelowThresholdError, match="s ≥ κ₀ − N"):
        twist_kappa(fermat, 0)
    with pytest.raises(TwistBelowThresholdError):
        assemble_plane_kernel(fermat, 0)


def test_structure_form_relations(fermat):
    assert plane_relation_residual(fermat).is_zero()
    assert plane_relation_residual(cusp_curve()).is_zero()
    assert structure_form(fermat).normalization_residual().is_zero()


@pytest.mark.parametrize("s", [1, 2])
def test_reduction_identity_is_exact(fermat, s):
    kernel = assemble_plane_kernel(fermat, s)
    assert reduction_identity_residual(kernel.hefer, kernel.kappa).is_zero()


def test_weighted_form_pulls_back_to_the_kernel(fermat):
    kernel = assemble_plane_kernel(fermat, 1)
    samples = sample_points(fermat, 0, 0.5 * np.exp(2j * np.pi * (np.arange(8) + 0.5) / 8))
    _, z = on_curve_pairs(fermat, 1, seed=7)
    form = weighted_kernel_form(fermat, 1, kernel.hefer)
    assert kernel_residual_on_curve(kernel, samples, z[0], form) <= 1e-8


def test_principal_and_remainder_add_up(fermat):
    kernel = assemble_plane_kernel(fermat, 1)
    principal, remainder = principal_remainder_split(fermat, 1)
    zeta, z = on_curve_pairs(fermat, 20, seed=2)
    np.testing.assert_allclose(principal(zeta, z) + remainder(zeta, z), kernel(zeta, z), rtol=1e-10)

    with pytest.raises(CurveNotSmoothError):
        principal_remainder_split(cusp_curve(), 1)


def test_moment_split_reproduces_the_kernel(fermat):
    kernel = assemble_plane_kernel(fermat, 1)
    zeta, z = on_curve_pairs(fermat, 10, seed=5)
    table = kernel.moment_values(zeta)
    np.testing.assert_allclose(kernel.from_moments(table, zeta, z), kernel(zeta, z), rtol=1e-9)


def test_cusp_kernel_approaches_its_leading_term():
    kernel = cusp_kernel(1)
    assert kernel.kappa == 0
    defects = cusp_leading_defect(kernel, t=0.5)
    separations = sorted(defects, reverse=True)
    assert separations == [1e-1, 1e-2, 1e-3]
    series = [defects[r]["defect"] for r in separations]
    assert all(b < a for a, b in zip(series, series[1:]))
    smallest = defects[1e-3]
    assert smallest["defect"] <= 0.1 * smallest["reference"]


def test_projection_kernel_has_twist_degree_moments(fermat):
    projection = assemble_projection_kernel(fermat, 1)
    assert projection.kappa == 0
    assert projection.moments
    assert {sum(mu) for mu in projection.moments} == {1}

    with pytest.raises(TwistBelowThresholdError):
        assemble_projection_kernel(fermat, 0)


def test_curve_kernel_in_projective_space_is_scaling_invariant(fermat):
    u = get_universe(2)
    data = koszul_data_new([fermat.f], u)
    kernel = assemble_pN_curve_kernel(data, 1)
    assert kernel.kappa == 0
    zeta, z = on_curve_pairs(fermat, 30, seed=9)
    assert kernel.scaling_defect(zeta, z, *SCALING) <= 1e-12


def test_curve_kernel_needs_a_curve():
    u = get_universe(3)
    data = koszul_data_new([parse_poly("z0^2 + z1^2 + z2^2 + z3^2", u)], u)
    with pytest.raises(UnsupportedRankError):
        assemble_pN_curve_kernel(data, 1)


@pytest.mark.parametrize(
    "n, ell, weight, power",
    [(1, 0, "alpha", 1), (1, -1, "alpha", 0), (1, -1, "beta", 0), (1, -2, "beta", 1), (2, 0, "alpha", 2)],
)
def test_ambient_kernel_powers(n, ell, weight, power):
    kernel = assemble_pn_kernel(n, ell, weight)
    assert kernel.power == power
    assert not kernel.kernel_form.is_zero()
    assert kernel.to_dict()["N"] == n


@pytest.mark.parametrize("n, ell, weight", [(1, -2, "alpha"), (1, 0, "beta"), (2, -1, "beta")])
def test_ambient_kernel_twist_range(n, ell, weight):
    with pytest.raises(TwistRangeError):
        assemble_pn_kernel(n, ell, weight)


def test_ambient_kernel_rejects_unknown_weight():
    with pytest.raises(ValueError):
        assemble_pn_kernel(1, 0, "gamma")


def test_cusp_leading_reference_closed_form():
    value = cusp_leading_reference(np.array([2.0]), np.array([1.0]))
    np.testing.assert_allclose(value, [0.75 / (2j * np.pi)], rtol=1e-14)
