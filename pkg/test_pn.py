"""
Koppelman operators on P^N: sign calibration, the α branch, the β branch
and its obstruction pairing.

Run with:
    pytest test_pn.py
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from app.core.config import settings
from app.core.errors import TwistRangeError, UnsupportedRankError
from app.models.scenario import GridSpec
from app.services.algebra import get_universe
from app.services.operators import (
    dbar_section,
    default_weight,
    dual_monomials,
    holomorphic_top_forms,
    pn_convergence,
    pn_dual_form,
    pn_obstruction,
    pn_sign,
    pn_solve,
    polynomial_section,
    smooth_section,
)
from app.utils.numerics import convergence_slope

P1 = get_universe(1)


@pytest.fixture(scope="module")
def sign(tmp_path_factory):
    ledger = tmp_path_factory.mktemp("ledger") / "conventions.json"
    return pn_sign(n=1, ledger=ledger, persist=False)


def test_default_weight_follows_the_twist():
    assert default_weight(1, 0) == "alpha"
    assert default_weight(1, -1) == "alpha"
    assert default_weight(1, -2) == "beta"
    assert default_weight(2, -3) == "beta"


def test_projection_reproduces_holomorphic_sections(sign):
    phi = polynomial_section(P1, "z0^2 - 3*z0*z1", 2)
    solution = pn_solve(1, 2, 0, phi, sign=sign)
    expected = np.array([complex(phi.value(t)) for t in solution.targets])
    np.testing.assert_allclose(solution.values, expected, atol=1e-6)


def test_alpha_branch_solves_manufactured_data(sign):
    psi = smooth_section(P1, 0)
    solution = pn_solve(1, 0, 1, dbar_section(psi), grid=GridSpec.square(128), psi=psi, sign=sign, wirtinger=False)
    assert solution.weight == "alpha"
    assert solution.manufactured_residual <= 1e-6
    assert solution.projection_vanishes is True
    assert solution.warnings == []


def test_alpha_branch_dbar_residual(sign):
    psi = smooth_section(P1, 1)
    solution = pn_solve(1, 1, 1, dbar_section(psi), psi=psi, sign=sign)
    assert solution.wirtinger_residual <= 1e-2


def test_beta_branch_solves_zero_moment_data(sign):
    psi = smooth_section(P1, -2)
    phi = dbar_section(psi)
    assert np.max(np.abs(pn_obstruction(1, -2, phi))) <= 1e-5
    solution = pn_solve(1, -2, 1, phi, grid=GridSpec.square(128), psi=psi, weight="beta", sign=sign, wirtinger=False)
    assert solution.weight == "beta"
    assert solution.manufactured_residual <= 1e-5


def test_unit_moment_is_detected():
    moments = pn_obstruction(1, -2, pn_dual_form(1, -2))
    assert moments.shape == (1,)
    assert abs(moments[0]) >= 0.1


def test_unit_moment_data_does_not_converge(sign):
    study = pn_convergence(1, -2, pn_dual_form(1, -2), (32, 64, 128), weight="beta", sign=sign)
    assert study["wirtinger"][-1] >= 1e-2
    assert convergence_slope(study["grids"], study["wirtinger"]) <= settings.NO_CONVERGENCE_SLOPE
    assert any(w.startswith("no convergence") for w in study["warnings"])


def test_dual_forms_and_monomials():
    assert dual_monomials(1, -2) == [(0, 0)]
    assert dual_monomials(1, -3) == [(1, 0), (0, 1)]
    assert dual_monomials(1, -1) == []
    assert len(holomorphic_top_forms(2, -4)) == 3
    with pytest.raises(ValueError):
        pn_dual_form(1, -1)


def test_obstruction_needs_negative_twist():
    with pytest.raises(TwistRangeError):
        pn_obstruction(1, -1, dbar_section(smooth_section(P1, -1)))


def test_solver_rejects_unsupported_input():
    phi = dbar_section(smooth_section(P1, 0))
    with pytest.raises(UnsupportedRankError):
        pn_solve(1, 0, 2, phi)
    with pytest.raises(ValueError):
        pn_solve(1, 1, 1, phi)
    with pytest.raises(TwistRangeError):
        pn_solve(1, 0, 1, phi, weight="beta")
