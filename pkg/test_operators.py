"""
The ∂̄-solution operator and the projection on the Fermat cubic: sign
calibration, the Koppelman identity, Wirtinger residuals and extension.

The calibration runs the 16/32/64 refinement once per twist; expect these
tests to take minutes.

Run with:
    pytest test_operators.py
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from app.core.config import settings
from app.core.errors import CurveNotSmoothError
from app.models.scenario import GridSpec
from app.services.algebra import get_universe
from app.services.curves import fermat_curve
from app.services.kernels import cusp_curve
from app.services.operators import (
    CurveOperators,
    ExtensionResult,
    curve_convergence,
    curve_targets,
    dbar_section,
    extend_section,
    extension_difference,
    koppelman_selftest,
    manufactured_section,
    monomial_exponents,
    numeric_section,
    polynomial_section,
    quad_integrate,
    solve_dbar_curve,
)
from app.utils.numerics import convergence_slope

U = get_universe(2)


@pytest.fixture(scope="module")
def fermat():
    return fermat_curve()


@pytest.fixture(scope="module", params=[1, 2], ids=["s1", "s2"])
def twist(request):
    return request.param


@pytest.fixture(scope="module")
def psi(twist):
    return manufactured_section(U, twist)


@pytest.fixture(scope="module")
def calibration(fermat, twist, psi, tmp_path_factory):
    ledger = tmp_path_factory.mktemp("ledger") / "conventions.json"
    return koppelman_selftest(fermat, twist, psi, grids=(16, 32, 64), ledger=ledger, persist=False)


def test_koppelman_identity_converges(calibration):
    assert calibration.residual <= 1e-3
    assert calibration.order >= settings.CONVERGENCE_MIN_SLOPE
    assert calibration.losing_residual > 10 * calibration.residual
    assert calibration.projection_residual <= 1e-3


def test_solution_satisfies_dbar_with_converging_residual(fermat, twist, psi, calibration):
    study = curve_convergence(
        fermat,
        twist,
        psi,
        (16, 32, 64),
        kernel_sign=calibration.kernel_sign,
        projection_sign=calibration.projection_sign,
    )
    assert study["koppelman"][-1] <= 1e-3
    assert study["wirtinger"][-1] <= settings.WIRTINGER_TOLERANCE
    assert convergence_slope(study["grids"], study["wirtinger"]) >= settings.CONVERGENCE_MIN_SLOPE
    assert study["orders"]["wirtinger"] >= settings.CONVERGENCE_MIN_SLOPE
    assert study["solutions"][-1].to_dict()["kernel_sign"] == calibration.kernel_sign


def test_zero_data_gives_zero(fermat):
    zero = numeric_section(U, 1, 1, lambda samples: np.zeros(samples.zeta.shape[:2], dtype=complex))
    solution = solve_dbar_curve(fermat, 1, zero, grid=GridSpec.square(16), kernel_sign=1, wirtinger=False)
    np.testing.assert_allclose(solution.values, 0.0)


def test_kernel_operator_is_linear(fermat):
    ops = CurveOperators(fermat, 1, GridSpec.square(16))
    phi = dbar_section(manufactured_section(U, 1))
    target = curve_targets(fermat)[0]
    single = ops.apply_kernel(phi, target).value
    doubled = ops.apply_kernel(phi.scale(2), target).value
    assert doubled == pytest.approx(2 * single, rel=1e-12)
    assert quad_integrate(ops.kernel, phi, GridSpec.square(16), target) == pytest.approx(single, rel=1e-12)


def test_operators_check_their_input(fermat):
    ops = CurveOperators(fermat, 1, GridSpec.square(16))
    with pytest.raises(ValueError):
        ops.check_section(manufactured_section(U, 1), 1)
    with pytest.raises(ValueError):
        ops.check_section(dbar_section(manufactured_section(U, 2)), 1)
    with pytest.raises(CurveNotSmoothError):
        CurveOperators(cusp_curve(), 1)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("z0", [1.0, 0.0, 0.0]),
        ("z0 + 2*z1", [1.0, 2.0, 0.0]),
    ],
)
def test_extension_of_a_linear_section(fermat, text, expected):
    phi = polynomial_section(U, text, 1)
    result = extend_section(fermat, 1, phi)
    assert result.basis == [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    assert result.agreement <= settings.EXTENSION_TOLERANCE
    assert result.fit_residual <= 1e-6
    np.testing.assert_allclose(result.coefficients, expected, atol=1e-5)
    np.testing.assert_allclose(result.moment_coefficients, expected, atol=1e-5)
    assert result.holomorphy <= 1e-2
    assert extension_difference(fermat, result, result) == 0.0


def extension(coefficients: np.ndarray) -> ExtensionResult:
    return ExtensionResult(
        twist=3,
        basis=monomial_exponents(3, 3),
        coefficients=coefficients,
        moment_coefficients=coefficients,
        fit_residual=0.0,
        agreement=0.0,
        holomorphy=None,
        projection_sign=1,
        exclusion_error=0.0,
        grid=GridSpec(),
    )


def test_extensions_differing_by_the_curve_agree_on_it(fermat):
    basis = monomial_exponents(3, 3)
    cubic = np.array([1.0 if max(mu) == 3 else 0.0 for mu in basis], dtype=complex)
    rng = np.random.default_rng(0)
    base = rng.normal(size=len(basis)) + 0j
    assert extension_difference(fermat, extension(base), extension(base + 2.5 * cubic)) <= 1e-12
    off = np.zeros(len(basis), dtype=complex)
    off[basis.index((1, 1, 1))] = 1.0
    assert extension_difference(fermat, extension(base), extension(base + off)) > 0.1
