"""
Weights on P^N: b and B, the α and β families, the γ forms and the
weight certificates.

Run with:
    pytest test_weights.py
"""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from app.services.algebra import get_universe, restrict_diagonal
from app.services.forms import FormExpr, contract, eta_field, euler_field, is_projective, nabla_eta
from app.services.scenarios import identity_checks
from app.services.weights import (
    GAMMA_VARIANTS,
    alpha_form,
    beta_potential_residual,
    build_alpha,
    build_b_B,
    build_beta,
    build_gamma,
    gamma_residual,
    verify_weight,
)


@pytest.mark.parametrize("n", [1, 2])
def test_b_contracts_to_one_and_is_projective(n):
    u = get_universe(n)
    b, B = build_b_B(n)
    assert contract(eta_field(u), b) == 1
    assert contract(euler_field(u, "dzeta"), b).is_zero()
    assert nabla_eta(B) == 1


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("power", [0, 1, 2])
def test_alpha_powers_are_weights(n, power):
    weight = build_alpha(n, power)
    assert weight.bundle == (-power, power)
    assert weight.certificate.passed, weight.certificate.failure
    assert nabla_eta(weight.form).is_zero()


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("power", [1, 2])
def test_beta_powers_are_weights(n, power):
    weight, tau = build_beta(n, power)
    assert weight.bundle == (power, -power)
    assert weight.certificate.passed, weight.certificate.failure
    assert tau.degree() == 2


def test_alpha_scalar_part_is_one_on_the_diagonal():
    alpha = alpha_form(2)
    assert restrict_diagonal(alpha.coefficient(())) == 1
    assert is_projective(alpha, (-1, 1))


def test_product_of_weights_is_a_weight():
    product = build_alpha(1, 1).wedge(build_beta(1, 1)[0])
    assert product.bundle == (0, 0)
    assert product.certificate.passed


def test_negative_powers_are_rejected():
    with pytest.raises(ValueError):
        build_alpha(1, -1)
    with pytest.raises(ValueError):
        build_beta(1, -2)


def test_certificate_reports_failing_identity():
    u = get_universe(1)
    broken = alpha_form(1) + FormExpr.scalar(u, u.gen("zetabar", 0) * u.gen("z", 1))
    certificate = verify_weight(broken)
    assert not certificate.passed
    assert certificate.checks["nabla_eta_zero"] is False
    assert certificate.witness


def test_certificate_requires_diagonal_normalization():
    doubled = alpha_form(1).scale(2)
    certificate = verify_weight(doubled, (-1, 1))
    assert not certificate.passed
    assert certificate.checks["diagonal_normalized"] is False


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("variant", GAMMA_VARIANTS)
def test_gamma_satisfies_its_nabla_identity(n, variant):
    for j in range(n + 1):
        assert gamma_residual(n, variant, j).is_zero()


def test_gamma_rejects_bad_arguments():
    with pytest.raises(ValueError):
        build_gamma(1, "delta", 0)
    with pytest.raises(IndexError):
        build_gamma(1, "alpha", 2)


@pytest.mark.parametrize("n", [1, 2])
def test_beta_potential_identity(n):
    assert beta_potential_residual(n).is_zero()


@pytest.mark.parametrize("n", [1, 2])
def test_identity_checks_all_hold(n):
    checks = identity_checks(n)
    assert f"N{n}:B_nabla_eta" in checks
    failed = [name for name, holds in checks.items() if not holds]
    assert failed == []
