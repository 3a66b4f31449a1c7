"""
Exterior algebra: wedge signs, contractions, ∂̄, Ω, ϑ and the
projectivity test.

Run with:
    pytest test_forms.py
"""

import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings as hypothesis_settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from app.core.errors import NotOmegaDivisibleError
from app.services.algebra import RationalFn, get_universe, parse_poly
from app.services.forms import (
    FormExpr,
    VectorFieldExpr,
    contract,
    dbar,
    eta_field,
    euler_field,
    eval_form,
    extract,
    gen_id,
    is_projective,
    nabla_eta,
    omega,
    theta,
    top_form,
)

U = get_universe(1)
coefficient = st.integers(min_value=-3, max_value=3)


def poly(text: str) -> RationalFn:
    return RationalFn.from_poly(U, parse_poly(text, U))


def one_form(family: str, a: int, b: int) -> FormExpr:
    return FormExpr.one_form(U, family, [poly(f"{a}*z0*Z1 + 1"), poly(f"{b}*z1^2 + Z0")])


def test_wedge_is_anticommutative_on_generators():
    d0 = FormExpr.generator(U, "dzeta", 0)
    d1 = FormExpr.generator(U, "dzeta", 1)
    assert d0.wedge(d1) == -d1.wedge(d0)
    assert d0.wedge(d0).is_zero()
    assert d0.wedge(d1).degree() == 2


def test_equal_forms_hash_equal():
    d0 = FormExpr.generator(U, "dzeta", 0)
    d1 = FormExpr.generator(U, "dzeta", 1)
    doubled = d0.scale(RationalFn.quotient(U, parse_poly("2*z1", U), [parse_poly("z1", U)]))
    assert doubled == d0 + d0
    assert hash(doubled) == hash(d0 + d0)
    assert len({d0.wedge(d1), -d1.wedge(d0), d0}) == 2
    assert hash(FormExpr.scalar(U, poly("z0")) - FormExpr.scalar(U, poly("z0"))) == hash(0)


@given(a=coefficient, b=coefficient, c=coefficient, d=coefficient)
@hypothesis_settings(max_examples=25, deadline=None)
def test_one_forms_anticommute(a, b, c, d):
    x = one_form("dzeta", a, b)
    y = one_form("dzetabar", c, d)
    assert x.wedge(y) == -y.wedge(x)
    assert x.wedge(x).is_zero()


@given(a=coefficient, b=coefficient, c=coefficient, d=coefficient)
@hypothesis_settings(max_examples=25, deadline=None)
def test_contraction_is_an_antiderivation(a, b, c, d):
    v = eta_field(U)
    x = one_form("dzeta", a, b)
    y = one_form("dzeta", c, d) + one_form("dzetabar", a, d)
    left = contract(v, x.wedge(y))
    right = contract(v, x).wedge(y) - x.wedge(contract(v, y))
    assert left == right
    assert contract(v, contract(v, x.wedge(y))).is_zero()


def test_contraction_pairs_with_matching_family_only():
    v = euler_field(U, "dzeta")
    assert contract(v, FormExpr.generator(U, "dzeta", 1)) == poly("z1")
    assert contract(v, FormExpr.generator(U, "dzetabar", 1)).is_zero()


def test_vector_field_needs_every_component():
    with pytest.raises(ValueError):
        VectorFieldExpr.from_coeffs(U, "dzeta", [1])


def test_dbar_differentiates_antiholomorphic_variables():
    f = FormExpr.scalar(U, poly("z0*Z0^2 + Z1"))
    expected = FormExpr.one_form(U, "dzetabar", [poly("2*z0*Z0"), poly("1")])
    assert dbar(f, "zeta") == expected
    assert dbar(FormExpr.scalar(U, poly("z0*z1"))).is_zero()


def test_dbar_squares_to_zero():
    zbar = RationalFn.from_poly(U, U.gen("zbar", 0) * U.gen("zetabar", 1) ** 2)
    f = FormExpr.scalar(U, poly("Z0*z1") + zbar)
    assert dbar(dbar(f)).is_zero()


def test_dbar_rejects_unknown_family():
    with pytest.raises(ValueError):
        dbar(FormExpr.scalar(U, 1), "w")


def test_omega_on_the_projective_line():
    expected = FormExpr.one_form(U, "dzeta", [poly("-z1"), poly("z0")])
    assert omega(U) == expected
    assert top_form(U).wedge(FormExpr.generator(U, "dzeta", 0)).is_zero()


def test_theta_divides_by_omega():
    assert theta(omega(U)) == 1
    a = omega(U).wedge(FormExpr.generator(U, "dzetabar", 0, poly("Z1")))
    quotient = theta(a)
    assert quotient.wedge(omega(U)) == a
    assert quotient.degree() == 1


def test_theta_rejects_non_multiples_of_omega():
    with pytest.raises(NotOmegaDivisibleError, match="Ω-divisible"):
        theta(FormExpr.generator(U, "dzeta", 0))


def test_projectivity_certificate():
    ratio = RationalFn.quotient(U, U.gen("z", 0), [U.gen("zeta", 0)])
    f = FormExpr.scalar(U, ratio)
    assert is_projective(f, (-1, 1))
    mismatch = is_projective(f, (0, 1))
    assert not mismatch
    assert "weight mismatch" in mismatch.failure

    not_projective = is_projective(FormExpr.generator(U, "dzeta", 0))
    assert not not_projective
    assert not_projective.checks["delta_zeta"] is False


def test_nabla_eta_of_a_scalar_is_its_dbar():
    f = FormExpr.scalar(U, poly("z0*Z1"))
    assert nabla_eta(f) == -dbar(f)


def test_numeric_evaluation_of_omega():
    values = eval_form(omega(U), zeta=np.array([1.0, 2.0]))
    assert complex(values[(gen_id(U, "dzeta", 0),)]) == pytest.approx(-2.0)
    assert complex(values[(gen_id(U, "dzeta", 1),)]) == pytest.approx(1.0)


def test_extract_keeps_the_requested_bidegree():
    d0 = FormExpr.generator(U, "dzeta", 0)
    e1 = FormExpr.generator(U, "dzetabar", 1)
    mixed = d0 + e1 + d0.wedge(e1)
    assert extract(mixed, 1, 0) == d0
    assert extract(mixed, 0, 1) == e1
    assert extract(mixed, 1, 1) == d0.wedge(e1)
    assert extract(mixed, 1).degrees() == {(1, 0, 0, 0), (1, 1, 0, 0)}
    assert extract(mixed, 2).is_zero()
