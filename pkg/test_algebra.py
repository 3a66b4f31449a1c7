"""
Exact algebra: parsing, rational-function arithmetic, conjugation,
substitution, homogeneity and evaluation.

Run with:
    pytest test_algebra.py
"""

import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings as hypothesis_settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from app.core.errors import DenominatorVanishesError, ParseError, PoleEvaluationError
from app.services.algebra import (
    INHOMOGENEOUS,
    RationalFn,
    conjugate,
    evaluate,
    evaluate_exact,
    from_json,
    get_universe,
    homogeneity,
    multi_degree,
    parse_poly,
    poly_arith,
    restrict_diagonal,
    substitute,
    to_json,
)

U = get_universe(2)
small = st.integers(min_value=-4, max_value=4)


def rational(text: str, den: str | None = None) -> RationalFn:
    num = parse_poly(text, U)
    if den is None:
        return RationalFn.from_poly(U, num)
    return RationalFn.quotient(U, num, [parse_poly(den, U)])


def test_parse_maps_z_to_zeta_and_capital_to_conjugate():
    f = parse_poly("z0^3 + z1**3 - z2^3", U)
    zeta = [U.gen("zeta", j) for j in range(3)]
    assert f == zeta[0] ** 3 + zeta[1] ** 3 - zeta[2] ** 3

    g = parse_poly("z0*Z0", U)
    assert g == U.gen("zeta", 0) * U.gen("zetabar", 0)


def test_parse_in_z_slot():
    f = parse_poly("z0*z1", U, slot="z")
    assert f == U.gen("z", 0) * U.gen("z", 1)


@pytest.mark.parametrize("text", ["z0 + q", "z0 +", "z7^2", "sin(z0)"])
def test_parse_rejects_invalid_input(text):
    with pytest.raises(ParseError):
        parse_poly(text, U)


def test_zero_denominator_factor_is_rejected():
    with pytest.raises(DenominatorVanishesError, match="denominator vanishes identically"):
        RationalFn.quotient(U, U.ring.one, [U.ring.zero])


def test_reciprocal_of_zero_is_rejected():
    with pytest.raises(DenominatorVanishesError):
        RationalFn.zero(U) ** -1


def test_fraction_arithmetic_is_exact():
    a = rational("z0", "z0 + z1")
    b = rational("z1", "z0 + z1")
    assert a + b == 1
    assert (a - b) * rational("z0 + z1") == rational("z0 - z1")
    assert a * a ** -1 == 1


def test_denominators_combine_over_atoms():
    a = rational("1", "z0")
    b = rational("1", "z1")
    assert a + b == rational("z0 + z1", "z0*z1")


def test_cancel_removes_dividing_atoms():
    r = RationalFn.quotient(U, parse_poly("z0^2 - z1^2", U), [parse_poly("z0 - z1", U)])
    cancelled = r.cancel()
    assert cancelled.is_polynomial()
    assert cancelled == rational("z0 + z1")


def test_equal_functions_hash_equal():
    a = rational("z0*z1 - z1^2", "z1")
    b = rational("z0 - z1")
    assert a == b
    assert hash(a) == hash(b)
    assert len({a, b, rational("z0 + z1")}) == 2
    assert {b: "found"}[a] == "found"
    assert hash(rational("z0", "z0")) == hash(1)
    assert hash(a - b) == hash(0)


def test_derivative_quotient_rule():
    r = rational("z1", "z0")
    d = r.diff(U.index("zeta", 0))
    assert d == rational("-z1", "z0^2")
    assert r.diff(U.index("zetabar", 0)).is_zero()


@given(a=small, b=small, c=small)
@hypothesis_settings(max_examples=40, deadline=None)
def test_ring_axioms(a, b, c):
    x = rational(f"{a}*z0 + {b}*z1 + 1", "z0 + 2*z2")
    y = rational(f"{c}*z2 + Z0", "z1 - z2")
    w = rational(f"z0*z1 + {a}")
    assert x * (y + w) == x * y + x * w
    assert (x + y) + w == x + (y + w)
    assert x * y == y * x


@given(a=small, b=small)
@hypothesis_settings(max_examples=30, deadline=None)
def test_conjugation_is_an_involution(a, b):
    r = rational(f"{a}*z0*Z1 + {b}*z2^2 + 1", "z0*Z0 + z1*Z1 + 1")
    assert conjugate(conjugate(r)) == r


def test_conjugation_flips_pi2i_and_imaginary_unit():
    pi2i = RationalFn.from_poly(U, U.gen("pi2i"))
    assert conjugate(pi2i) == -pi2i
    ri = rational("I*z0")
    assert conjugate(ri) == rational("-I*Z0")


def test_substitution_composes_rationally():
    r = rational("z0^2 + z1")
    bound = substitute(r, {U.index("zeta", 0): rational("z1", "z2")})
    assert bound == rational("z1^2 + z1*z2^2", "z2^2")


def test_substitution_into_vanishing_denominator():
    r = rational("1", "z0 - z1")
    with pytest.raises(DenominatorVanishesError):
        substitute(r, {U.index("zeta", 0): rational("z1")})


def test_restrict_diagonal_identifies_slots():
    poly = U.gen("z", 0) * U.gen("zbar", 1) - U.gen("zeta", 0) * U.gen("zetabar", 1)
    r = RationalFn.from_poly(U, poly)
    assert restrict_diagonal(r).is_zero()


def test_homogeneity_weights():
    r = rational("z0^3", "z0*Z0 + z1*Z1")
    assert homogeneity(r, "zeta") == 2
    assert homogeneity(r, "zetabar") == -1
    assert homogeneity(r, "combined_zeta") == INHOMOGENEOUS
    assert homogeneity(rational("z0^2 + z1*z2"), "zeta") == 2
    assert homogeneity(rational("z0^2 + z1"), "zeta") == INHOMOGENEOUS
    assert multi_degree(r, ("zeta", "zetabar")) == (2, -1)


def test_unknown_group_is_rejected():
    with pytest.raises(ValueError):
        homogeneity(rational("z0"), "theta")


def test_numeric_evaluation_and_pole():
    r = rational("z0 + z1", "z0 - z2")
    point = U.values(zeta=np.array([2.0, 1.0j, 1.0]))
    assert evaluate(r, point) == pytest.approx((2 + 1j) / 1.0)

    with pytest.raises(PoleEvaluationError, match="evaluation at pole"):
        evaluate(r, U.values(zeta=np.array([1.0, 0.0, 1.0])))


def test_exact_evaluation_keeps_pi2i_symbolic():
    r = RationalFn.from_poly(U, U.gen("pi2i") * U.gen("zeta", 0))
    value = evaluate_exact(r, {U.index("zeta", 0): 3})
    assert value == RationalFn.from_poly(U, U.constant(3) * U.gen("pi2i"))

    with pytest.raises(PoleEvaluationError):
        evaluate_exact(rational("1", "z0"), {U.index("zeta", 0): 0})


def test_json_serialization_preserves_value():
    r = rational("(1 + 2*I)*z0*Z1 - z2/3", "z0*Z0 + 1")
    assert from_json(to_json(r), U) == r


def test_poly_arith_dispatches_on_the_operation():
    a, b = rational("z0", "z1"), rational("z2", "z1")
    assert poly_arith(a, b, "add") == rational("z0 + z2", "z1")
    assert poly_arith(a, b, "sub") == rational("z0 - z2", "z1")
    assert poly_arith(a, b, "mul") * rational("z1^2") == rational("z0*z2")
    with pytest.raises(ValueError):
        poly_arith(a, b, "div")
