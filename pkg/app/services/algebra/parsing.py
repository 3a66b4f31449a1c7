"""
Polynomial parsing and canonical JSON serialization.

Input syntax: variables ``z0..zN`` (holomorphic), ``Z0..ZN`` (conjugates),
``w0..wN``, plus the explicit names ``zeta0``, ``zetabar0``, ``zbar0``,
``wbar0``, ``t0``, ``t1``, ``pi2i``; ``i`` is the imaginary unit; coefficients
``a/b`` or ``a/b*i``; operators ``+ - * ^``. The ``slot`` option decides
whether ``z``/``Z`` mean ζ/ζ̄ (curve equations) or z/z̄.
"""

import re
from typing import Any

from sympy import I, Symbol
from sympy.parsing.sympy_parser import (
    convert_xor,
    parse_expr,
    standard_transformations,
)
from sympy.polys.rings import PolyElement

from app.core.errors import ParseError
from app.core.logger import get_logger
from app.services.algebra.rational import RationalFn
from app.services.algebra.universe import Universe

logger = get_logger(__name__)

_NAME = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_TRANSFORMS = standard_transformations + (convert_xor,)


def _local_names(
    universe: Universe,
    slot: str,
) -> dict[str, Any]:
    if slot not in ("zeta", "z"):
        raise ValueError(f"slot must be 'zeta' or 'z', got {slot!r}")
    holo, anti = ("zeta", "zetabar") if slot == "zeta" else ("z", "zbar")
    names: dict[str, Any] = {"i": I, "I": I}
    for name in universe.names:
        names[name] = Symbol(name)
    for j in range(universe.size):
        names[f"z{j}"] = Symbol(f"{holo}{j}")
        names[f"Z{j}"] = Symbol(f"{anti}{j}")
    return names


def parse_poly(
    text: str,
    universe: Universe,
    slot: str = "zeta",
) -> PolyElement:
    """
    Parse a polynomial string into the universe ring.

    Raises:
        ParseError: unknown variable, non-polynomial input or syntax error
    """
    local = _local_names(universe, slot)
    for token in _NAME.findall(text):
        if token not in local:
            raise ParseError(f"unknown variable {token!r}")
    try:
        expr = parse_expr(text, local_dict=local, transformations=_TRANSFORMS, evaluate=True)
        poly = universe.ring.from_expr(expr)
    except ParseError:
        raise
    except Exception as e:
        raise ParseError(f"{text!r}: {e}") from e
    logger.debug(f"Parsed polynomial | text={text} | terms={len(poly)}")
    return poly


def _coeff_json(c) -> list[str]:
    return [str(c.x), str(c.y)]


def poly_to_terms(
    poly: PolyElement,
    universe: Universe,
) -> list[dict[str, Any]]:
    terms = []
    for monom, coeff in poly.terms():
        terms.append(
            {
                "monomial": {universe.names[i]: e for i, e in enumerate(monom) if e},
                "coeff": _coeff_json(coeff),
            }
        )
    return terms


def terms_to_poly(
    terms: list[dict[str, Any]],
    universe: Universe,
) -> PolyElement:
    from sympy import Rational

    out = {}
    for term in terms:
        monom = [0] * universe.ngens
        for name, e in term["monomial"].items():
            monom[universe.index_of_name(name)] = int(e)
        re_part, im_part = term["coeff"]
        out[tuple(monom)] = universe.domain.from_sympy(Rational(re_part) + I * Rational(im_part))
    return universe.ring.from_dict(out)


def to_json(
    expr: RationalFn,
) -> dict[str, Any]:
    """Canonical term-list serialization (ring order, sorted denominators)."""
    universe = expr.universe
    return {
        "numerator": poly_to_terms(expr.num, universe),
        "denominator": [
            {"factor": poly_to_terms(universe.atom(a), universe), "power": e} for a, e in expr.den
        ],
    }


def from_json(
    data: dict[str, Any],
    universe: Universe,
) -> RationalFn:
    num = terms_to_poly(data["numerator"], universe)
    factors = [(terms_to_poly(d["factor"], universe), int(d["power"])) for d in data["denominator"]]
    return RationalFn.quotient(universe, num, factors)
