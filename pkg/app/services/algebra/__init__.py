from app.services.algebra.numeric import CompiledPoly, CompiledRational, compile_rational
from app.services.algebra.operations import (
    INHOMOGENEOUS,
    conjugate,
    evaluate,
    evaluate_exact,
    homogeneity,
    multi_degree,
    poly_arith,
    restrict_diagonal,
    substitute,
)
from app.services.algebra.parsing import from_json, parse_poly, to_json
from app.services.algebra.rational import RationalFn, as_rational
from app.services.algebra.universe import PI2I_VALUE, Universe, get_universe

__all__ = [
    "INHOMOGENEOUS",
    "PI2I_VALUE",
    "CompiledPoly",
    "CompiledRational",
    "RationalFn",
    "Universe",
    "as_rational",
    "compile_rational",
    "conjugate",
    "evaluate",
    "evaluate_exact",
    "from_json",
    "get_universe",
    "homogeneity",
    "multi_degree",
    "parse_poly",
    "poly_arith",
    "restrict_diagonal",
    "substitute",
    "to_json",
]
