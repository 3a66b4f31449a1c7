"""
Structural operations on polynomials and rational functions: conjugation,
substitution, homogeneity grading and evaluation.
"""

from typing import Mapping, Union

import numpy as np
from sympy.polys.rings import PolyElement

from app.core.config import settings
from app.core.errors import DenominatorVanishesError, PoleEvaluationError
from app.services.algebra.rational import RationalFn, as_rational
from app.services.algebra.universe import CONJUGATE_FAMILY, Universe

Expr = Union[PolyElement, RationalFn]

INHOMOGENEOUS = "inhomogeneous"

GROUPS = ("zeta", "zetabar", "z", "zbar", "w", "t", "combined_zeta", "combined_z", "wz")


# ------------------------------------------------------------------ arith


def poly_arith(
    a: Expr,
    b: Expr,
    op: str,
) -> Expr:
    """Exact add / sub / mul of two polynomials or two rational functions."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unsupported operation {op!r}; construct RationalFn explicitly to divide")


# ------------------------------------------------------------ conjugation


def conjugate(
    e: Expr,
    universe: Universe | None = None,
) -> Expr:
    """Formal involution: v ↔ v̄, coefficients conjugated, pi2i ↦ -pi2i."""
    if isinstance(e, RationalFn):
        u = e.universe
        num = u.conjugate_poly(e.num)
        factors = [(u.conjugate_poly(u.atom(a)), k) for a, k in e.den]
        return RationalFn.quotient(u, num, factors)
    if universe is None:
        raise ValueError("conjugating a bare polynomial needs its universe")
    return universe.conjugate_poly(e)


# ------------------------------------------------------------ substitution


def _substitute_poly(
    universe: Universe,
    poly: PolyElement,
    bindings: Mapping[int, RationalFn],
) -> RationalFn:
    bound = [v for v in bindings if any(m[v] for m in poly.keys())]
    if not bound:
        return RationalFn.from_poly(universe, poly)

    max_deg = {v: max(m[v] for m in poly.keys()) for v in bound}
    num_pows: dict[int, list[PolyElement]] = {}
    den_pows: dict[int, list[PolyElement]] = {}
    den: dict[int, int] = {}
    for v in bound:
        b = bindings[v]
        d_poly = b.den_poly()
        num_pows[v] = [universe.ring.one]
        den_pows[v] = [universe.ring.one]
        for _ in range(max_deg[v]):
            num_pows[v].append(num_pows[v][-1] * b.num)
            den_pows[v].append(den_pows[v][-1] * d_poly)
        for atom_id, e in b.den:
            den[atom_id] = den.get(atom_id, 0) + e * max_deg[v]

    ring = universe.ring
    out = ring.zero
    for monom, coeff in poly.items():
        rest = list(monom)
        term = ring.one
        for v in bound:
            k = monom[v]
            rest[v] = 0
            term = term * num_pows[v][k] * den_pows[v][max_deg[v] - k]
        out = out + term * ring.term_new(tuple(rest), coeff)
    return RationalFn(universe, out, tuple(sorted((a, e) for a, e in den.items() if e)))


def substitute(
    e: Expr,
    bindings: Mapping[int, object],
    universe: Universe | None = None,
) -> RationalFn:
    """
    Compose ``e`` with rational bindings ``variable index -> RationalFn``.

    Raises:
        DenominatorVanishesError: the composed denominator is the zero polynomial
    """
    if isinstance(e, RationalFn):
        universe = e.universe
    elif universe is None:
        raise ValueError("substituting into a bare polynomial needs its universe")
    e = as_rational(universe, e)

    for v, b in bindings.items():
        rb = as_rational(universe, b)
        if rb.depends_on(v):
            raise ValueError(f"binding for {universe.names[v]} refers to itself")
    rbindings = {v: as_rational(universe, b) for v, b in bindings.items()}

    result = _substitute_poly(universe, e.num, rbindings)
    for atom_id, k in e.den:
        composed = _substitute_poly(universe, universe.atom(atom_id), rbindings)
        if composed.is_zero():
            raise DenominatorVanishesError(f"atom {universe.atom(atom_id).as_expr()}")
        result = result * (composed.reciprocal() ** k)
    return result


def restrict_diagonal(
    e: Expr,
    universe: Universe | None = None,
) -> RationalFn:
    """Restrict to z = ζ, z̄ = ζ̄."""
    if isinstance(e, RationalFn):
        universe = e.universe
    bindings = {}
    for j in range(universe.size):
        bindings[universe.index("z", j)] = universe.gen("zeta", j)
        bindings[universe.index("zbar", j)] = universe.gen("zetabar", j)
    return substitute(e, bindings, universe)


# ------------------------------------------------------------ homogeneity


def _family_degrees(
    universe: Universe,
    monom: tuple[int, ...],
    family: str,
) -> int:
    s = universe.family_slices[family]
    return sum(monom[s.start : s.stop])


def _poly_grading(
    universe: Universe,
    poly: PolyElement,
    families: tuple[str, ...],
) -> tuple[int, ...] | None:
    grades = None
    for monom in poly.keys():
        g = tuple(_family_degrees(universe, monom, f) for f in families)
        if grades is None:
            grades = g
        elif grades != g:
            return None
    return grades if grades is not None else tuple(0 for _ in families)


def multi_degree(
    e: Expr,
    families: tuple[str, ...],
    universe: Universe | None = None,
) -> tuple[int, ...] | None:
    """
    Net degree vector of ``e`` in the given families (numerator minus
    denominator), or None when some part is not homogeneous.
    """
    if isinstance(e, RationalFn):
        universe = e.universe
    e = as_rational(universe, e)
    if e.is_zero():
        return None
    total = _poly_grading(universe, e.num, families)
    if total is None:
        return None
    total = list(total)
    for atom_id, k in e.den:
        g = _poly_grading(universe, universe.atom(atom_id), families)
        if g is None:
            return None
        for i, gi in enumerate(g):
            total[i] -= k * gi
    return tuple(total)


def homogeneity(
    e: Expr,
    group: str,
    universe: Universe | None = None,
) -> Union[int, str]:
    """
    Scaling weight for one variable group.

    Single families scale alone. ``combined_zeta`` applies λ to ζ and λ̄ to ζ̄
    (likewise ``combined_z``); the weight exists only when the λ̄ exponent
    nets to zero. ``wz`` scales w and z jointly (Hefer components).
    """
    if group not in GROUPS:
        raise ValueError(f"unknown group {group!r}")
    if group.startswith("combined_"):
        holo = group.split("_", 1)[1]
        degrees = multi_degree(e, (holo, CONJUGATE_FAMILY[holo]), universe)
        if degrees is None or degrees[1] != 0:
            return INHOMOGENEOUS
        return degrees[0]
    if group == "wz":
        return _joint_degree(e, ("w", "z"), universe)
    degrees = multi_degree(e, (group,), universe)
    return INHOMOGENEOUS if degrees is None else degrees[0]


def _joint_degree(
    e: Expr,
    families: tuple[str, ...],
    universe: Universe | None,
) -> Union[int, str]:
    if isinstance(e, RationalFn):
        universe = e.universe
    e = as_rational(universe, e)

    def grade(poly: PolyElement) -> int | None:
        values = {sum(_family_degrees(universe, m, f) for f in families) for m in poly.keys()}
        return values.pop() if len(values) == 1 else None

    total = grade(e.num)
    if total is None:
        return INHOMOGENEOUS
    for atom_id, k in e.den:
        g = grade(universe.atom(atom_id))
        if g is None:
            return INHOMOGENEOUS
        total -= k * g
    return total


# ------------------------------------------------------------- evaluation


def evaluate(
    e: Expr,
    point: np.ndarray,
    universe: Universe | None = None,
    pole_floor: float = settings.EVAL_POLE_FLOOR,
) -> complex:
    """
    Evaluate at a full numeric assignment (see ``Universe.values``).

    Raises:
        PoleEvaluationError: |denominator| below the relative floor
    """
    from app.services.algebra.numeric import compile_rational

    if isinstance(e, RationalFn):
        universe = e.universe
    compiled = compile_rational(as_rational(universe, e))
    return complex(compiled(point, pole_floor=pole_floor, check_poles=True))


def evaluate_exact(
    e: Expr,
    assignment: Mapping[int, object],
    universe: Universe | None = None,
) -> RationalFn:
    """
    Exact evaluation at Gaussian-rational coordinates.

    Unassigned variables (in particular ``pi2i``) stay symbolic.

    Raises:
        PoleEvaluationError: the denominator vanishes at the point
    """
    if isinstance(e, RationalFn):
        universe = e.universe
    try:
        return substitute(e, assignment, universe)
    except DenominatorVanishesError as exc:
        raise PoleEvaluationError(str(exc)) from exc


# ------------------------------------------------------------ relabeling


def relabel(
    poly: PolyElement,
    universe: Universe,
    index_map: Mapping[int, int],
) -> PolyElement:
    """
    Rename variables monomial by monomial (``old index -> new index``).

    Targets must not collide with variables already present in ``poly``.
    """
    out: dict[tuple[int, ...], object] = {}
    for monom, coeff in poly.items():
        new = [0] * universe.ngens
        for i, e in enumerate(monom):
            if e:
                new[index_map.get(i, i)] += e
        key = tuple(new)
        out[key] = out[key] + coeff if key in out else coeff
    return universe.ring.from_dict({k: v for k, v in out.items() if v})


def move_family(
    poly: PolyElement,
    universe: Universe,
    source: str,
    target: str,
) -> PolyElement:
    """Rewrite a polynomial in one family (and its conjugate) as the same polynomial in another."""
    index_map = {}
    for j in range(universe.size):
        index_map[universe.index(source, j)] = universe.index(target, j)
        index_map[universe.index(CONJUGATE_FAMILY[source], j)] = universe.index(CONJUGATE_FAMILY[target], j)
    return relabel(poly, universe, index_map)


def family_support(
    poly: PolyElement,
    universe: Universe,
) -> set[str]:
    """Variable families occurring in ``poly``."""
    used = set()
    for monom in poly.keys():
        for i, e in enumerate(monom):
            if e:
                used.add(universe.family_of[i])
    return used
