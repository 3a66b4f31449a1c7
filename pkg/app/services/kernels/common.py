"""
Shared pieces of the kernel assemblies: the scalar α₀₀, Hefer components
at w = α₀₀ζ and the choice of Hefer form for a curve.
"""

from functools import lru_cache

import numpy as np

from app.services.algebra.operations import substitute
from app.services.algebra.rational import RationalFn
from app.services.algebra.universe import Universe
from app.services.curves import PlaneCurve
from app.services.forms import FormExpr
from app.services.hefer import (
    HeferScalar,
    cusp_hefer_variants,
    cusp_polynomial,
    fermat_hefer,
    hefer_decompose,
    select_hefer_variant,
)
from app.services.weights import build_gamma
from app.services.weights.construction import norm_sq, pairing


def alpha00(
    universe: Universe,
) -> RationalFn:
    """α₀₀ = z·ζ̄/|ζ|²."""
    return RationalFn.quotient(universe, pairing(universe, "z", "zetabar"), [norm_sq(universe, "zeta")])


def curve_hefer(
    curve: PlaneCurve,
) -> HeferScalar:
    """
    Hefer form used for a plane curve: the closed forms for the Fermat and
    cusp cubics (the valid cusp variant), telescoping otherwise.
    """
    u = curve.universe
    fermat = fermat_hefer(u)
    if curve.f == fermat.f:
        return fermat
    if curve.f == cusp_polynomial(u):
        variants = cusp_hefer_variants(u)
        return variants[select_hefer_variant(variants)]
    return hefer_decompose(curve.f, u)


@lru_cache(maxsize=64)
def hefer_at_alpha(
    hefer: HeferScalar,
) -> tuple[RationalFn, ...]:
    """2πi·h_j(α₀₀ζ, z) for every j."""
    u = hefer.universe
    a00 = alpha00(u)
    bindings = {u.index("w", k): a00 * u.gen("zeta", k) for k in range(u.size)}
    return tuple(substitute(p, bindings, u) for p in hefer.numerators)


def hefer_one_zero(
    hefer: HeferScalar,
) -> FormExpr:
    """The (1,0)-part Σ_j h_j(α₀₀ζ, z) γ^α_j of τ*h."""
    u = hefer.universe
    inv_pi2i = RationalFn.quotient(u, u.ring.one, [u.gen("pi2i")])
    out = FormExpr.zero(u)
    for j, value in enumerate(hefer_at_alpha(hefer)):
        if value.is_zero():
            continue
        out = out + build_gamma(u.n, "alpha", j).scale(value * inv_pi2i)
    return out.with_bundle((0, hefer.degree))


def split_z(
    value: RationalFn,
) -> dict[tuple[int, ...], RationalFn]:
    """
    value = Σ_μ z^μ c_μ with c_μ free of z; denominators must not involve z.

    Raises:
        ValueError: a denominator involves z or z̄, or z̄ appears
    """
    u = value.universe
    z_range = u.family_slices["z"]
    zbar_range = u.family_slices["zbar"]
    z_slice = slice(z_range.start, z_range.stop)
    zbar_slice = slice(zbar_range.start, zbar_range.stop)
    for atom_id, _ in value.den:
        if any(any(m[z_slice]) or any(m[zbar_slice]) for m in u.atom(atom_id).keys()):
            raise ValueError("z-expansion needs denominators free of z")
    parts: dict[tuple[int, ...], dict] = {}
    for monom, c in value.num.items():
        if any(monom[zbar_slice]):
            raise ValueError("z-expansion needs expressions holomorphic in z")
        mu = tuple(monom[z_slice])
        rest = list(monom)
        rest[z_slice] = [0] * len(mu)
        parts.setdefault(mu, {})[tuple(rest)] = c
    return {mu: RationalFn(u, u.ring.from_dict(terms), value.den) for mu, terms in sorted(parts.items())}


def z_monomials(
    moments,
    z: np.ndarray,
) -> dict[tuple[int, ...], np.ndarray]:
    """z^μ for every μ of ``moments`` at points z (..., N+1)."""
    z = np.asarray(z, dtype=complex)
    return {mu: np.prod(z ** np.asarray(mu), axis=-1) for mu in moments}
