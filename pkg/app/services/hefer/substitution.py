"""
The τ* substitution: w ↦ αζ, dw_j ↦ γ^α_j.
"""

from sympy.polys.rings import PolyElement

from app.core.logger import get_logger
from app.services.algebra.operations import relabel
from app.services.algebra.rational import RationalFn
from app.services.algebra.universe import Universe
from app.services.forms import FormExpr, nabla_eta
from app.services.hefer.scalar import HeferScalar
from app.services.weights import build_alpha, build_gamma

logger = get_logger(__name__)


def _w_to_zeta(
    universe: Universe,
) -> dict[int, int]:
    return {universe.index("w", j): universe.index("zeta", j) for j in range(universe.size)}


def tau_star_poly(
    poly: PolyElement,
    universe: Universe,
) -> FormExpr:
    """
    τ* of a polynomial in (w, z): Σ_r α^r ∧ P_r(ζ, z), where P_r collects the
    terms of w-degree r with w renamed to ζ.
    """
    w_slice = universe.family_slices["w"]
    by_degree: dict[int, dict] = {}
    for monom, coeff in poly.items():
        r = sum(monom[w_slice.start : w_slice.stop])
        by_degree.setdefault(r, {})[monom] = coeff

    n = universe.n
    out = FormExpr.zero(universe)
    mapping = _w_to_zeta(universe)
    for r, terms in sorted(by_degree.items()):
        part = relabel(universe.ring.from_dict(terms), universe, mapping)
        out = out + build_alpha(n, r).form.scale(part)
    return out


def tau_star_components(
    hefer: HeferScalar,
) -> list[FormExpr]:
    """τ* of each h_j (even forms, 1/2πi included)."""
    u = hefer.universe
    inv_pi2i = RationalFn.quotient(u, u.ring.one, [u.gen("pi2i")])
    return [tau_star_poly(p, u).scale(inv_pi2i) for p in hefer.numerators]


def tau_star(
    hefer: HeferScalar,
) -> FormExpr:
    """
    τ*h = Σ_j h_j(αζ, z) ∧ γ^α_j, projective with bundle (0, d).

    Args:
        hefer: Scalar Hefer form

    Returns:
        Projective form in the ζ slot
    """
    u = hefer.universe
    n = u.n
    out = FormExpr.zero(u)
    for j, part in enumerate(tau_star_components(hefer)):
        if part.is_zero():
            continue
        out = out + part.wedge(build_gamma(n, "alpha", j), max_dzeta=n)
    out = out.with_bundle((0, hefer.degree))
    logger.debug(f"tau* assembled | degree={hefer.degree} | terms={len(out.terms)}")
    return out


def tau_star_residual(
    hefer: HeferScalar,
) -> FormExpr:
    """
    ∇_η τ*h − τ*(δ_{z−w}h).

    ∇_η γ^α_j = 2πi(z_j − αζ_j), so ∇_η τ*h = −τ*(2πi Σ h_j (w_j − z_j)); for a
    Hefer form of f this is f(z) − α^d f(ζ).
    """
    u = hefer.universe
    expected = -tau_star_poly(hefer.contracted(), u)
    return nabla_eta(tau_star(hefer)) - expected
