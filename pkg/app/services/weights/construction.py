"""
Builders for b, B, α^ρ, τ, β^m and the two γ families.

Everything here is exact; constructors are cached per (N, power) and the
returned forms are immutable.
"""

from functools import lru_cache

from sympy.polys.rings import PolyElement

from app.core.logger import get_logger
from app.services.algebra.rational import RationalFn
from app.services.algebra.universe import Universe, get_universe
from app.services.forms import (
    FormExpr,
    contract,
    dbar,
    euler_field,
    nabla_eta,
)
from app.services.weights.certificates import Weight, verify_weight

logger = get_logger(__name__)

GAMMA_VARIANTS = ("alpha", "beta")


def norm_sq(
    universe: Universe,
    family: str,
) -> PolyElement:
    """|v|² = Σ v_j v̄_j for v = ζ or z."""
    conj = {"zeta": "zetabar", "z": "zbar"}[family]
    return sum(
        (universe.gen(family, j) * universe.gen(conj, j) for j in range(universe.size)),
        universe.ring.zero,
    )


def pairing(
    universe: Universe,
    left: str,
    right: str,
) -> PolyElement:
    """Σ_j left_j right_j (e.g. z̄·ζ)."""
    return sum(
        (universe.gen(left, j) * universe.gen(right, j) for j in range(universe.size)),
        universe.ring.zero,
    )


# --------------------------------------------------------------------- b, B


@lru_cache(maxsize=None)
def build_b_B(
    n: int,
) -> tuple[FormExpr, FormExpr]:
    """
    The section b with δ_η b = 1 and B = Σ_{k=1}^{N} b∧(∂̄b)^{k−1}.

    b = (1/2πi)(|ζ|² z̄·dζ − (z̄·ζ) ζ̄·dζ)/(|ζ|²|z|² − |ζ̄·z|²)
    """
    u = get_universe(n)
    pi2i = u.gen("pi2i")
    zeta2 = norm_sq(u, "zeta")
    z2 = norm_sq(u, "z")
    zbar_zeta = pairing(u, "zbar", "zeta")
    zetabar_z = pairing(u, "zetabar", "z")
    den = zeta2 * z2 - zetabar_z * zbar_zeta

    coeffs = [
        RationalFn.quotient(
            u,
            zeta2 * u.gen("zbar", j) - zbar_zeta * u.gen("zetabar", j),
            [pi2i, den],
        )
        for j in range(u.size)
    ]
    b = FormExpr.one_form(u, "dzeta", coeffs, bundle=(0, 0))

    dbar_b = dbar(b, "both")
    B = b
    power = FormExpr.scalar(u, 1, (0, 0))
    for _ in range(2, n + 1):
        power = power.wedge(dbar_b)
        B = B + b.wedge(power)
    B = B.with_bundle((0, 0))
    logger.debug(f"Built b and B | N={n} | B_terms={len(B.terms)}")
    return b, B


# ------------------------------------------------------------------------ α


@lru_cache(maxsize=None)
def alpha_form(
    n: int,
) -> FormExpr:
    """α = z·ζ̄/|ζ|² − ∂̄(ζ̄·dζ/2πi|ζ|²)."""
    u = get_universe(n)
    zeta2 = norm_sq(u, "zeta")
    alpha00 = RationalFn.quotient(u, pairing(u, "z", "zetabar"), [zeta2])
    potential = FormExpr.one_form(
        u,
        "dzeta",
        [RationalFn.quotient(u, u.gen("zetabar", j), [u.gen("pi2i"), zeta2]) for j in range(u.size)],
    )
    return (FormExpr.scalar(u, alpha00) - dbar(potential, "zeta")).with_bundle((-1, 1))


@lru_cache(maxsize=None)
def build_alpha(
    n: int,
    power: int,
) -> Weight:
    """α^ρ, a weight for O(ρ); (1,1)-powers truncate past dζ-degree N."""
    if power < 0:
        raise ValueError(f"power must be nonnegative, got {power}")
    if power > 1:
        half = build_alpha(n, power // 2).form
        form = half.wedge(half, max_dzeta=n)
        if power % 2:
            form = form.wedge(alpha_form(n), max_dzeta=n)
    else:
        form = alpha_form(n).power(power, max_dzeta=n)
    bundle = (-power, power)
    form = form.with_bundle(bundle)
    certificate = verify_weight(form, bundle)
    logger.debug(f"Built alpha power | N={n} | rho={power} | terms={len(form.terms)} | passed={certificate.passed}")
    return Weight(form, bundle, certificate)


# ------------------------------------------------------------------- τ and β


@lru_cache(maxsize=None)
def build_tau(
    n: int,
) -> FormExpr:
    """τ = dz̄·dζ / 2πi|z|²."""
    u = get_universe(n)
    scale = RationalFn.quotient(u, u.ring.one, [u.gen("pi2i"), norm_sq(u, "z")])
    tau = FormExpr.zero(u)
    for j in range(u.size):
        tau = tau + FormExpr.generator(u, "dzbar", j).wedge(FormExpr.generator(u, "dzeta", j))
    return tau.scale(scale)


@lru_cache(maxsize=None)
def beta_potential(
    n: int,
) -> FormExpr:
    """G = δ_z̄τ ∧ Σ_{k=0}^{N} τ^k, the finite form of δ_z̄τ/(1−τ); never truncated."""
    u = get_universe(n)
    tau = build_tau(n)
    sigma = contract(euler_field(u, "dzbar"), tau)
    series = FormExpr.zero(u)
    power = FormExpr.scalar(u, 1)
    for _ in range(n + 1):
        series = series + power
        power = power.wedge(tau)
    return sigma.wedge(series)


@lru_cache(maxsize=None)
def beta_form(
    n: int,
) -> FormExpr:
    """β = 2πi δ_ζ G, holomorphic in ζ."""
    u = get_universe(n)
    g = beta_potential(n)
    return contract(euler_field(u, "dzeta"), g).scale(u.gen("pi2i")).with_bundle((1, -1))


@lru_cache(maxsize=None)
def build_beta(
    n: int,
    power: int,
) -> tuple[Weight, FormExpr]:
    """β^m, a weight for O(−m), together with τ."""
    if power < 0:
        raise ValueError(f"power must be nonnegative, got {power}")
    form = beta_form(n).power(power, max_dzeta=n)
    bundle = (power, -power)
    form = form.with_bundle(bundle)
    certificate = verify_weight(form, bundle)
    logger.debug(f"Built beta power | N={n} | m={power} | terms={len(form.terms)} | passed={certificate.passed}")
    return Weight(form, bundle, certificate), build_tau(n)


# ------------------------------------------------------------------------- γ


@lru_cache(maxsize=None)
def build_gamma(
    n: int,
    variant: str,
    j: int,
) -> FormExpr:
    """
    γ_j of the given variant.

    alpha: γ_j = dζ_j − (ζ̄·dζ/|ζ|²)ζ_j, bundle (0, 1).
    beta:  γ_j = δ_ζ[G∧dζ_j], bundle (1, 0).
    """
    if variant not in GAMMA_VARIANTS:
        raise ValueError(f"variant must be one of {GAMMA_VARIANTS}, got {variant!r}")
    u = get_universe(n)
    if not 0 <= j <= n:
        raise IndexError(f"gamma index {j} outside 0..{n}")

    if variant == "alpha":
        zeta2 = norm_sq(u, "zeta")
        projection = FormExpr.one_form(
            u,
            "dzeta",
            [RationalFn.quotient(u, u.gen("zetabar", k) * u.gen("zeta", j), [zeta2]) for k in range(u.size)],
        )
        return (FormExpr.generator(u, "dzeta", j) - projection).with_bundle((0, 1))

    g = beta_potential(n)
    return contract(euler_field(u, "dzeta"), g.wedge(FormExpr.generator(u, "dzeta", j))).with_bundle((1, 0))


def gamma_residual(
    n: int,
    variant: str,
    j: int,
) -> FormExpr:
    """
    ∇_η γ_j minus its closed form.

    alpha: ∇_η γ_j − 2πi(z_j − αζ_j); beta: ∇_η γ_j − (βz_j − ζ_j).
    """
    u = get_universe(n)
    gamma = build_gamma(n, variant, j)
    if variant == "alpha":
        expected = (FormExpr.scalar(u, u.gen("z", j)) - alpha_form(n).scale(u.gen("zeta", j))).scale(u.gen("pi2i"))
    else:
        expected = beta_form(n).scale(u.gen("z", j)) - FormExpr.scalar(u, u.gen("zeta", j))
    return nabla_eta(gamma) - expected


def beta_potential_residual(
    n: int,
) -> FormExpr:
    """∇_η of the (unbounded) β-potential minus 1."""
    return nabla_eta(beta_potential(n)) - 1
