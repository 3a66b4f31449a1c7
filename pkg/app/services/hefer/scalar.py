"""
Hefer forms of single homogeneous polynomials.

A Hefer form for f of degree d is h = Σ h_ℓ dw_ℓ with h_ℓ homogeneous of
degree d−1 in (w, z) and 2πi Σ h_ℓ(w,z)(w_ℓ − z_ℓ) = f(w) − f(z). The
numerators 2πi·h_ℓ are stored as polynomials; the 1/2πi is applied when the
components are used as forms.
"""

from dataclasses import dataclass
from typing import Any

from sympy.polys.rings import PolyElement

from app.core.logger import get_logger
from app.services.algebra.operations import family_support, homogeneity, move_family, relabel
from app.services.algebra.parsing import poly_to_terms
from app.services.algebra.rational import RationalFn
from app.services.algebra.universe import Universe
from app.services.forms import FormExpr

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class HeferScalar:
    universe: Universe
    f: PolyElement
    degree: int
    numerators: tuple[PolyElement, ...]
    source: str = "telescoping"

    @property
    def components(
        self,
    ) -> tuple[RationalFn, ...]:
        """h_ℓ = numerator_ℓ / 2πi."""
        u = self.universe
        return tuple(RationalFn.quotient(u, p, [u.gen("pi2i")]) for p in self.numerators)

    def f_in(
        self,
        family: str,
    ) -> PolyElement:
        return self.f if family == "zeta" else move_family(self.f, self.universe, "zeta", family)

    def contracted(
        self,
    ) -> PolyElement:
        """2πi Σ h_ℓ (w_ℓ − z_ℓ), i.e. δ_{w−z} h."""
        u = self.universe
        total = u.ring.zero
        for j, p in enumerate(self.numerators):
            total += p * (u.gen("w", j) - u.gen("z", j))
        return total

    def residual(
        self,
    ) -> PolyElement:
        """f(w) − f(z) − 2πi Σ h_ℓ(w_ℓ − z_ℓ)."""
        return self.f_in("w") - self.f_in("z") - self.contracted()

    def is_valid(
        self,
    ) -> bool:
        return not self.residual()

    def negated(
        self,
        source: str | None = None,
    ) -> "HeferScalar":
        return HeferScalar(
            self.universe,
            self.f,
            self.degree,
            tuple(-p for p in self.numerators),
            source or f"{self.source}-negated",
        )

    def form(
        self,
    ) -> FormExpr:
        """h = Σ h_ℓ dw_ℓ."""
        return FormExpr.one_form(self.universe, "dw", self.components)

    def component_degrees(
        self,
    ) -> list[int | str]:
        return [homogeneity(p, "wz", self.universe) if p else self.degree - 1 for p in self.numerators]

    def to_dict(
        self,
    ) -> dict[str, Any]:
        return {
            "source": self.source,
            "degree": self.degree,
            "polynomial": poly_to_terms(self.f, self.universe),
            "components_times_2pi_i": [poly_to_terms(p, self.universe) for p in self.numerators],
            "components_text": [str(p.as_expr()) for p in self.numerators],
            "identity_holds": self.is_valid(),
        }


def _check_homogeneous(
    f: PolyElement,
    universe: Universe,
) -> tuple[PolyElement, int]:
    """Return f rewritten in the ζ family together with its degree."""
    if not f:
        raise ValueError("the zero polynomial has no Hefer form")
    support = family_support(f, universe)
    if len(support) > 1 or not support <= {"zeta", "z", "w"}:
        raise ValueError(f"Hefer decomposition needs a polynomial in one holomorphic family, got {sorted(support)}")
    family = support.pop() if support else "zeta"
    if family != "zeta":
        f = move_family(f, universe, family, "zeta")
    degree = homogeneity(f, "zeta", universe)
    if not isinstance(degree, int) or degree < 1:
        raise ValueError(f"polynomial must be homogeneous of degree >= 1, got {degree}")
    return f, degree


def _mixed(
    f: PolyElement,
    universe: Universe,
    split: int,
) -> PolyElement:
    """f(z_0..z_{split−1}, w_split..w_N)."""
    index_map = {}
    for j in range(universe.size):
        target = "z" if j < split else "w"
        index_map[universe.index("zeta", j)] = universe.index(target, j)
    return relabel(f, universe, index_map)


def hefer_decompose(
    f: PolyElement,
    universe: Universe,
) -> HeferScalar:
    """
    Telescoping Hefer form in ascending variable order.

    f(w) − f(z) = Σ_ℓ [f(z_{<ℓ}, w_{≥ℓ}) − f(z_{≤ℓ}, w_{>ℓ})]; each bracket is
    divided exactly by (w_ℓ − z_ℓ).

    Args:
        f: Homogeneous polynomial in ζ (or z, or w)
        universe: Variable universe of ``f``

    Returns:
        HeferScalar whose identity has been verified exactly
    """
    f, degree = _check_homogeneous(f, universe)
    numerators = []
    upper = _mixed(f, universe, 0)
    for ell in range(universe.size):
        lower = _mixed(f, universe, ell + 1)
        bracket = upper - lower
        quotient, remainder = bracket.div(universe.gen("w", ell) - universe.gen("z", ell))
        assert not remainder, "telescoping bracket not divisible by w_l - z_l"
        numerators.append(quotient)
        upper = lower

    hefer = HeferScalar(universe, f, degree, tuple(numerators))
    assert hefer.is_valid(), "telescoping Hefer identity failed"
    logger.debug(f"Hefer decomposition | degree={degree} | N={universe.n} | terms={sum(len(p) for p in numerators)}")
    return hefer


# ------------------------------------------------------------ known forms


def fermat_hefer(
    universe: Universe,
) -> HeferScalar:
    """f = Σ ζ_j³ with 2πi h_j = z_j² + z_j w_j + w_j²."""
    u = universe
    f = sum((u.gen("zeta", j) ** 3 for j in range(u.size)), u.ring.zero)
    numerators = tuple(
        u.gen("z", j) ** 2 + u.gen("z", j) * u.gen("w", j) + u.gen("w", j) ** 2 for j in range(u.size)
    )
    return HeferScalar(u, f, 3, numerators, "fermat")


def cusp_polynomial(
    universe: Universe,
) -> PolyElement:
    """ζ1³ − ζ2²ζ0."""
    u = universe
    return u.gen("zeta", 1) ** 3 - u.gen("zeta", 2) ** 2 * u.gen("zeta", 0)


def cusp_hefer_variants(
    universe: Universe,
) -> dict[str, HeferScalar]:
    """
    The displayed cusp form 2πi h̃ = z2² dw0 − (z1²+z1w1+w1²) dw1 + (z2+w2)w0 dw2
    and its negative, both attached to f = ζ1³ − ζ2²ζ0.
    """
    u = universe
    if u.n != 2:
        raise ValueError("the cusp cubic lives in P^2")
    z1, z2, w0, w1, w2 = u.gen("z", 1), u.gen("z", 2), u.gen("w", 0), u.gen("w", 1), u.gen("w", 2)
    displayed = HeferScalar(
        u,
        cusp_polynomial(u),
        3,
        (z2**2, -(z1**2 + z1 * w1 + w1**2), (z2 + w2) * w0),
        "cusp-displayed",
    )
    return {"displayed": displayed, "negated": displayed.negated("cusp-negated")}


def select_hefer_variant(
    variants: dict[str, HeferScalar],
) -> str:
    """Name of the first variant whose identity holds for its polynomial."""
    for name, hefer in variants.items():
        if hefer.is_valid():
            logger.info(f"Hefer variant selected | name={name} | source={hefer.source}")
            return name
    raise ValueError("no stored Hefer variant satisfies the identity")
