"""
Sections of O(s) and (0,q)-forms with values in O(s), represented on the cone.
"""

from dataclasses import dataclass, replace
from functools import cached_property
from math import factorial
from typing import Any, Callable, Optional, Union

import numpy as np
from sympy import Rational
from sympy.polys.rings import PolyElement

from app.core.logger import get_logger
from app.services.algebra.parsing import parse_poly
from app.services.algebra.rational import RationalFn
from app.services.algebra.universe import Universe, get_universe
from app.services.curves import ChartSamples, pullback
from app.services.forms import CompiledForm, FormExpr, contract, dbar, euler_field, is_projective, omega
from app.services.weights.construction import norm_sq

logger = get_logger(__name__)

NumericSection = Callable[[ChartSamples], np.ndarray]


@dataclass(frozen=True, eq=False)
class SectionRep:
    """
    A (0,q)-form with values in O(s).

    ``form`` is the exact ambient representative (δ_ζ̄-free, combined weight s);
    ``numeric`` replaces it for data only known on samples and returns the
    pulled-back coefficient (scalar for q = 0, dt̄ for q = 1).
    """

    universe: Universe
    twist: int
    q: int
    form: Optional[FormExpr] = None
    numeric: Optional[NumericSection] = None
    holomorphic: bool = False
    closed: bool = False
    label: str = ""

    def __post_init__(self):
        if self.form is None and self.numeric is None:
            raise ValueError("a section needs a symbolic form or a numeric evaluator")
        if self.q not in range(self.universe.size):
            raise ValueError(f"form degree q={self.q} out of range")

    @property
    def symbolic(self) -> bool:
        return self.form is not None

    @cached_property
    def _compiled(
        self,
    ) -> CompiledForm:
        return CompiledForm(self.form)

    def on_samples(
        self,
        samples: ChartSamples,
    ) -> np.ndarray:
        """Scalar (q = 0) or dt̄ coefficient (q = 1) along X, shape (node, sheet)."""
        if self.numeric is not None:
            return self.numeric(samples)
        if self.q == 0:
            return pullback(samples, self.form)["scalar"]
        if self.q == 1:
            return pullback(samples, self.form)["dtbar"]
        raise ValueError(f"pullback of a (0,{self.q})-form to a curve vanishes")

    def at(
        self,
        zeta: np.ndarray,
    ) -> dict[tuple[int, ...], np.ndarray]:
        """Ambient coefficients at points ζ (..., N+1)."""
        if self.form is None:
            raise ValueError(f"section {self.label!r} has no ambient representative")
        return self._compiled(self.universe.values(zeta=zeta))

    def value(
        self,
        zeta: np.ndarray,
    ) -> np.ndarray:
        """Function value of a (0,0)-section at ζ."""
        if self.q != 0:
            raise ValueError("value() needs a function")
        coeffs = self.at(zeta)
        zeta = np.asarray(zeta, dtype=complex)
        return coeffs.get((), np.zeros(zeta.shape[:-1], dtype=complex))

    def scale(
        self,
        factor,
    ) -> "SectionRep":
        """factor·self; exact for rational or Gaussian-rational sympy factors, numeric otherwise."""
        label = f"{factor}*{self.label}"
        if self.form is not None and not isinstance(factor, (complex, float)):
            return replace(self, form=self.form.scale(factor), label=label)
        inner = self.on_samples
        return replace(self, form=None, numeric=lambda samples: factor * inner(samples), label=label)

    def to_dict(
        self,
    ) -> dict[str, Any]:
        return {
            "label": self.label,
            "twist": self.twist,
            "q": self.q,
            "holomorphic": self.holomorphic,
            "closed": self.closed,
            "symbolic": self.symbolic,
            "terms": None if self.form is None else len(self.form.terms),
        }


def section_rep_new(
    form: FormExpr,
    twist: int,
    q: int,
    holomorphic: bool = False,
    closed: bool = False,
    label: str = "",
) -> SectionRep:
    """
    Wrap an exact representative after checking projectivity.

    Raises:
        ValueError: the form is not δ_ζ̄-free of combined weight ``twist``
            or has components of the wrong degree
    """
    certificate = is_projective(form, (twist, 0))
    if not certificate:
        raise ValueError(f"section {label!r} is not projective of weight {twist}: {certificate.failure}")
    for key in form.terms:
        n_dzeta, n_dzetabar, n_dzbar, n_dw = form.key_degrees(key)
        if n_dzeta or n_dzbar or n_dw or n_dzetabar != q:
            raise ValueError(f"section {label!r} has a component outside bidegree (0,{q})")
    return SectionRep(
        universe=form.universe,
        twist=twist,
        q=q,
        form=form,
        holomorphic=holomorphic,
        closed=closed or holomorphic,
        label=label,
    )


def numeric_section(
    universe: Universe,
    twist: int,
    q: int,
    evaluator: NumericSection,
    label: str = "numeric",
) -> SectionRep:
    return SectionRep(universe=universe, twist=twist, q=q, numeric=evaluator, label=label)


def dbar_section(
    section: SectionRep,
) -> SectionRep:
    """∂̄ of an exact representative; the result is ∂̄-closed."""
    if section.form is None:
        raise ValueError("∂̄ needs an exact representative")
    form = dbar(section.form, "zeta").cancel()
    return section_rep_new(form, section.twist, section.q + 1, closed=True, label=f"dbar({section.label})")


def polynomial_section(
    universe: Universe,
    poly: Union[str, PolyElement],
    twist: Optional[int] = None,
) -> SectionRep:
    """Holomorphic section from a homogeneous polynomial (string or ring element)."""
    if isinstance(poly, str):
        text = poly
        poly = parse_poly(poly, universe)
    else:
        text = str(poly.as_expr())
    zeta = universe.family_slices["zeta"]
    degrees = {sum(m[zeta.start : zeta.stop]) for m in poly.keys()} or {twist or 0}
    if len(degrees) != 1:
        raise ValueError(f"{text!r} is not homogeneous")
    degree = degrees.pop()
    if twist is not None and twist != degree:
        raise ValueError(f"{text!r} has degree {degree}, expected {twist}")
    form = FormExpr.scalar(universe, RationalFn.from_poly(universe, poly))
    return section_rep_new(form, degree, 0, holomorphic=True, label=text)


def manufactured_section(
    universe: Universe,
    s: int,
) -> SectionRep:
    """ψ = ζ0^{s+1} ζ̄0 / |ζ|², smooth of weight s and not holomorphic."""
    u = universe
    value = RationalFn.quotient(u, u.gen("zeta", 0) ** (s + 1) * u.gen("zetabar", 0), [norm_sq(u, "zeta")])
    return section_rep_new(FormExpr.scalar(u, value), s, 0, label=f"zeta0^{s + 1}*conj(zeta0)/|zeta|^2")


def smooth_section(
    universe: Universe,
    ell: int,
) -> SectionRep:
    """A non-holomorphic smooth section of O(ℓ).

    ζ0^{ℓ+1}ζ̄0/|ζ|² for ℓ ≥ −1 and ζ̄0^m/|ζ|^{2m} for ℓ = −m.
    """
    if ell >= -1:
        return manufactured_section(universe, ell)
    u = universe
    m = -ell
    value = RationalFn.quotient(u, u.gen("zetabar", 0) ** m, [(norm_sq(u, "zeta"), m)])
    return section_rep_new(FormExpr.scalar(u, value), ell, 0, label=f"conj(zeta0)^{m}/|zeta|^{2 * m}")


def mixed_section(
    universe: Universe,
) -> SectionRep:
    """ψ = ζ0 ζ̄1 / |ζ|², weight 0 on P^N."""
    u = universe
    value = RationalFn.quotient(u, u.gen("zeta", 0) * u.gen("zetabar", 1), [norm_sq(u, "zeta")])
    return section_rep_new(FormExpr.scalar(u, value), 0, 0, label="zeta0*conj(zeta1)/|zeta|^2")


def antiholomorphic_section(
    universe: Universe,
) -> SectionRep:
    """ψ = ζ̄0 ζ̄1 / |ζ|⁴, weight −2; its ∂̄ has zero obstruction on P¹."""
    u = universe
    value = RationalFn.quotient(u, u.gen("zetabar", 0) * u.gen("zetabar", 1), [(norm_sq(u, "zeta"), 2)])
    return section_rep_new(FormExpr.scalar(u, value), -2, 0, label="conj(zeta0*zeta1)/|zeta|^4")


def top_antiholomorphic(
    universe: Universe,
) -> FormExpr:
    """Ω̄ = Σ (−1)^i ζ̄_i dζ̄_0∧…∧(i)∧…∧dζ̄_N."""
    u = universe
    top = FormExpr.scalar(u, 1)
    for j in range(u.size):
        top = top.wedge(FormExpr.generator(u, "dzetabar", j))
    return contract(euler_field(u, "dzetabar"), top)


def monomial_exponents(
    size: int,
    degree: int,
) -> list[tuple[int, ...]]:
    """Exponents μ ∈ ℕ^size with |μ| = degree, in lexicographic order (highest first)."""
    if degree < 0:
        return []
    out: list[tuple[int, ...]] = []

    def extend(prefix: tuple[int, ...], left: int) -> None:
        if len(prefix) == size - 1:
            out.append(prefix + (left,))
            return
        for e in range(left, -1, -1):
            extend(prefix + (e,), left - e)

    extend((), degree)
    return out


def dual_monomials(
    n: int,
    ell: int,
) -> list[tuple[int, ...]]:
    """Exponents μ with |μ| = −ℓ − N − 1."""
    return monomial_exponents(n + 1, -ell - n - 1)


def pn_dual_form(
    n: int,
    ell: int,
    mu: Optional[tuple[int, ...]] = None,
) -> SectionRep:
    """
    The (0,N)-form with values in O(ℓ) dual to ζ^μ Ω:

        φ_μ = c_μ ζ̄^μ Ω̄ / |ζ|^{2(k+N+1)},  k = −ℓ − N − 1,

    normalized so that ∫ ζ^μ Ω ∧ φ_μ = 1 and orthogonal to the other monomials.

    Raises:
        ValueError: ℓ > −N − 1 (no holomorphic (N,0)-forms with values in O(−ℓ))
    """
    u = get_universe(n)
    monomials = dual_monomials(n, ell)
    if not monomials:
        raise ValueError(f"no dual forms for l={ell} on P^{n}")
    mu = mu or monomials[0]
    if mu not in monomials:
        raise ValueError(f"exponent {mu} does not have degree {-ell - n - 1}")
    k = -ell - n - 1
    mu_factorial = 1
    for e in mu:
        mu_factorial *= factorial(e)
    orientation = -1 if (n * (n - 1) // 2) % 2 else 1
    sign = (-1) ** n * orientation
    numerator = u.constant(Rational(sign * factorial(k + n), mu_factorial))
    for j, e in enumerate(mu):
        numerator = numerator * u.gen("zetabar", j) ** e
    factors = [(norm_sq(u, "zeta"), k + n + 1)]
    coeff = RationalFn.quotient(u, numerator, factors + [(u.gen("pi2i"), n)])
    form = top_antiholomorphic(u).scale(coeff)
    logger.debug(f"Dual form built | N={n} | l={ell} | mu={mu}")
    return section_rep_new(form, ell, n, closed=True, label=f"dual{list(mu)}")


def holomorphic_top_forms(
    n: int,
    ell: int,
) -> list[tuple[tuple[int, ...], FormExpr]]:
    """Monomial basis ζ^μ Ω of holomorphic (N,0)-forms with values in O(−ℓ)."""
    u = get_universe(n)
    out = []
    for mu in dual_monomials(n, ell):
        monomial = u.ring.one
        for j, e in enumerate(mu):
            monomial = monomial * u.gen("zeta", j) ** e
        out.append((mu, omega(u).scale(RationalFn.from_poly(u, monomial))))
    return out
