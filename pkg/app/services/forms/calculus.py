"""
Contractions, ∂̄, ∇_η, projectivity, component extraction and ϑ.
"""

from dataclasses import dataclass, field

from app.core.errors import NotOmegaDivisibleError
from app.core.logger import get_logger
from app.services.algebra.operations import multi_degree
from app.services.algebra.rational import RationalFn
from app.services.algebra.universe import Universe
from app.services.forms.expr import (
    FormExpr,
    Key,
    VectorFieldExpr,
    gen_id,
    insertion_sign,
)

logger = get_logger(__name__)


# ---------------------------------------------------------------- fields


def eta_field(
    universe: Universe,
) -> VectorFieldExpr:
    """η = 2πi Σ z_j ∂/∂ζ_j."""
    pi2i = universe.gen("pi2i")
    return VectorFieldExpr.from_coeffs(
        universe,
        "dzeta",
        [pi2i * universe.gen("z", j) for j in range(universe.size)],
    )


def euler_field(
    universe: Universe,
    family: str,
) -> VectorFieldExpr:
    """Σ v_j ∂/∂v_j for v = ζ (dzeta), ζ̄ (dzetabar), z̄ (dzbar) or w (dw)."""
    variable = {"dzeta": "zeta", "dzetabar": "zetabar", "dzbar": "zbar", "dw": "w"}[family]
    return VectorFieldExpr.from_coeffs(
        universe,
        family,
        [universe.gen(variable, j) for j in range(universe.size)],
    )


def coordinate_field(
    universe: Universe,
    family: str,
    j: int,
    coeff=1,
) -> VectorFieldExpr:
    """coeff · ∂/∂v_j."""
    coeffs = [0] * universe.size
    coeffs[j] = coeff
    return VectorFieldExpr.from_coeffs(universe, family, coeffs)


def w_minus_z_field(
    universe: Universe,
) -> VectorFieldExpr:
    """2πi Σ (w_j − z_j) ∂/∂w_j, the contraction δ_{w−z} of the Hefer identity."""
    pi2i = universe.gen("pi2i")
    return VectorFieldExpr.from_coeffs(
        universe,
        "dw",
        [pi2i * (universe.gen("w", j) - universe.gen("z", j)) for j in range(universe.size)],
    )


# ----------------------------------------------------------- derivations


def contract(
    v: VectorFieldExpr,
    a: FormExpr,
) -> FormExpr:
    """Interior multiplication, a left anti-derivation of degree −1."""
    out: dict[Key, RationalFn] = {}
    for key, coeff in a.terms.items():
        for m, g in enumerate(key):
            c = v.component(g)
            if c is None or c.is_zero():
                continue
            new_key = key[:m] + key[m + 1 :]
            value = coeff * c
            if m % 2:
                value = -value
            out[new_key] = out[new_key] + value if new_key in out else value
    return FormExpr.build(a.universe, out, a.bundle)


DBAR_FAMILIES = {
    "zeta": (("zetabar", "dzetabar"),),
    "z": (("zbar", "dzbar"),),
    "both": (("zetabar", "dzetabar"), ("zbar", "dzbar")),
}


def dbar(
    a: FormExpr,
    family: str = "both",
) -> FormExpr:
    """∂̄ in ζ̄, z̄ or both: differentiate coefficients, wedge dv̄ on the left."""
    if family not in DBAR_FAMILIES:
        raise ValueError(f"family must be one of {sorted(DBAR_FAMILIES)}")
    universe = a.universe
    out: dict[Key, RationalFn] = {}
    for variable, gen_family_name in DBAR_FAMILIES[family]:
        for j in range(universe.size):
            var = universe.index(variable, j)
            g = gen_id(universe, gen_family_name, j)
            for key, coeff in a.terms.items():
                if not coeff.depends_on(var):
                    continue
                inserted = insertion_sign(key, g)
                if inserted is None:
                    continue
                sign, new_key = inserted
                value = coeff.diff(var)
                if value.is_zero():
                    continue
                if sign < 0:
                    value = -value
                out[new_key] = out[new_key] + value if new_key in out else value
    return FormExpr.build(universe, out, a.bundle)


def nabla_eta(
    a: FormExpr,
) -> FormExpr:
    """∇_η = δ_η − ∂̄ (total ∂̄ in ζ̄ and z̄)."""
    return contract(eta_field(a.universe), a) - dbar(a, "both")


# ------------------------------------------------------------ components


def extract(
    a: FormExpr,
    dzeta: int,
    dzetabar: int | None = None,
    dzbar: int | None = None,
    dw: int | None = None,
) -> FormExpr:
    """Component with exactly the requested generator degrees."""
    wanted = (dzeta, dzetabar, dzbar, dw)

    def keep(key: Key) -> bool:
        degrees = a.key_degrees(key)
        return all(w is None or d == w for d, w in zip(degrees, wanted))

    return a.filter(keep)


def omega(
    universe: Universe,
) -> FormExpr:
    """Ω = δ_ζ(dζ0∧…∧dζN) in the ζ slot."""
    return contract(euler_field(universe, "dzeta"), top_form(universe))


def top_form(
    universe: Universe,
) -> FormExpr:
    """dζ0∧…∧dζN."""
    return FormExpr.build(
        universe,
        {tuple(gen_id(universe, "dzeta", j) for j in range(universe.size)): RationalFn.one(universe)},
    )


def theta(
    a: FormExpr,
) -> FormExpr:
    """
    The unique ϑ(a) with ϑ(a)∧Ω = a_N.

    Read off the coefficients of dζ1∧…∧dζN∧R, divide by ζ0 and fix the sign
    (−1)^{|R|·N}; the product is then checked exactly.

    Raises:
        NotOmegaDivisibleError: a_N is not a multiple of Ω
    """
    universe = a.universe
    n = universe.n
    size = universe.size
    a_n = extract(a, n)
    if a_n.is_zero():
        return FormExpr.zero(universe)

    missing_zero = tuple(gen_id(universe, "dzeta", j) for j in range(1, size))
    zeta0 = RationalFn.quotient(universe, universe.ring.one, [universe.gen("zeta", 0)])
    out: dict[Key, RationalFn] = {}
    for key, coeff in a_n.terms.items():
        head, rest = key[:n], key[n:]
        if head != missing_zero:
            continue
        value = (coeff * zeta0).cancel()
        if (len(rest) * n) % 2:
            value = -value
        out[rest] = value
    result = FormExpr.build(universe, out)

    if not (result.wedge(omega(universe)) - a_n).is_zero():
        logger.debug(f"Omega division failed | terms={len(a_n.terms)}")
        raise NotOmegaDivisibleError()
    return result


# ------------------------------------------------------------ projectivity


@dataclass
class ProjectivityCertificate:
    projective: bool
    checks: dict[str, bool] = field(default_factory=dict)
    failure: str | None = None

    def __bool__(self) -> bool:
        return self.projective


def is_projective(
    a: FormExpr,
    bundle: tuple[int, int] | None = None,
) -> ProjectivityCertificate:
    """
    Projectivity test: δ_ζ a = δ_ζ̄ a = δ_z̄ a = 0 and coefficient weights
    matching the declared bundle.

    A term with j holomorphic ζ-differentials must have total ζ-scaling
    weight p_ζ + j and total z-scaling weight p_z − j (differentials
    included), with no residual λ̄ or μ̄ exponent.
    """
    universe = a.universe
    bundle = bundle if bundle is not None else a.bundle
    checks: dict[str, bool] = {}

    for name, family in (("delta_zeta", "dzeta"), ("delta_zetabar", "dzetabar"), ("delta_zbar", "dzbar")):
        checks[name] = contract(euler_field(universe, family), a).is_zero()
        if not checks[name]:
            return ProjectivityCertificate(False, checks, f"{name} a != 0")

    if bundle is None:
        checks["weights"] = True
        return ProjectivityCertificate(True, checks)

    p_zeta, p_z = bundle
    for key, coeff in a.terms.items():
        n_dzeta, n_dzetabar, n_dzbar, _ = a.key_degrees(key)
        zeta_deg = multi_degree(coeff, ("zeta", "zetabar"))
        z_deg = multi_degree(coeff, ("z", "zbar"))
        label = a.key_label(key)
        if zeta_deg is None or z_deg is None:
            checks["weights"] = False
            return ProjectivityCertificate(False, checks, f"inhomogeneous coefficient at {label}")
        # dζ carries ζ-weight 1, dζ̄ and dz̄ carry conjugate weight 1
        ok_zeta = zeta_deg[1] + n_dzetabar == 0 and zeta_deg[0] == p_zeta
        ok_z = z_deg[1] + n_dzbar == 0 and z_deg[0] == p_z - n_dzeta
        if not (ok_zeta and ok_z):
            checks["weights"] = False
            return ProjectivityCertificate(
                False,
                checks,
                f"weight mismatch at {label} | zeta={zeta_deg} | z={z_deg} | bundle={bundle}",
            )
    checks["weights"] = True
    return ProjectivityCertificate(True, checks)


