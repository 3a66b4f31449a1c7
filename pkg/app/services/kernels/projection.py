"""
The projection kernel p = −δ_A(α^κ ∧ τ*h_1 ∧ … ∧ τ*h_p)_{(N, N−p)} of a
complete intersection, pulled back against functions on X.

p is polynomial of degree s in z and its denominators do not involve z, so
it splits into z-moments p = Σ_{|μ|=s} z^μ p_μ(ζ).
"""

from dataclasses import dataclass
from typing import Any, Optional, Union

import numpy as np

from app.core.errors import TwistBelowThresholdError
from app.core.logger import get_logger
from app.services.algebra.universe import Universe
from app.services.curves import ChartSamples, PlaneCurve, pullback
from app.services.forms import FormExpr, extract
from app.services.hefer import KoszulData, tau_star
from app.services.kernels.common import split_z, z_monomials
from app.services.kernels.structure import StructureFormRep, structure_form
from app.services.weights import build_alpha

logger = get_logger(__name__)

Moment = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class ProjectionKernel:
    universe: Universe
    twist: int
    kappa: int
    form: FormExpr
    moments: dict[Moment, FormExpr]
    structure: StructureFormRep

    def monomials(
        self,
        z: np.ndarray,
    ) -> dict[Moment, np.ndarray]:
        return z_monomials(self.moments, z)

    def moment_densities(
        self,
        samples: ChartSamples,
    ) -> dict[Moment, np.ndarray]:
        """dt∧dt̄ coefficient of every p_μ along X, shape (node, sheet)."""
        return {mu: pullback(samples, form)["dt_dtbar"] for mu, form in self.moments.items()}

    def density(
        self,
        samples: ChartSamples,
        z: np.ndarray,
    ) -> np.ndarray:
        """dt∧dt̄ coefficient of p(·, z) along X, evaluated without the moment split."""
        return pullback(samples, self.form, z=z)["dt_dtbar"]

    def to_dict(
        self,
    ) -> dict[str, Any]:
        return {
            "twist": self.twist,
            "kappa": self.kappa,
            "terms": len(self.form.terms),
            "moments": [list(mu) for mu in self.moments],
        }


def _as_koszul(
    source: Union[PlaneCurve, KoszulData],
) -> tuple[KoszulData, StructureFormRep]:
    structure = structure_form(source)
    return structure.data, structure


def z_moments(
    form: FormExpr,
) -> dict[Moment, FormExpr]:
    """
    Group every coefficient by its z-monomial.

    Raises:
        ValueError: a denominator or a z̄ power involves the z family
    """
    grouped: dict[Moment, dict] = {}
    for key, coeff in form.terms.items():
        for mu, part in split_z(coeff).items():
            grouped.setdefault(mu, {})[key] = part
    return {mu: FormExpr.build(form.universe, terms) for mu, terms in sorted(grouped.items())}


def assemble_projection_kernel(
    source: Union[PlaneCurve, KoszulData],
    s: int,
    structure: Optional[StructureFormRep] = None,
) -> ProjectionKernel:
    """
    Args:
        source: Plane curve or Koszul data of a complete intersection
        s: Twist of the sections projected
        structure: Precomputed structure form (optional)

    Raises:
        TwistBelowThresholdError: κ(s) < 0
    """
    if structure is None:
        data, structure = _as_koszul(source)
    else:
        data = structure.data
    u = data.universe
    n, p = u.n, data.p
    kappa = data.kappa(s)
    if kappa < 0:
        raise TwistBelowThresholdError(f"s={s}, kappa={kappa}")

    product = build_alpha(n, kappa).form
    for hefer in data.hefers:
        product = product.wedge(tau_star(hefer), max_dzeta=n)
    top = extract(product, n, n - p, 0, 0)
    form = -structure.contract_all(top)
    form = form.cancel()
    moments = z_moments(form)
    degrees = {sum(mu) for mu in moments}
    if degrees and degrees != {s}:
        logger.warning(f"Projection kernel z-degree mismatch | expected={s} | found={sorted(degrees)}")
    logger.info(f"Projection kernel assembled | N={n} | p={p} | s={s} | kappa={kappa} | moments={len(moments)}")
    return ProjectionKernel(u, s, kappa, form, moments, structure)
