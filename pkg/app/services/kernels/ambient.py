"""
Koppelman kernels on P^N for O(ℓ): the α branch (ℓ ≥ −N) with weight α^{ℓ+N}
and the β branch (ℓ ≤ −N) with weight β^{−N−ℓ}.
"""

from dataclasses import dataclass
from typing import Any

from app.core.errors import TwistRangeError
from app.core.logger import get_logger
from app.services.forms import FormExpr, extract
from app.services.weights import build_alpha, build_b_B, build_beta

logger = get_logger(__name__)

WEIGHTS = ("alpha", "beta")


@dataclass(frozen=True, eq=False)
class PnKernel:
    n: int
    twist: int
    weight: str
    power: int
    kernel_form: FormExpr
    projection_form: FormExpr

    def kernel_integrand(
        self,
        phi: FormExpr,
        q: int,
    ) -> FormExpr:
        """(K∧φ) restricted to ζ-bidegree (N, N) and dz̄-degree q − 1."""
        n = self.n
        return extract(self.kernel_form.wedge(phi, max_dzeta=n), n, n, q - 1, 0)

    def projection_integrand(
        self,
        phi: FormExpr,
        q: int,
    ) -> FormExpr:
        """(P∧φ) restricted to ζ-bidegree (N, N) and dz̄-degree q."""
        n = self.n
        return extract(self.projection_form.wedge(phi, max_dzeta=n), n, n, q, 0)

    def to_dict(
        self,
    ) -> dict[str, Any]:
        return {
            "N": self.n,
            "twist": self.twist,
            "weight": self.weight,
            "power": self.power,
            "kernel_terms": len(self.kernel_form.terms),
            "projection_terms": len(self.projection_form.terms),
        }


def assemble_pn_kernel(
    n: int,
    ell: int,
    weight: str = "alpha",
) -> PnKernel:
    """
    Args:
        n: Projective dimension
        ell: Twist ℓ of the line bundle
        weight: "alpha" (needs ℓ ≥ −N) or "beta" (needs ℓ ≤ −N)

    Raises:
        TwistRangeError: ℓ outside the range of the chosen weight
    """
    if weight not in WEIGHTS:
        raise ValueError(f"weight must be one of {WEIGHTS}, got {weight!r}")
    _, B = build_b_B(n)
    if weight == "alpha":
        if ell < -n:
            raise TwistRangeError(f"alpha weight needs l >= -{n}, got {ell}")
        power = ell + n
        g = build_alpha(n, power).form
        product = g.wedge(B, max_dzeta=n)
    else:
        if ell > -n:
            raise TwistRangeError(f"beta weight needs l <= -{n}, got {ell}")
        power = -n - ell
        g = build_beta(n, power)[0].form
        product = B.wedge(g, max_dzeta=n)
    kernel = PnKernel(
        n=n,
        twist=ell,
        weight=weight,
        power=power,
        kernel_form=extract(product, n),
        projection_form=extract(g, n),
    )
    logger.info(
        f"P^N kernel assembled | N={n} | l={ell} | weight={weight} | power={power} "
        f"| kernel_terms={len(kernel.kernel_form.terms)} | projection_terms={len(kernel.projection_form.terms)}"
    )
    return kernel
