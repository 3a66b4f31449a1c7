"""
Exact weight certificates.

A form g is a weight when ∇_η g = 0 and its (0,0) part restricts to 1 on the
diagonal z = ζ. Failures are returned as values naming the first violated
identity and a witness term.
"""

from dataclasses import dataclass, field
from typing import Optional

from app.core.logger import get_logger
from app.services.algebra.operations import restrict_diagonal
from app.services.forms import FormExpr, is_projective, nabla_eta

logger = get_logger(__name__)


@dataclass(frozen=True)
class WeightCertificate:
    passed: bool
    checks: dict[str, bool] = field(default_factory=dict)
    failure: Optional[str] = None
    witness: Optional[str] = None

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": dict(self.checks),
            "failure": self.failure,
            "witness": self.witness,
        }


@dataclass(frozen=True, eq=False)
class Weight:
    form: FormExpr
    bundle: tuple[int, int]
    certificate: WeightCertificate

    def wedge(
        self,
        other: "Weight",
    ) -> "Weight":
        """Products of weights are weights; the certificate is recomputed."""
        n = self.form.universe.n
        form = self.form.wedge(other.form, max_dzeta=n)
        bundle = (self.bundle[0] + other.bundle[0], self.bundle[1] + other.bundle[1])
        form = form.with_bundle(bundle)
        return Weight(form, bundle, verify_weight(form, bundle))


def _witness(
    form: FormExpr,
) -> str:
    key, value = next(iter(form.terms.items()))
    return f"{form.key_label(key)}: {value.to_expr()}"


def verify_weight(
    g: FormExpr,
    bundle: Optional[tuple[int, int]] = None,
) -> WeightCertificate:
    """
    Check ∇_η g = 0, g₀,₀|Δ = 1 and (when a bundle is given) projectivity.

    Args:
        g: Candidate weight
        bundle: Declared (p_ζ, p_z) weights; defaults to ``g.bundle``

    Returns:
        Certificate; ``passed`` is True only when every check holds exactly
    """
    checks: dict[str, bool] = {}

    residual = nabla_eta(g)
    checks["nabla_eta_zero"] = residual.is_zero()
    if not checks["nabla_eta_zero"]:
        logger.debug(f"Weight check failed | identity=nabla_eta | terms={len(residual.terms)}")
        return WeightCertificate(False, checks, "∇_η g ≠ 0", _witness(residual))

    g00 = g.coefficient(())
    normalized = (restrict_diagonal(g00) - 1).is_zero() if not g00.is_zero() else False
    checks["diagonal_normalized"] = normalized
    if not normalized:
        return WeightCertificate(False, checks, "g₀,₀ restricted to z = ζ is not 1", f"1: {g00.to_expr()}")

    declared = bundle if bundle is not None else g.bundle
    if declared is not None:
        projective = is_projective(g, declared)
        checks["projective"] = projective.projective
        if not projective:
            return WeightCertificate(False, checks, "not projective", projective.failure)

    return WeightCertificate(True, checks)
