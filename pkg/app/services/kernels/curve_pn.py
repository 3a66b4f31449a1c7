"""
Kernels of complete-intersection curves X ⊂ P^N (p = N − 1 equations).

With δ_Z = δ_{ζ2}∘…∘δ_{ζN} (δ_{ζN} applied first), D = δ_η δ_Z Ω and
S = δ_Z(α₀₀^κ h₁∧…∧h_p)₁₀, the kernel is

    k = (−1)^{N−1} S δ_AΩ / D

on X × X. Along X it is K·(ζ0 dζ1 − ζ1 dζ0) with K = (−1)^{N−1} S c / D,
where c is the ratio of δ_AΩ to ζ0 dζ1 − ζ1 dζ0 on tangent vectors of X.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Any

import numpy as np

from app.core.errors import TwistBelowThresholdError, UnsupportedRankError
from app.core.logger import get_logger
from app.services.algebra.numeric import compile_rational
from app.services.algebra.rational import RationalFn
from app.services.forms import CompiledForm, FormExpr, contract, coordinate_field, eta_field, omega
from app.services.hefer import KoszulData
from app.services.kernels.common import alpha00, hefer_one_zero
from app.services.kernels.structure import StructureFormRep, structure_form

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class CurveKernelPN:
    data: KoszulData
    twist: int
    kappa: int
    structure: StructureFormRep
    contracted: RationalFn
    denominator: RationalFn

    @property
    def zeta_weight(self) -> int:
        return -(self.twist + 2)

    @property
    def z_weight(self) -> int:
        return self.twist

    @cached_property
    def _omega_prime(
        self,
    ) -> CompiledForm:
        return CompiledForm(self.structure.omega_prime)

    def structure_ratio(
        self,
        zeta: np.ndarray,
    ) -> np.ndarray:
        """c(ζ) = δ_AΩ(v) / (ζ0 v1 − ζ1 v0) for the tangent v of ``StructureFormRep.tangent``."""
        zeta = np.asarray(zeta, dtype=complex)
        u = self.data.universe
        v = self.structure.tangent(zeta)
        coeffs = self._omega_prime(u.values(zeta=zeta), check_poles=False)
        total = np.zeros(zeta.shape[:-1], dtype=complex)
        for key, value in coeffs.items():
            total = total + value * v[..., key[0]]
        return total / (zeta[..., 0] * v[..., 1] - zeta[..., 1] * v[..., 0])

    def __call__(
        self,
        zeta: np.ndarray,
        z: np.ndarray,
    ) -> np.ndarray:
        u = self.data.universe
        values = u.values(zeta=zeta, z=z)
        sign = -1 if (u.n - 1) % 2 else 1
        with np.errstate(divide="ignore", invalid="ignore"):
            s_val = compile_rational(self.contracted)(values)
            d_val = compile_rational(self.denominator)(values)
            return sign * s_val * self.structure_ratio(zeta) / d_val

    def scaling_defect(
        self,
        zeta: np.ndarray,
        z: np.ndarray,
        lam: complex,
        mu: complex,
    ) -> float:
        base = self(zeta, z)
        scaled = self(lam * np.asarray(zeta), mu * np.asarray(z))
        expected = lam**self.zeta_weight * mu**self.z_weight * base
        return float(np.max(np.abs(scaled - expected) / np.maximum(np.abs(expected), 1e-300)))

    def to_dict(
        self,
    ) -> dict[str, Any]:
        return {
            "N": self.data.n,
            "p": self.data.p,
            "twist": self.twist,
            "kappa": self.kappa,
            "minor": list(self.data.minor_variables),
            "contracted_terms": len(self.contracted.num),
        }


def _contract_minor(
    form: FormExpr,
    n: int,
) -> FormExpr:
    u = form.universe
    for j in range(n, 1, -1):
        form = contract(coordinate_field(u, "dzeta", j), form)
    return form


def assemble_pN_curve_kernel(
    data: KoszulData,
    s: int,
) -> CurveKernelPN:
    """
    Args:
        data: Koszul data of a complete-intersection curve with minor ζ2..ζN
        s: Twist

    Raises:
        UnsupportedRankError: X is not a curve (p ≠ N − 1)
        TwistBelowThresholdError: κ(s) < 0
        MinorDegenerateError: the Jacobian minor vanishes identically
    """
    u = data.universe
    n = u.n
    if data.p != n - 1:
        raise UnsupportedRankError(f"curve kernels need p = N - 1, got p={data.p}, N={n}")
    if tuple(data.minor_variables) != tuple(range(2, n + 1)):
        raise ValueError(f"minor variables must be zeta2..zeta{n}, got {data.minor_variables}")
    kappa = data.kappa(s)
    if kappa < 0:
        raise TwistBelowThresholdError(f"s={s}, kappa={kappa}")

    structure = structure_form(data)
    product = FormExpr.scalar(u, alpha00(u) ** kappa)
    for hefer in data.hefers:
        product = product.wedge(hefer_one_zero(hefer))
    contracted = _contract_minor(product, n).coefficient(())
    denominator = contract(eta_field(u), _contract_minor(omega(u), n)).coefficient(())
    logger.info(
        f"Curve kernel in P^N assembled | N={n} | s={s} | kappa={kappa} | contracted_terms={len(contracted.num)}"
    )
    return CurveKernelPN(data, s, kappa, structure, contracted, denominator)
