"""
Koppelman kernels of smooth plane curves X = {f = 0} ⊂ P^2.

With the fiber variable c and base variables a < b of the curve, the kernel
on X × X is k = K(ζ, z)·(ζ_a dζ_b − ζ_b dζ_a) where

    K = α₀₀^κ [2πi h_c(α₀₀ζ, z) − (ζ̄_c/|ζ|²) Σ_j 2πi h_j(α₀₀ζ, z) ζ_j]
        / (2πi · ∂f/∂ζ_c · (ζ_b z_a − ζ_a z_b)),

κ = s − d + 2, h a Hefer form with 2πi Σ h_j (w_j − z_j) = f(w) − f(z).
K has ζ-weight −(s+2) and z-weight s.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Any, Optional

import numpy as np

from app.core.config import settings
from app.core.errors import CurveNotSmoothError, TwistBelowThresholdError
from app.core.logger import get_logger
from app.services.algebra.numeric import compile_rational
from app.services.algebra.rational import RationalFn
from app.services.algebra.universe import Universe
from app.services.curves import ChartSamples, PlaneCurve, fiber_roots, pullback
from app.services.forms import FormExpr, contract, coordinate_field, eta_field
from app.services.hefer import HeferScalar
from app.services.kernels.common import (
    alpha00,
    curve_hefer,
    hefer_at_alpha,
    hefer_one_zero,
    split_z,
    z_monomials,
)
from app.services.weights import build_b_B
from app.services.weights.construction import norm_sq

logger = get_logger(__name__)


def twist_kappa(
    curve: PlaneCurve,
    s: int,
) -> int:
    """κ = s − d + 2; raises TwistBelowThresholdError when negative."""
    kappa = s - curve.degree + 2
    if kappa < 0:
        raise TwistBelowThresholdError(f"s={s}, d={curve.degree}, kappa={kappa}")
    return kappa


@dataclass(frozen=True, eq=False)
class KernelEval:
    """
    Scalar kernel K with k = K·(ζ_a dζ_b − ζ_b dζ_a) along X.

    ``scalar`` is exact; calling the object evaluates it on batches.
    """

    name: str
    universe: Universe
    twist: int
    kappa: int
    scalar: RationalFn
    base_variables: tuple[int, int]
    zeta_weight: int
    z_weight: int
    curve: Optional[PlaneCurve] = None
    hefer: Optional[HeferScalar] = None
    undivided: Optional[RationalFn] = None

    @cached_property
    def form(
        self,
    ) -> FormExpr:
        """k = K·(ζ_a dζ_b − ζ_b dζ_a) as an ambient 1-form."""
        u = self.universe
        a, b = self.base_variables
        coeffs: list[Any] = [0] * u.size
        coeffs[a] = -(self.scalar * u.gen("zeta", b))
        coeffs[b] = self.scalar * u.gen("zeta", a)
        return FormExpr.one_form(u, "dzeta", coeffs)

    def __call__(
        self,
        zeta: np.ndarray,
        z: np.ndarray,
    ) -> np.ndarray:
        values = self.universe.values(zeta=zeta, z=z)
        with np.errstate(divide="ignore", invalid="ignore"):
            return compile_rational(self.scalar)(values)

    @cached_property
    def moments(
        self,
    ) -> dict[tuple[int, ...], RationalFn]:
        """K·(ζ_b z_a − ζ_a z_b) = Σ_μ z^μ c_μ(ζ)."""
        if self.undivided is None:
            raise ValueError(f"kernel {self.name} carries no undivided numerator")
        return split_z(self.undivided)

    def moment_values(
        self,
        zeta: np.ndarray,
    ) -> dict[tuple[int, ...], np.ndarray]:
        values = self.universe.values(zeta=zeta)
        with np.errstate(divide="ignore", invalid="ignore"):
            return {mu: compile_rational(c)(values) for mu, c in self.moments.items()}

    def from_moments(
        self,
        table: dict[tuple[int, ...], np.ndarray],
        zeta: np.ndarray,
        z: np.ndarray,
    ) -> np.ndarray:
        """K(ζ, z) from ``moment_values(ζ)``; one table serves every z."""
        a, b = self.base_variables
        z = np.asarray(z, dtype=complex)
        monomials = z_monomials(table, z)
        numerator = sum(table[mu] * monomials[mu] for mu in table)
        diagonal = zeta[..., b] * z[..., a] - zeta[..., a] * z[..., b]
        with np.errstate(divide="ignore", invalid="ignore"):
            return numerator / diagonal

    def base_form(
        self,
        samples: ChartSamples,
    ) -> np.ndarray:
        """Pullback coefficient of ζ_a dζ_b − ζ_b dζ_a along X (per dt)."""
        a, b = self.base_variables
        zeta, tangent = samples.zeta, samples.tangent
        return zeta[..., a] * tangent[..., b] - zeta[..., b] * tangent[..., a]

    def on_samples(
        self,
        samples: ChartSamples,
        z: np.ndarray,
    ) -> np.ndarray:
        """Coefficient of dt of the kernel restricted to X, shape (node, sheet)."""
        return self(samples.zeta, z) * self.base_form(samples)

    def scaling_defect(
        self,
        zeta: np.ndarray,
        z: np.ndarray,
        lam: complex,
        mu: complex,
    ) -> float:
        """Max relative deviation of K(λζ, μz) from λ^{wζ} μ^{wz} K(ζ, z)."""
        base = self(zeta, z)
        scaled = self(lam * np.asarray(zeta), mu * np.asarray(z))
        expected = lam**self.zeta_weight * mu**self.z_weight * base
        return float(np.max(np.abs(scaled - expected) / np.maximum(np.abs(expected), 1e-300)))

    def to_dict(
        self,
    ) -> dict[str, Any]:
        return {
            "name": self.name,
            "twist": self.twist,
            "kappa": self.kappa,
            "zeta_weight": self.zeta_weight,
            "z_weight": self.z_weight,
            "base_variables": list(self.base_variables),
            "hefer": None if self.hefer is None else self.hefer.source,
            "denominator_atoms": len(self.scalar.den),
        }


def _diagonal_factor(
    universe: Universe,
    base_variables: tuple[int, int],
):
    """ζ_b z_a − ζ_a z_b."""
    a, b = base_variables
    return universe.gen("zeta", b) * universe.gen("z", a) - universe.gen("zeta", a) * universe.gen("z", b)


def _kernel_parts(
    curve: PlaneCurve,
    s: int,
    hefer: HeferScalar,
    diagonal: bool = True,
) -> tuple[int, RationalFn, RationalFn]:
    """κ, principal part and remainder of K (times ζ_b z_a − ζ_a z_b when ``diagonal`` is False)."""
    u = curve.universe
    kappa = twist_kappa(curve, s)
    c = curve.fiber_variable
    numerators = hefer_at_alpha(hefer)
    fc = curve.f.diff(u.gen("zeta", c))
    factors = [u.gen("pi2i"), fc]
    if diagonal:
        factors.append(_diagonal_factor(u, curve.base_variables))
    prefactor = alpha00(u) ** kappa * RationalFn.quotient(u, u.ring.one, factors)
    euler_sum = RationalFn.zero(u)
    for j, value in enumerate(numerators):
        euler_sum = euler_sum + value * u.gen("zeta", j)
    projection = RationalFn.quotient(u, u.gen("zetabar", c), [norm_sq(u, "zeta")])
    principal = prefactor * numerators[c]
    remainder = -(prefactor * projection * euler_sum)
    return kappa, principal, remainder


def assemble_plane_kernel(
    curve: PlaneCurve,
    s: int,
    hefer: Optional[HeferScalar] = None,
) -> KernelEval:
    """
    The Koppelman kernel of a plane curve for sections of O(s).

    Args:
        curve: Plane curve (singular curves are accepted; the kernel formula is
            then only meaningful away from the singular points)
        s: Twist
        hefer: Hefer form of f (default: ``curve_hefer``)

    Raises:
        TwistBelowThresholdError: κ = s − d + 2 < 0
    """
    hefer = hefer or curve_hefer(curve)
    kappa, principal, remainder = _kernel_parts(curve, s, hefer)
    scalar = principal + remainder
    _, principal_u, remainder_u = _kernel_parts(curve, s, hefer, diagonal=False)
    logger.info(
        f"Plane kernel assembled | curve={curve.label} | s={s} | kappa={kappa} | hefer={hefer.source} "
        f"| numerator_terms={len(scalar.num)}"
    )
    return KernelEval(
        name=f"plane:{curve.label or 'curve'}:s={s}",
        universe=curve.universe,
        twist=s,
        kappa=kappa,
        scalar=scalar,
        base_variables=curve.base_variables,
        zeta_weight=-(s + 2),
        z_weight=s,
        curve=curve,
        hefer=hefer,
        undivided=principal_u + remainder_u,
    )


def principal_remainder_split(
    curve: PlaneCurve,
    s: int,
    hefer: Optional[HeferScalar] = None,
) -> tuple[KernelEval, KernelEval]:
    """
    Split K into the part carrying h_c (singular on the diagonal like a Cauchy
    kernel) and the remainder, which is bounded near the diagonal and
    holomorphic in z.

    Raises:
        CurveNotSmoothError: X has singular points
    """
    if not curve.smooth:
        raise CurveNotSmoothError(f"{len(curve.singular_points)} singular point(s)")
    hefer = hefer or curve_hefer(curve)
    kappa, principal, remainder = _kernel_parts(curve, s, hefer)
    _, principal_u, remainder_u = _kernel_parts(curve, s, hefer, diagonal=False)

    def wrap(name: str, scalar: RationalFn, undivided: RationalFn) -> KernelEval:
        return KernelEval(
            name=f"{name}:{curve.label or 'curve'}:s={s}",
            universe=curve.universe,
            twist=s,
            kappa=kappa,
            scalar=scalar,
            base_variables=curve.base_variables,
            zeta_weight=-(s + 2),
            z_weight=s,
            curve=curve,
            hefer=hefer,
            undivided=undivided,
        )

    return wrap("principal", principal, principal_u), wrap("remainder", remainder, remainder_u)


# ------------------------------------------------------------ weight form


def structure_field(
    curve: PlaneCurve,
):
    """A = (2πi/f_c) ∂/∂ζ_c."""
    u = curve.universe
    c = curve.fiber_variable
    fc = curve.f.diff(u.gen("zeta", c))
    return coordinate_field(u, "dzeta", c, RationalFn.quotient(u, u.gen("pi2i"), [fc]))


def weighted_kernel_form(
    curve: PlaneCurve,
    s: int,
    hefer: Optional[HeferScalar] = None,
) -> FormExpr:
    """
    δ_A(α₀₀^κ b ∧ h₁₀): the part of δ_A(α^κ∧B∧τ*h)_2 that survives pullback
    against (0,1)-forms on X. On X × X its pullback is the kernel above.
    """
    hefer = hefer or curve_hefer(curve)
    kappa = twist_kappa(curve, s)
    b, _ = build_b_B(2)
    weighted = b.wedge(hefer_one_zero(hefer)).scale(alpha00(curve.universe) ** kappa)
    return contract(structure_field(curve), weighted)


def reduction_identity_residual(
    hefer: HeferScalar,
    kappa: int,
) -> FormExpr:
    """
    δ_η(α₀₀^κ b∧h₁₀) − α₀₀^κ [h₁₀ − b (f(z) − α₀₀^d f(ζ))], identically zero.

    On X × X the correction vanishes, so δ_η(α^κ∧B∧h) reduces to (α^κ∧h).
    """
    u = hefer.universe
    b, _ = build_b_B(u.n)
    h10 = hefer_one_zero(hefer)
    a00 = alpha00(u)
    weight = a00**kappa
    lhs = contract(eta_field(u), b.wedge(h10).scale(weight))
    defect = RationalFn.from_poly(u, hefer.f_in("z")) - a00**hefer.degree * hefer.f
    rhs = (h10 - b.scale(defect)).scale(weight)
    return (lhs - rhs).cancel()


# ----------------------------------------------------------- closed forms


def fermat_closed_form(
    zeta: np.ndarray,
    z: np.ndarray,
    s: int = 1,
) -> np.ndarray:
    """
    Closed form of K for ζ0³ + ζ1³ + ζ2³ with fiber variable ζ2, valid for
    ζ on the curve (the α²f(ζ) term is dropped).
    """
    zeta = np.asarray(zeta, dtype=complex)
    z = np.asarray(z, dtype=complex)
    kappa = s - 1
    norm2 = np.sum(np.abs(zeta) ** 2, axis=-1)
    alpha = np.sum(z * np.conj(zeta), axis=-1) / norm2
    z2, zeta2 = z[..., 2], zeta[..., 2]
    head = z2**2 + alpha * z2 * zeta2 + alpha**2 * zeta2**2
    tail = np.sum(z**2 * zeta, axis=-1) + alpha * np.sum(z * zeta**2, axis=-1)
    bracket = head - np.conj(zeta2) / norm2 * tail
    diagonal = zeta[..., 1] * z[..., 0] - zeta[..., 0] * z[..., 1]
    return alpha**kappa * bracket / (2j * np.pi * diagonal * 3.0 * zeta2**2)


def on_curve_pairs(
    curve: PlaneCurve,
    count: int,
    seed: int = 0,
    spread: float = 0.9,
) -> tuple[np.ndarray, np.ndarray]:
    """Random (ζ, z) on X in chart 0 (fiber roots chosen at random)."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(2):
        base = spread * (rng.uniform(-1, 1, count) + 1j * rng.uniform(-1, 1, count))
        roots = fiber_roots(curve, 0, base)
        pick = roots[np.arange(count), rng.integers(0, curve.sheets, count)]
        out.append(curve.representative(0, base, pick))
    return out[0], out[1]


def kernel_residual_on_curve(
    kernel: KernelEval,
    samples: ChartSamples,
    z: np.ndarray,
    form: FormExpr,
) -> float:
    """Max |pullback(form) − pullback(k)| relative to |pullback(k)| at the samples."""
    pulled = pullback(samples, form, z=z)["dt"]
    expected = kernel.on_samples(samples, z)
    scale = np.maximum(np.abs(expected), settings.EVAL_POLE_FLOOR)
    return float(np.max(np.abs(pulled - expected) / scale))
