"""
The cuspidal cubic ζ1³ = ζ2²ζ0 through its parametrization τ ↦ [1 : τ² : τ³],
with the explicit leading part of its kernel.
"""

import numpy as np

from app.core.logger import get_logger
from app.services.algebra.universe import get_universe
from app.services.curves import PlaneCurve, RationalParam, cusp_parametrization, plane_curve_new
from app.services.hefer import cusp_polynomial
from app.services.kernels.plane import KernelEval, assemble_plane_kernel

logger = get_logger(__name__)


def cusp_curve() -> PlaneCurve:
    return plane_curve_new(cusp_polynomial(get_universe(2)), label="cusp")


def cusp_kernel(
    s: int = 1,
) -> KernelEval:
    """Kernel of the cusp for O(s) (κ = s − 1), built from the valid Hefer variant."""
    return assemble_plane_kernel(cusp_curve(), s)


def cusp_leading_reference(
    tau: np.ndarray,
    t: np.ndarray,
) -> np.ndarray:
    """(1/2πi)(τ⁶ − t⁶)/((τ² − t²)(τ³ − t³)τ²), coefficient of dτ."""
    tau = np.asarray(tau, dtype=complex)
    t = np.asarray(t, dtype=complex)
    return (tau**6 - t**6) / ((tau**2 - t**2) * (tau**3 - t**3) * tau**2) / (2j * np.pi)


def cusp_kernel_on_param(
    kernel: KernelEval,
    tau: np.ndarray,
    t: np.ndarray,
    param: RationalParam | None = None,
) -> np.ndarray:
    """Coefficient of dτ of the kernel at ζ = P(τ), z = P(t) in the affine chart."""
    param = param or cusp_parametrization()
    zeta = param.evaluate(0, tau)
    tangent = param.derivative(0, tau)
    z = param.evaluate(0, t)
    a, b = kernel.base_variables
    base_form = zeta[..., a] * tangent[..., b] - zeta[..., b] * tangent[..., a]
    return kernel(zeta, z) * base_form


def cusp_leading_defect(
    kernel: KernelEval,
    t: complex = 0.5,
    separations: tuple[float, ...] = (1e-1, 1e-2, 1e-3),
    angles: int = 16,
) -> dict[float, dict[str, float]]:
    """
    Distance of the kernel from its leading part on circles |τ − t| = r.

    Returns:
        separation -> {"defect": max |k − k_lead|·r, "reference": max |k_lead|·r}
    """
    theta = 2.0 * np.pi * np.arange(angles) / angles
    out = {}
    for r in separations:
        tau = t + r * np.exp(1j * theta)
        lead = cusp_leading_reference(tau, t)
        diff = cusp_kernel_on_param(kernel, tau, np.full_like(tau, t)) - lead
        out[r] = {"defect": float(np.abs(diff).max()) * r, "reference": float(np.abs(lead).max()) * r}
    logger.info(f"Cusp leading-term defect | t={t} | defects={out}")
    return out
