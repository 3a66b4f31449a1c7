"""
One entry point for ∫ kernel∧φ over whichever space the kernel lives on.
"""

from typing import Optional, Union

import numpy as np

from app.models.scenario import GridSpec
from app.services.curves import PlaneCurve
from app.services.kernels import KernelEval, PnKernel, ProjectionKernel
from app.services.operators.curve_solver import CurveOperators
from app.services.operators.pn import ProjectiveQuadrature, TopFormDensity
from app.services.operators.quadrature import CurveTarget, curve_target
from app.services.operators.sections import SectionRep

Kernel = Union[KernelEval, ProjectionKernel, PnKernel]


def quad_integrate(
    kernel: Kernel,
    section: SectionRep,
    grid: Optional[GridSpec] = None,
    target: Optional[Union[CurveTarget, np.ndarray]] = None,
    curve: Optional[PlaneCurve] = None,
) -> complex:
    """
    ∫_X k(ζ, z)∧φ(ζ) for the given kernel, unsigned.

    Args:
        kernel: Plane-curve kernel K (target on X, φ of degree (0,1)),
            curve projection kernel (any z, φ a section; needs ``curve``) or
            P^N kernel (K-term for q = 1, P-term for q = 0)
        section: φ
        grid: Quadrature grid
        target: The point z
        curve: The curve of a projection kernel

    Raises:
        TargetNearDiscriminantError: z sits in a branch window
    """
    if target is None:
        raise ValueError("quad_integrate needs a target point")
    if isinstance(kernel, KernelEval):
        if kernel.curve is None:
            raise ValueError(f"kernel {kernel.name} carries no curve")
        ops = CurveOperators(kernel.curve, kernel.twist, grid, kernel=kernel)
        if not isinstance(target, CurveTarget):
            target = curve_target(kernel.curve, target)
        return ops.apply_kernel(section, target).value
    if isinstance(kernel, ProjectionKernel):
        if curve is None:
            raise ValueError("projection kernels need the curve they were built for")
        ops = CurveOperators(curve, kernel.twist, grid, projection=kernel)
        z = target.zeta if isinstance(target, CurveTarget) else np.asarray(target, dtype=complex)
        return ops.apply_projection_direct(section, z).value
    if isinstance(kernel, PnKernel):
        if section.form is None:
            raise ValueError("P^N integrals need an exact representative")
        quadrature = ProjectiveQuadrature(kernel.n, grid)
        z = np.asarray(target, dtype=complex)
        if section.q == 0:
            return quadrature.integrate(TopFormDensity(kernel.projection_integrand(section.form, 0)).at(z))
        return quadrature.integrate(TopFormDensity(kernel.kernel_integrand(section.form, section.q)).at(z), z)
    raise TypeError(f"unsupported kernel type {type(kernel).__name__}")
