from app.services.kernels.ambient import PnKernel, assemble_pn_kernel
from app.services.kernels.common import (
    alpha00,
    curve_hefer,
    hefer_at_alpha,
    hefer_one_zero,
    split_z,
    z_monomials,
)
from app.services.kernels.curve_pn import CurveKernelPN, assemble_pN_curve_kernel
from app.services.kernels.cusp import (
    cusp_curve,
    cusp_kernel,
    cusp_kernel_on_param,
    cusp_leading_defect,
    cusp_leading_reference,
)
from app.services.kernels.plane import (
    KernelEval,
    assemble_plane_kernel,
    fermat_closed_form,
    kernel_residual_on_curve,
    on_curve_pairs,
    principal_remainder_split,
    reduction_identity_residual,
    structure_field,
    twist_kappa,
    weighted_kernel_form,
)
from app.services.kernels.projection import ProjectionKernel, assemble_projection_kernel, z_moments
from app.services.kernels.structure import (
    StructureFormRep,
    determinant,
    plane_relation_residual,
    structure_form,
)

__all__ = [
    "CurveKernelPN",
    "KernelEval",
    "PnKernel",
    "ProjectionKernel",
    "StructureFormRep",
    "alpha00",
    "assemble_pN_curve_kernel",
    "assemble_plane_kernel",
    "assemble_pn_kernel",
    "assemble_projection_kernel",
    "curve_hefer",
    "cusp_curve",
    "cusp_kernel",
    "cusp_kernel_on_param",
    "cusp_leading_defect",
    "cusp_leading_reference",
    "determinant",
    "fermat_closed_form",
    "hefer_at_alpha",
    "hefer_one_zero",
    "kernel_residual_on_curve",
    "on_curve_pairs",
    "plane_relation_residual",
    "principal_remainder_split",
    "reduction_identity_residual",
    "split_z",
    "structure_field",
    "structure_form",
    "twist_kappa",
    "weighted_kernel_form",
    "z_monomials",
    "z_moments",
]
