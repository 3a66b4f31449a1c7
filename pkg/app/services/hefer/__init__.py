from app.services.hefer.koszul import (
    KoszulData,
    KoszulHefer,
    degree_ledger,
    eval_sigma,
    hefer_relation_residuals,
    koszul_data_new,
    koszul_differential,
    koszul_hefer,
)
from app.services.hefer.scalar import (
    HeferScalar,
    cusp_hefer_variants,
    cusp_polynomial,
    fermat_hefer,
    hefer_decompose,
    select_hefer_variant,
)
from app.services.hefer.substitution import tau_star, tau_star_components, tau_star_poly, tau_star_residual

__all__ = [
    "HeferScalar",
    "KoszulData",
    "KoszulHefer",
    "cusp_hefer_variants",
    "cusp_polynomial",
    "degree_ledger",
    "eval_sigma",
    "fermat_hefer",
    "hefer_decompose",
    "hefer_relation_residuals",
    "koszul_data_new",
    "koszul_differential",
    "koszul_hefer",
    "select_hefer_variant",
    "tau_star",
    "tau_star_components",
    "tau_star_poly",
    "tau_star_residual",
]
