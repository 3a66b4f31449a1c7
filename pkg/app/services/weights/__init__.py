from app.services.weights.certificates import Weight, WeightCertificate, verify_weight
from app.services.weights.construction import (
    GAMMA_VARIANTS,
    alpha_form,
    beta_form,
    beta_potential,
    beta_potential_residual,
    build_alpha,
    build_b_B,
    build_beta,
    build_gamma,
    build_tau,
    gamma_residual,
    norm_sq,
    pairing,
)

__all__ = [
    "GAMMA_VARIANTS",
    "Weight",
    "WeightCertificate",
    "alpha_form",
    "beta_form",
    "beta_potential",
    "beta_potential_residual",
    "build_alpha",
    "build_b_B",
    "build_beta",
    "build_gamma",
    "build_tau",
    "gamma_residual",
    "norm_sq",
    "pairing",
    "verify_weight",
]
