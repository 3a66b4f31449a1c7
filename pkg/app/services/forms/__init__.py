from app.services.forms.calculus import (
    ProjectivityCertificate,
    contract,
    coordinate_field,
    dbar,
    eta_field,
    euler_field,
    extract,
    is_projective,
    nabla_eta,
    omega,
    theta,
    top_form,
    w_minus_z_field,
)
from app.services.forms.evaluation import CompiledForm, eval_form
from app.services.forms.expr import GEN_FAMILIES, FormExpr, VectorFieldExpr, gen_id

__all__ = [
    "GEN_FAMILIES",
    "CompiledForm",
    "FormExpr",
    "ProjectivityCertificate",
    "VectorFieldExpr",
    "contract",
    "coordinate_field",
    "dbar",
    "eta_field",
    "euler_field",
    "eval_form",
    "extract",
    "gen_id",
    "is_projective",
    "nabla_eta",
    "omega",
    "theta",
    "top_form",
    "w_minus_z_field",
]
