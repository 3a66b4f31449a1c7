from app.services.operators.conventions import (
    ConventionsLedger,
    SignRecord,
    load_ledger,
    record_sign,
    stored_signs,
)
from app.services.operators.curve_solver import (
    CalibrationRecord,
    CurveOperators,
    CurveSolution,
    ExtensionResult,
    curve_convergence,
    curve_signs,
    curve_targets,
    extend_section,
    extension_difference,
    koppelman_selftest,
    solve_dbar_curve,
)
from app.services.operators.integrate import quad_integrate
from app.services.operators.pn import (
    PnSolution,
    ProjectiveQuadrature,
    TopFormDensity,
    default_weight,
    pn_convergence,
    pn_obstruction,
    pn_sign,
    pn_signs,
    pn_solve,
)
from app.services.operators.quadrature import (
    CurveQuadrature,
    CurveTarget,
    QuadResult,
    curve_target,
    follow_target,
    target_on_sheet,
)
from app.services.operators.sections import (
    SectionRep,
    antiholomorphic_section,
    dbar_section,
    dual_monomials,
    holomorphic_top_forms,
    manufactured_section,
    mixed_section,
    monomial_exponents,
    numeric_section,
    pn_dual_form,
    polynomial_section,
    section_rep_new,
    smooth_section,
)

__all__ = [
    "CalibrationRecord",
    "ConventionsLedger",
    "CurveOperators",
    "CurveQuadrature",
    "CurveSolution",
    "CurveTarget",
    "ExtensionResult",
    "PnSolution",
    "ProjectiveQuadrature",
    "QuadResult",
    "SectionRep",
    "SignRecord",
    "TopFormDensity",
    "antiholomorphic_section",
    "curve_convergence",
    "curve_signs",
    "curve_target",
    "curve_targets",
    "dbar_section",
    "default_weight",
    "dual_monomials",
    "extend_section",
    "extension_difference",
    "follow_target",
    "holomorphic_top_forms",
    "koppelman_selftest",
    "load_ledger",
    "manufactured_section",
    "mixed_section",
    "monomial_exponents",
    "numeric_section",
    "pn_dual_form",
    "pn_convergence",
    "pn_obstruction",
    "pn_sign",
    "pn_signs",
    "pn_solve",
    "polynomial_section",
    "quad_integrate",
    "record_sign",
    "section_rep_new",
    "smooth_section",
    "solve_dbar_curve",
    "stored_signs",
    "target_on_sheet",
]
