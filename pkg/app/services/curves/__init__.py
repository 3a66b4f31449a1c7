from app.services.curves.parametrization import (
    RationalParam,
    cusp_parametrization,
    rational_param_new,
    rational_param_sample,
)
from app.services.curves.plane_curve import (
    PlaneCurve,
    fermat_curve,
    horner,
    newton_polish,
    plane_curve_new,
    polynomial_roots,
    projective_normalize,
)
from app.services.curves.pullback import area_factor, pullback
from app.services.curves.sampling import (
    ChartSamples,
    CurveSample,
    SheetTracker,
    chart_sample,
    fiber_roots,
    near_branch,
    sample_points,
    track_sheets,
)

__all__ = [
    "ChartSamples",
    "CurveSample",
    "PlaneCurve",
    "RationalParam",
    "SheetTracker",
    "area_factor",
    "chart_sample",
    "cusp_parametrization",
    "fermat_curve",
    "fiber_roots",
    "horner",
    "near_branch",
    "newton_polish",
    "plane_curve_new",
    "polynomial_roots",
    "projective_normalize",
    "pullback",
    "rational_param_new",
    "rational_param_sample",
    "sample_points",
    "track_sheets",
]
