from app.utils.numerics.calculus import convergence_slope, wirtinger_d, wirtinger_dbar
from app.utils.numerics.quadrature import (
    BallRule,
    PolarRule,
    ball_rule,
    dyadic_ball_rules,
    dyadic_polar_rules,
    gauss_legendre,
    polar_rule,
    trapezoid_angles,
)
from app.utils.numerics.windows import bump

__all__ = [
    "BallRule",
    "PolarRule",
    "ball_rule",
    "dyadic_ball_rules",
    "bump",
    "convergence_slope",
    "dyadic_polar_rules",
    "gauss_legendre",
    "polar_rule",
    "trapezoid_angles",
    "wirtinger_d",
    "wirtinger_dbar",
]
