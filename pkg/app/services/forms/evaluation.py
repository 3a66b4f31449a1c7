"""
Numeric evaluation of forms on batches of points.
"""

import numpy as np

from app.core.config import settings
from app.services.algebra.numeric import compile_rational
from app.services.forms.expr import FormExpr, Key


class CompiledForm:
    """Per-component compiled coefficients of a fixed form."""

    def __init__(
        self,
        form: FormExpr,
    ):
        self.form = form
        self.components = {key: compile_rational(value) for key, value in form.terms.items()}

    def __call__(
        self,
        values: np.ndarray,
        pole_floor: float = settings.EVAL_POLE_FLOOR,
        check_poles: bool = True,
    ) -> dict[Key, np.ndarray]:
        return {
            key: fn(values, pole_floor=pole_floor, check_poles=check_poles)
            for key, fn in self.components.items()
        }


def eval_form(
    form: FormExpr,
    zeta=None,
    z=None,
    w=None,
    t=None,
    pole_floor: float = settings.EVAL_POLE_FLOOR,
) -> dict[Key, np.ndarray]:
    """
    Evaluate every coefficient of ``form`` at the given coordinates.

    Raises:
        PoleEvaluationError: a denominator is below the relative floor
    """
    values = form.universe.values(zeta=zeta, z=z, w=w, t=t)
    return CompiledForm(form)(values, pole_floor=pole_floor)
