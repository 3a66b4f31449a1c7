"""
Pullback of ambient ζ-forms to base-chart coordinates along X.
"""

from typing import Mapping, Optional, Union

import numpy as np

from app.core.config import settings
from app.core.errors import FiberDerivativeVanishesError
from app.services.curves.sampling import ChartSamples
from app.services.forms import CompiledForm, FormExpr
from app.services.forms.expr import GEN_FAMILIES, Key, gen_family

Multivector = Mapping[Key, np.ndarray]

SLOTS = ("scalar", "dt", "dtbar", "dt_dtbar")


def _check_tangent(
    samples: ChartSamples,
) -> None:
    if samples.fiber_derivative is None:
        return
    fc = np.abs(samples.fiber_derivative)
    scale = np.abs(samples.zeta).max(axis=-1) ** 2
    if np.any(~np.isfinite(samples.tangent)) or np.any(fc <= settings.EVAL_POLE_FLOOR * scale):
        raise FiberDerivativeVanishesError(f"chart {samples.chart}")


def pullback(
    samples: ChartSamples,
    form: Union[FormExpr, Multivector],
    z: Optional[np.ndarray] = None,
) -> dict[str, np.ndarray]:
    """
    Coefficients of 1, dt, dt̄ and dt∧dt̄ of the restricted form at every sample.

    Args:
        samples: Chart samples carrying tangents dζ/dt
        form: ζ-form (FormExpr, or coefficients already evaluated per key, shape (node, sheet))
        z: Optional z point(s) broadcast against the samples

    Raises:
        FiberDerivativeVanishesError: ∂f/∂ζ_c vanishes at a sample
        ValueError: the form carries dz̄ or dw differentials
    """
    _check_tangent(samples)
    if isinstance(form, FormExpr):
        universe = form.universe
        values = universe.values(zeta=samples.zeta, z=z)
        coeffs = CompiledForm(form)(values)
    else:
        universe = None
        coeffs = form

    shape = samples.zeta.shape[:-1]
    out = {slot: np.zeros(shape, dtype=complex) for slot in SLOTS}
    jac = samples.tangent
    size = jac.shape[-1]
    for key, value in coeffs.items():
        holo, anti = [], []
        for g in key:
            family, j = gen_family(universe, g) if universe is not None else (GEN_FAMILIES[g // size], g % size)
            if family == "dzeta":
                holo.append(j)
            elif family == "dzetabar":
                anti.append(j)
            else:
                raise ValueError(f"pullback of a {family} differential along X")
        if len(holo) > 1 or len(anti) > 1:
            continue
        factor = np.ones(shape, dtype=complex)
        for j in holo:
            factor = factor * jac[..., j]
        for j in anti:
            factor = factor * np.conj(jac[..., j])
        slot = SLOTS[len(holo) + 2 * len(anti)]
        out[slot] = out[slot] + value * factor
    return out


def area_factor() -> complex:
    """dt∧dt̄ = −2i dA."""
    return -2j
