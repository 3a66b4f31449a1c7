"""
Finite-difference Wirtinger derivatives and convergence fits.
"""

from typing import Callable, Sequence

import numpy as np

Fn = Callable[[np.ndarray], np.ndarray]


def _directional(
    fn: Fn,
    t: np.ndarray,
    direction: complex,
    h: float,
) -> np.ndarray:
    """Fourth-order central 5-point stencil along ``direction``."""
    step = direction * h
    return (-fn(t + 2 * step) + 8 * fn(t + step) - 8 * fn(t - step) + fn(t - 2 * step)) / (12.0 * h)


def wirtinger_dbar(
    fn: Fn,
    t: np.ndarray,
    h: float,
) -> np.ndarray:
    """∂/∂t̄ = (∂_x + i∂_y)/2."""
    t = np.asarray(t, dtype=complex)
    return 0.5 * (_directional(fn, t, 1.0, h) + 1j * _directional(fn, t, 1j, h))


def wirtinger_d(
    fn: Fn,
    t: np.ndarray,
    h: float,
) -> np.ndarray:
    """∂/∂t = (∂_x − i∂_y)/2."""
    t = np.asarray(t, dtype=complex)
    return 0.5 * (_directional(fn, t, 1.0, h) - 1j * _directional(fn, t, 1j, h))


def convergence_slope(
    resolutions: Sequence[float],
    errors: Sequence[float],
) -> float:
    """
    Observed order of convergence: minus the least-squares slope of log(error)
    against log(resolution), so errors halving with every doubling give 1.

    Zero errors are floored at the smallest positive double so the fit stays finite.

    Raises:
        ValueError: fewer than two resolutions
    """
    x = np.log(np.asarray(resolutions, dtype=float))
    y = np.log(np.maximum(np.asarray(errors, dtype=float), np.finfo(float).tiny))
    if len(x) < 2:
        raise ValueError("a slope needs at least two resolutions")
    slope, _ = np.polyfit(x, y, 1)
    return float(-slope)
