"""
Smooth cut-off windows.
"""

import numpy as np


def _smooth_step(
    x: np.ndarray,
) -> np.ndarray:
    """C^∞ step: 0 for x ≤ 0, 1 for x ≥ 1."""
    x = np.clip(x, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return a / (a + b)


def bump(
    distance: np.ndarray,
    support: float,
    plateau: float,
) -> np.ndarray:
    """
    Radial window equal to 1 for distance ≤ plateau·support and 0 beyond support.
    """
    inner = plateau * support
    x = (support - np.asarray(distance, dtype=float)) / (support - inner)
    return _smooth_step(x)
