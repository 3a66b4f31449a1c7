"""
Polar quadrature rules on disks and annuli.
"""

from dataclasses import dataclass

import numpy as np


def gauss_legendre(
    n: int,
    a: float = 0.0,
    b: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Gauss–Legendre nodes and weights on [a, b]."""
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def trapezoid_angles(
    n: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Periodic trapezoid rule on [0, 2π)."""
    theta = 2.0 * np.pi * np.arange(n) / n
    return theta, np.full(n, 2.0 * np.pi / n)


@dataclass(frozen=True)
class PolarRule:
    """Nodes ``center + r e^{iθ}`` with area weights (r dr dθ), shape (n_r, n_θ)."""

    center: complex
    radii: np.ndarray
    angles: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return int(self.nodes.size)


def polar_rule(
    n_radial: int,
    n_angular: int,
    r_in: float = 0.0,
    r_out: float = 1.0,
    center: complex = 0.0,
) -> PolarRule:
    """Gauss–Legendre in r on [r_in, r_out] times the periodic trapezoid in θ."""
    r, wr = gauss_legendre(n_radial, r_in, r_out)
    theta, wt = trapezoid_angles(n_angular)
    nodes = center + r[:, None] * np.exp(1j * theta)[None, :]
    weights = (r * wr)[:, None] * wt[None, :]
    return PolarRule(complex(center), r, theta, nodes, weights)


def dyadic_polar_rules(
    center: complex,
    inner: float,
    outer: float,
    levels: int,
    n_radial: int,
    n_angular: int,
) -> list[PolarRule]:
    """
    Annuli [outer/2^{k+1}, outer/2^k] for k < levels, then a last annulus down to
    ``inner`` (which may be 0).
    """
    rules = []
    hi = outer
    for _ in range(levels):
        lo = max(hi / 2.0, inner)
        if lo >= hi:
            break
        rules.append(polar_rule(n_radial, n_angular, lo, hi, center))
        hi = lo
    if hi > inner:
        rules.append(polar_rule(n_radial, n_angular, inner, hi, center))
    return rules


@dataclass(frozen=True)
class BallRule:
    """Nodes in C² (shape (M, 2)) with volume weights."""

    center: tuple[complex, complex]
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return int(self.weights.size)


def ball_rule(
    n_radial: int,
    n_angular: int,
    r_in: float = 0.0,
    r_out: float = 1.0,
    center: tuple[complex, complex] = (0.0, 0.0),
) -> BallRule:
    """
    Shell r_in ≤ |t − center| ≤ r_out in C² in Hopf coordinates
    t = center + r (cos η e^{iθ1}, sin η e^{iθ2}), dV = r³ sin η cos η dr dη dθ1 dθ2.
    """
    r, wr = gauss_legendre(n_radial, r_in, r_out)
    eta, we = gauss_legendre(max(n_angular // 2, 2), 0.0, 0.5 * np.pi)
    theta, wt = trapezoid_angles(n_angular)
    R, E, T1, T2 = np.meshgrid(r, eta, theta, theta, indexing="ij")
    nodes = np.stack(
        [
            center[0] + R * np.cos(E) * np.exp(1j * T1),
            center[1] + R * np.sin(E) * np.exp(1j * T2),
        ],
        axis=-1,
    ).reshape(-1, 2)
    weights = (
        (r**3 * wr)[:, None, None, None]
        * (np.sin(eta) * np.cos(eta) * we)[None, :, None, None]
        * wt[None, None, :, None]
        * wt[None, None, None, :]
    ).reshape(-1)
    return BallRule((complex(center[0]), complex(center[1])), nodes, weights)


def dyadic_ball_rules(
    center: tuple[complex, complex],
    inner: float,
    outer: float,
    levels: int,
    n_radial: int,
    n_angular: int,
) -> list[BallRule]:
    """Dyadic shells as in ``dyadic_polar_rules``, in C²."""
    rules = []
    hi = outer
    for _ in range(levels):
        lo = max(hi / 2.0, inner)
        if lo >= hi:
            break
        rules.append(ball_rule(n_radial, n_angular, lo, hi, center))
        hi = lo
    if hi > inner:
        rules.append(ball_rule(n_radial, n_angular, inner, hi, center))
    return rules
