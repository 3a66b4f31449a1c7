"""
Rational parametrizations t ↦ [P⁰(t) : … : P^N(t)] of curves.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from sympy.polys.rings import PolyElement

from app.core.logger import get_logger
from app.models.scenario import GridSpec
from app.services.algebra.numeric import CompiledPoly
from app.services.algebra.operations import family_support, homogeneity, substitute
from app.services.algebra.universe import Universe, get_universe
from app.services.curves.sampling import ChartSamples
from app.services.hefer.scalar import cusp_polynomial
from app.utils.numerics import polar_rule

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class RationalParam:
    universe: Universe
    components: tuple[PolyElement, ...]
    degree: int
    f: Optional[PolyElement] = None

    @cached_property
    def _compiled(
        self,
    ) -> tuple[list[CompiledPoly], list[list[CompiledPoly]]]:
        u = self.universe
        values = [CompiledPoly(p) for p in self.components]
        derivs = [[CompiledPoly(p.diff(u.gen("t", k))) for p in self.components] for k in range(2)]
        return values, derivs

    def _params(
        self,
        chart: int,
        u: np.ndarray,
    ) -> np.ndarray:
        u = np.asarray(u, dtype=complex)
        t = np.stack([np.ones_like(u), u], axis=-1) if chart == 0 else np.stack([u, np.ones_like(u)], axis=-1)
        return self.universe.values(t=t)

    def evaluate(
        self,
        chart: int,
        u: np.ndarray,
    ) -> np.ndarray:
        """Points (..., N+1) at (1, u) for chart 0 and (u, 1) for chart 1."""
        values = self._params(chart, u)
        return np.stack([p(values) for p in self._compiled[0]], axis=-1)

    def derivative(
        self,
        chart: int,
        u: np.ndarray,
    ) -> np.ndarray:
        """d/du of ``evaluate``: ∂P/∂t1 on chart 0, ∂P/∂t0 on chart 1."""
        values = self._params(chart, u)
        derivs = self._compiled[1][1 if chart == 0 else 0]
        return np.stack([p(values) for p in derivs], axis=-1)

    def composed(
        self,
    ):
        """f∘P as an exact rational function (zero when the image lies on X)."""
        u = self.universe
        bindings = {u.index("zeta", j): p for j, p in enumerate(self.components)}
        return substitute(self.f, bindings, u)


def rational_param_new(
    components: Sequence[PolyElement],
    universe: Universe,
    f: Optional[PolyElement] = None,
) -> RationalParam:
    """
    Validate a parametrization by homogeneous polynomials in (t0, t1).

    Raises:
        ValueError: components not homogeneous of a common degree, or f∘P ≠ 0
    """
    if len(components) != universe.size:
        raise ValueError(f"need {universe.size} components, got {len(components)}")
    degrees = set()
    for p in components:
        if p and family_support(p, universe) - {"t"}:
            raise ValueError("parametrization components may only use t0, t1")
        degrees.add(homogeneity(p, "t", universe) if p else None)
    degrees.discard(None)
    if len(degrees) != 1 or not isinstance(next(iter(degrees)), int):
        raise ValueError("components must be homogeneous of one common degree")
    param = RationalParam(universe, tuple(components), degrees.pop(), f)
    if f is not None and not param.composed().is_zero():
        raise ValueError("f∘P is not identically zero")
    logger.debug(f"Rational parametrization ready | degree={param.degree} | checked={f is not None}")
    return param


def cusp_parametrization() -> RationalParam:
    """[t0³ : t1²t0 : t1³] onto ζ1³ − ζ2²ζ0 = 0."""
    u = get_universe(2)
    t0, t1 = u.gen("t", 0), u.gen("t", 1)
    return rational_param_new((t0**3, t1**2 * t0, t1**3), u, cusp_polynomial(u))


def rational_param_sample(
    param: RationalParam,
    grid: Optional[GridSpec] = None,
) -> list[ChartSamples]:
    """Images of polar grids on the unit disks of both P¹ charts (one sheet)."""
    grid = grid or GridSpec()
    out = []
    for chart in (0, 1):
        rule = polar_rule(grid.nodes_radial, grid.nodes_angular)
        base = rule.nodes.reshape(-1)
        zeta = param.evaluate(chart, base)[:, None, :]
        tangent = param.derivative(chart, base)[:, None, :]
        out.append(
            ChartSamples(
                chart=chart,
                base=base,
                zeta=zeta,
                tangent=tangent,
                residual=np.zeros((base.size, 1)),
                weights=rule.weights.reshape(-1),
                labels=np.zeros((base.size, 1), dtype=int),
            )
        )
    return out
