"""
Sheeted sampling of plane curves over the base charts.
"""

from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from app.core.config import settings
from app.core.errors import ContinuationBreakError
from app.core.logger import get_logger
from app.models.scenario import GridSpec
from app.services.curves.plane_curve import (
    PlaneCurve,
    newton_polish,
    polynomial_roots,
    projective_normalize,
)
from app.utils.numerics import polar_rule

logger = get_logger(__name__)

MAX_BISECTIONS = 24


@dataclass(frozen=True)
class CurveSample:
    chart: int
    base: complex
    sheet: int
    zeta: np.ndarray
    fiber_derivative: Optional[complex]
    tangent: np.ndarray
    residual: float

    @property
    def normalized(self) -> np.ndarray:
        return projective_normalize(self.zeta)


@dataclass(frozen=True, eq=False)
class ChartSamples:
    """
    Vectorized samples over base nodes of one chart.

    Arrays are indexed (node, sheet); ``tangent`` is dζ/d(chart coordinate)
    along X, ``zeta`` the chart representative ([1:t:x] or [s:1:x]).
    """

    chart: int
    base: np.ndarray
    zeta: np.ndarray
    tangent: np.ndarray
    residual: np.ndarray
    fiber_derivative: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None
    labels: Optional[np.ndarray] = None
    skipped: tuple[complex, ...] = ()
    breaks: tuple[dict[str, Any], ...] = field(default_factory=tuple)

    @property
    def nodes(self) -> int:
        return int(self.base.shape[0])

    @property
    def sheets(self) -> int:
        return int(self.zeta.shape[1])

    def samples(
        self,
    ) -> list[CurveSample]:
        out = []
        for i in range(self.nodes):
            for k in range(self.sheets):
                out.append(
                    CurveSample(
                        chart=self.chart,
                        base=complex(self.base[i]),
                        sheet=int(self.labels[i, k]) if self.labels is not None else k,
                        zeta=self.zeta[i, k],
                        fiber_derivative=(
                            complex(self.fiber_derivative[i, k]) if self.fiber_derivative is not None else None
                        ),
                        tangent=self.tangent[i, k],
                        residual=float(self.residual[i, k]),
                    )
                )
        return out

    def rows(
        self,
    ) -> list[dict[str, Any]]:
        """Flat records for CSV export."""
        rows = []
        for sample in self.samples():
            point = sample.normalized
            row = {
                "chart": sample.chart,
                "base_re": sample.base.real,
                "base_im": sample.base.imag,
                "sheet": sample.sheet,
                "residual": sample.residual,
            }
            for j, value in enumerate(point):
                row[f"zeta{j}_re"] = value.real
                row[f"zeta{j}_im"] = value.imag
            rows.append(row)
        return rows


# --------------------------------------------------------------- fibers


def fiber_roots(
    curve: PlaneCurve,
    chart: int,
    base: np.ndarray,
    tolerance: float = settings.NEWTON_TOLERANCE,
    max_iter: int = settings.NEWTON_MAX_ITER,
) -> np.ndarray:
    """Polished fiber roots over base nodes (...,), shape (..., sheets)."""
    coeffs = curve.fiber_coefficients(chart, base)
    with np.errstate(divide="ignore", invalid="ignore"):
        roots = polynomial_roots(coeffs)
        return newton_polish(coeffs, roots, tolerance=tolerance, max_iter=max_iter)


def sample_points(
    curve: PlaneCurve,
    chart: int,
    base: np.ndarray,
    weights: Optional[np.ndarray] = None,
    tolerance: float = settings.NEWTON_TOLERANCE,
) -> ChartSamples:
    """
    Every fiber point over the given base nodes, with tangents along X.

    Sheet order is the root order of each node; use ``chart_sample`` for
    continuation-consistent labels.
    """
    base = np.asarray(base, dtype=complex).reshape(-1)
    roots = fiber_roots(curve, chart, base, tolerance=tolerance)
    zeta = curve.representative(chart, base[:, None], roots)
    grad = curve.gradient(zeta)
    fc = grad[..., curve.fiber_variable]
    a, b = curve.base_variables
    moving = b if chart == 0 else a
    tangent = np.zeros_like(zeta)
    tangent[..., moving] = 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        tangent[..., curve.fiber_variable] = -grad[..., moving] / fc
    unit = zeta / np.linalg.norm(zeta, axis=-1, keepdims=True)
    residual = np.abs(curve.evaluate(unit)) / curve.coefficient_norm
    return ChartSamples(
        chart=chart,
        base=base,
        zeta=zeta,
        tangent=tangent,
        residual=residual,
        fiber_derivative=fc,
        weights=None if weights is None else np.asarray(weights, dtype=float).reshape(-1),
    )


def near_branch(
    curve: PlaneCurve,
    chart: int,
    base: np.ndarray,
    radius: float,
) -> np.ndarray:
    """Mask of base nodes within ``radius`` of a branch point of the chart."""
    base = np.asarray(base, dtype=complex)
    branch = curve.branch_points[chart]
    if branch.size == 0:
        return np.zeros(base.shape, dtype=bool)
    return np.min(np.abs(base[..., None] - branch), axis=-1) < radius


# ----------------------------------------------------------- continuation


def _match(
    previous: np.ndarray,
    current: np.ndarray,
) -> tuple[np.ndarray, float, float]:
    """Assignment of current roots to previous ones; returns (order, max shift, min gap)."""
    cost = np.abs(previous[:, None] - current[None, :])
    rows, cols = linear_sum_assignment(cost)
    order = cols[np.argsort(rows)]
    shift = float(cost[np.arange(len(previous)), order].max()) if len(previous) else 0.0
    if len(current) > 1:
        gaps = np.abs(current[:, None] - current[None, :])
        gap = float(gaps[~np.eye(len(current), dtype=bool)].min())
    else:
        gap = np.inf
    return order, shift, gap


class SheetTracker:
    """
    Continues fiber roots along base paths by bisecting steps until the root
    motion is small against the root separation.
    """

    def __init__(
        self,
        curve: PlaneCurve,
        chart: int,
        match_tolerance: float = settings.SHEET_MATCH_TOLERANCE,
        strict: bool = True,
    ):
        self.curve = curve
        self.chart = chart
        self.match_tolerance = match_tolerance
        self.strict = strict
        self.breaks: list[dict[str, Any]] = []

    def _roots(
        self,
        t: complex,
    ) -> np.ndarray:
        return fiber_roots(self.curve, self.chart, np.array([t]))[0]

    def _break(
        self,
        t0: complex,
        t1: complex,
        gap: float,
    ) -> None:
        record = {"chart": self.chart, "from": [t0.real, t0.imag], "to": [t1.real, t1.imag], "gap": gap}
        self.breaks.append(record)
        logger.debug(f"Sheet continuation break | chart={self.chart} | from={t0} | to={t1} | gap={gap:.3e}")
        if self.strict:
            raise ContinuationBreakError(f"between {t0} and {t1}")

    def step(
        self,
        t0: complex,
        roots0: np.ndarray,
        t1: complex,
        depth: int = 0,
    ) -> np.ndarray:
        """Roots at t1 ordered like ``roots0`` at t0."""
        current = self._roots(t1)
        order, shift, gap = _match(roots0, current)
        if not np.isfinite(gap) or shift <= self.match_tolerance * gap:
            return current[order]
        if gap == 0.0 or depth >= MAX_BISECTIONS:
            self._break(t0, t1, gap)
            return current[order]
        mid = 0.5 * (t0 + t1)
        roots_mid = self.step(t0, roots0, mid, depth + 1)
        return self.step(mid, roots_mid, t1, depth + 1)

    def follow(
        self,
        path: Sequence[complex],
        start: Optional[np.ndarray] = None,
    ) -> np.ndarray:
        """Root table (len(path), sheets) continued along the path."""
        path = [complex(t) for t in path]
        roots = self._roots(path[0]) if start is None else np.asarray(start, dtype=complex)
        if start is None:
            roots = roots[np.lexsort((roots.imag, roots.real))]
        table = [roots]
        for t0, t1 in zip(path, path[1:]):
            roots = self.step(t0, roots, t1)
            table.append(roots)
        return np.array(table)


def track_sheets(
    curve: PlaneCurve,
    chart: int,
    path: Sequence[complex],
    strict: bool = True,
) -> tuple[np.ndarray, Optional[np.ndarray]]:
    """
    Continue the fiber over a base path.

    Returns:
        (root table, permutation) where for a closed path ``permutation[i]``
        is the starting sheet on which sheet i ends; None for open paths

    Raises:
        ContinuationBreakError: roots collide on the path (strict mode)
    """
    tracker = SheetTracker(curve, chart, strict=strict)
    table = tracker.follow(path)
    if abs(complex(path[0]) - complex(path[-1])) > 1e-14:
        return table, None
    order, _, _ = _match(table[-1], table[0])
    return table, order


def chart_sample(
    curve: PlaneCurve,
    grid: Optional[GridSpec] = None,
    strict: bool = False,
) -> list[ChartSamples]:
    """
    Sample both base charts on polar grids with continuation-consistent sheet
    labels: roots are continued around the innermost ring of nodes, then
    outward along every ray.

    Nodes within the exclusion radius of a branch point are skipped and
    reported.

    Raises:
        ContinuationBreakError: sheet tracking fails on a path (strict mode)
    """
    grid = grid or GridSpec()
    out = []
    for chart in (0, 1):
        radius = curve.chart_radius(chart)
        rule = polar_rule(grid.nodes_radial, grid.nodes_angular, 0.0, radius)
        n_r, n_theta = rule.nodes.shape
        nodes = rule.nodes.reshape(-1)
        weights = rule.weights.reshape(-1)
        skip = near_branch(curve, chart, nodes, grid.exclusion_radius)
        if skip.any():
            logger.warning(f"Near-discriminant nodes skipped | chart={chart} | count={int(skip.sum())}")

        tracker = SheetTracker(curve, chart, strict=strict)
        ordered: dict[int, np.ndarray] = {}
        ring = [j for j in range(n_theta) if not skip[j]]
        if ring:
            loop = tracker.follow([complex(nodes[j]) for j in ring])
            for j, roots in zip(ring, loop):
                ordered[j] = roots
        for j in ring:
            previous_t, previous = complex(nodes[j]), ordered[j]
            for i in range(1, n_r):
                idx = i * n_theta + j
                if skip[idx]:
                    continue
                t = complex(nodes[idx])
                roots = tracker.step(previous_t, previous, t)
                ordered[idx] = roots
                previous_t, previous = t, roots

        keep = np.array(sorted(ordered), dtype=int)
        samples = sample_points(curve, chart, nodes[keep], weights=weights[keep])
        if len(keep):
            continued = np.array([ordered[i] for i in keep])
            polished = samples.zeta[..., curve.fiber_variable]
            order = np.argmin(np.abs(polished[:, None, :] - continued[:, :, None]), axis=-1)
        else:
            order = np.zeros((0, curve.sheets), dtype=int)
        take = np.arange(len(keep))[:, None]
        out.append(
            ChartSamples(
                chart=chart,
                base=samples.base,
                zeta=samples.zeta[take, order],
                tangent=samples.tangent[take, order],
                residual=samples.residual[take, order],
                fiber_derivative=samples.fiber_derivative[take, order],
                weights=samples.weights,
                labels=np.tile(np.arange(curve.sheets), (len(keep), 1)),
                skipped=tuple(complex(t) for t in nodes[skip]),
                breaks=tuple(tracker.breaks),
            )
        )
        logger.info(
            f"Chart sampled | chart={chart} | nodes={len(keep)} | sheets={curve.sheets} | "
            f"skipped={int(skip.sum())} | breaks={len(tracker.breaks)}"
        )
    return out
