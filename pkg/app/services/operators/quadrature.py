"""
Quadrature over a plane curve X, sheet by sheet over the two base charts.

Each chart disk carries the polar grid of the GridSpec. Smooth windows cut
out the base point of the target z and every branch point of the fiber
projection; the windowed pieces are integrated on dyadic polar patches
centred at those points. Branch patches stop at the exclusion radius and
add a model of the excluded disk fitted on three rings.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Optional

import numpy as np

from app.core.config import settings
from app.core.errors import NearDiscriminantError, TargetNearDiscriminantError
from app.core.logger import get_logger
from app.models.scenario import GridSpec
from app.services.curves import ChartSamples, PlaneCurve, fiber_roots, sample_points
from app.utils.numerics import bump, dyadic_polar_rules, polar_rule, trapezoid_angles

logger = get_logger(__name__)

Density = Callable[["QuadBlock"], np.ndarray]

BRANCH_SEPARATION = 0.45
EDGE_MARGIN = 0.95
MIN_BRANCH_RADIUS = 4.0


@dataclass(frozen=True, eq=False)
class QuadBlock:
    """Samples of one rule piece; ``samples.weights`` already include the window."""

    kind: str
    chart: int
    samples: ChartSamples
    center: Optional[complex] = None
    radius: Optional[float] = None
    cache: dict = field(default_factory=dict, repr=False)

    def cached(
        self,
        key: Any,
        compute: Callable[[], Any],
    ) -> Any:
        if key not in self.cache:
            self.cache[key] = compute()
        return self.cache[key]

    def total(
        self,
        density: np.ndarray,
    ) -> complex:
        """Σ_nodes w Σ_sheets density, summed in node order."""
        weights = self.samples.weights
        with np.errstate(invalid="ignore"):
            per_node = np.where(weights[:, None] == 0.0, 0.0, density).sum(axis=1)
        return complex(np.dot(weights, per_node))


@dataclass(frozen=True, eq=False)
class BranchPatch:
    chart: int
    point: complex
    radius: float
    annuli: tuple[QuadBlock, ...]
    rings: tuple[QuadBlock, ...]


@dataclass(frozen=True)
class CurveTarget:
    """A point z of X with its chart coordinates."""

    chart: int
    base: complex
    fiber: complex
    zeta: np.ndarray

    def to_dict(
        self,
    ) -> dict[str, Any]:
        return {
            "chart": self.chart,
            "base": [self.base.real, self.base.imag],
            "fiber": [self.fiber.real, self.fiber.imag],
        }


@dataclass
class QuadResult:
    value: complex
    exclusion: complex = 0j
    exclusion_error: float = 0.0

    def __add__(
        self,
        other: "QuadResult",
    ) -> "QuadResult":
        return QuadResult(
            self.value + other.value,
            self.exclusion + other.exclusion,
            self.exclusion_error + other.exclusion_error,
        )


def curve_target(
    curve: PlaneCurve,
    zeta: np.ndarray,
) -> CurveTarget:
    """Locate z in the chart where its base point sits furthest inside the disk."""
    zeta = np.asarray(zeta, dtype=complex)
    a, b = curve.base_variables
    margins = []
    for chart in (0, 1):
        denominator = zeta[a] if chart == 0 else zeta[b]
        if abs(denominator) == 0.0:
            margins.append(-np.inf)
            continue
        base = curve.base_of(zeta, chart)
        margins.append(curve.chart_radius(chart) - abs(base))
    chart = int(np.argmax(margins))
    scale = zeta[a] if chart == 0 else zeta[b]
    base = complex(curve.base_of(zeta, chart))
    fiber = complex(zeta[curve.fiber_variable] / scale)
    return CurveTarget(chart, base, fiber, curve.representative(chart, base, fiber))


def target_on_sheet(
    curve: PlaneCurve,
    base: complex,
    sheet: int = 0,
    chart: int = 0,
) -> CurveTarget:
    """Target over a base point, on the sheet of the given rank in (Re, Im) order."""
    roots = fiber_roots(curve, chart, np.array([complex(base)]))[0]
    roots = roots[np.lexsort((roots.imag, roots.real))]
    fiber = complex(roots[sheet % len(roots)])
    return CurveTarget(chart, complex(base), fiber, curve.representative(chart, complex(base), fiber))


def follow_target(
    curve: PlaneCurve,
    target: CurveTarget,
    base: complex,
) -> CurveTarget:
    """The point over ``base`` on the sheet nearest to ``target``."""
    roots = fiber_roots(curve, target.chart, np.array([complex(base)]))[0]
    fiber = complex(roots[np.argmin(np.abs(roots - target.fiber))])
    return CurveTarget(target.chart, complex(base), fiber, curve.representative(target.chart, complex(base), fiber))


class CurveQuadrature:
    """
    Quadrature rules on X for one grid.

    Rule pieces are built lazily and cached; target patches are rebuilt per
    target. Every density is a callable on a ``QuadBlock`` returning values of
    shape (node, sheet) per unit area (dt∧dt̄ = −2i dA already applied).
    """

    def __init__(
        self,
        curve: PlaneCurve,
        grid: Optional[GridSpec] = None,
        target_window: Optional[float] = None,
        branch_window: Optional[float] = None,
        plateau: Optional[float] = None,
        branch_plateau: Optional[float] = None,
    ):
        self.curve = curve
        self.grid = grid or GridSpec()
        self.target_window = target_window or settings.TARGET_WINDOW_RADIUS
        self.branch_window = branch_window or settings.BRANCH_WINDOW_RADIUS
        self.plateau = plateau if plateau is not None else settings.WINDOW_PLATEAU
        self.branch_plateau = branch_plateau if branch_plateau is not None else settings.BRANCH_WINDOW_PLATEAU
        self.patch_angular = settings.POLAR_BASE_ANGULAR * self.grid.polar_oversampling

    # ----------------------------------------------------------- geometry

    def branch_points(
        self,
        chart: int,
    ) -> np.ndarray:
        points = np.asarray(self.curve.branch_points.get(chart, np.zeros(0)), dtype=complex)
        return points[np.abs(points) < self.curve.chart_radius(chart)]

    @cached_property
    def branch_radii(
        self,
    ) -> dict[int, np.ndarray]:
        """
        Window radius per branch point: windows stay disjoint and inside the disk.

        Raises:
            NearDiscriminantError: a branch point leaves no room for its patch
        """
        out = {}
        r_excl = self.grid.exclusion_radius
        for chart in (0, 1):
            points = self.branch_points(chart)
            radii = np.full(points.shape, self.branch_window)
            for i, point in enumerate(points):
                others = np.delete(points, i)
                if others.size:
                    radii[i] = min(radii[i], BRANCH_SEPARATION * float(np.min(np.abs(others - point))))
                radii[i] = min(radii[i], EDGE_MARGIN * (self.curve.chart_radius(chart) - abs(point)))
                if radii[i] <= MIN_BRANCH_RADIUS * r_excl:
                    raise NearDiscriminantError(f"branch point {point} in chart {chart} leaves radius {radii[i]:.2e}")
            out[chart] = radii
        return out

    def _branch_window(
        self,
        chart: int,
        base: np.ndarray,
    ) -> np.ndarray:
        total = np.zeros(base.shape, dtype=float)
        for point, radius in zip(self.branch_points(chart), self.branch_radii[chart]):
            total = total + bump(np.abs(base - point), radius, self.branch_plateau)
        return total

    def _block(
        self,
        kind: str,
        chart: int,
        nodes: np.ndarray,
        weights: np.ndarray,
        center: Optional[complex] = None,
        radius: Optional[float] = None,
    ) -> QuadBlock:
        keep = weights != 0.0
        samples = sample_points(self.curve, chart, nodes[keep], weights=weights[keep])
        return QuadBlock(kind, chart, samples, center, radius)

    # -------------------------------------------------------------- rules

    @cached_property
    def grid_blocks(
        self,
    ) -> tuple[QuadBlock, QuadBlock]:
        blocks = []
        for chart in (0, 1):
            rule = polar_rule(
                self.grid.nodes_radial,
                self.grid.nodes_angular,
                0.0,
                self.curve.chart_radius(chart),
            )
            nodes = rule.nodes.reshape(-1)
            weights = rule.weights.reshape(-1) * (1.0 - self._branch_window(chart, nodes))
            blocks.append(self._block("grid", chart, nodes, np.clip(weights, 0.0, None)))
        logger.debug(
            f"Chart grids built | grid={self.grid.label} | nodes={[b.samples.nodes for b in blocks]}"
        )
        return tuple(blocks)

    def _ring(
        self,
        chart: int,
        center: complex,
        radius: float,
    ) -> QuadBlock:
        theta, dtheta = trapezoid_angles(self.patch_angular)
        nodes = center + radius * np.exp(1j * theta)
        return self._block("ring", chart, nodes, radius * dtheta, center, radius)

    @cached_property
    def branch_patches(
        self,
    ) -> tuple[BranchPatch, ...]:
        r_excl = self.grid.exclusion_radius
        patches = []
        for chart in (0, 1):
            for point, radius in zip(self.branch_points(chart), self.branch_radii[chart]):
                levels = max(1, int(np.ceil(np.log2(radius / r_excl))))
                annuli = []
                for rule in dyadic_polar_rules(
                    complex(point), r_excl, radius, levels, self.grid.polar_radial_nodes, self.patch_angular
                ):
                    nodes = rule.nodes.reshape(-1)
                    window = bump(np.abs(nodes - point), radius, self.branch_plateau)
                    annuli.append(
                        self._block("branch", chart, nodes, rule.weights.reshape(-1) * window, complex(point), radius)
                    )
                rings = tuple(self._ring(chart, complex(point), r_excl * 0.5**k) for k in range(3))
                patches.append(BranchPatch(chart, complex(point), float(radius), tuple(annuli), rings))
        logger.debug(f"Branch patches built | grid={self.grid.label} | patches={len(patches)}")
        return tuple(patches)

    def target_radius(
        self,
        target: CurveTarget,
    ) -> float:
        """
        Raises:
            TargetNearDiscriminantError: the target lies in or against a branch window
        """
        chart = target.chart
        radius = min(self.target_window, EDGE_MARGIN * (self.curve.chart_radius(chart) - abs(target.base)))
        points = self.branch_points(chart)
        for point, branch_radius in zip(points, self.branch_radii[chart]):
            distance = abs(target.base - point)
            if distance < 1.05 * branch_radius:
                raise TargetNearDiscriminantError(
                    f"base {target.base} at distance {distance:.3e} from branch point {point}"
                )
            radius = min(radius, EDGE_MARGIN * (distance - branch_radius))
        if radius <= 0.0:
            raise TargetNearDiscriminantError(f"no room for a target patch at {target.base}")
        return radius

    def target_blocks(
        self,
        target: CurveTarget,
    ) -> tuple[list[QuadBlock], float]:
        radius = self.target_radius(target)
        blocks = []
        for rule in dyadic_polar_rules(
            target.base,
            0.0,
            radius,
            self.grid.polar_levels,
            self.grid.polar_radial_nodes,
            self.patch_angular,
        ):
            nodes = rule.nodes.reshape(-1)
            window = bump(np.abs(nodes - target.base), radius, self.plateau)
            weights = rule.weights.reshape(-1) * window
            blocks.append(self._block("target", target.chart, nodes, weights, target.base, radius))
        return blocks, radius

    # ------------------------------------------------------------ summing

    def _exclusion(
        self,
        patch: BranchPatch,
        density: Density,
    ) -> tuple[complex, float]:
        """
        Excluded disk |t − b| < r from g(ρ) = ∮ F ρ dθ on rings ρ = r, r/2, r/4.

        Summed over the colliding sheets g is a power series in ρ; the quadratic
        model gives A r + B r²/2 + C r³/3, and its distance to the linear model
        through the two outer rings is the reported error.
        """
        radii = np.array([ring.radius for ring in patch.rings])
        g = np.array([ring.total(density(ring)) for ring in patch.rings])
        vandermonde = np.vander(radii, 3, increasing=True)
        a, b, c = np.linalg.solve(vandermonde, g)
        r = radii[0]
        quadratic = a * r + b * r**2 / 2.0 + c * r**3 / 3.0
        slope = (g[0] - g[1]) / (radii[0] - radii[1])
        linear = (g[0] - slope * radii[0]) * r + slope * r**2 / 2.0
        return complex(quadratic), float(abs(quadratic - linear))

    def integrate(
        self,
        density: Density,
        target: Optional[CurveTarget] = None,
    ) -> QuadResult:
        """∫_X F dA over every chart and sheet, with the target patch when given."""
        result = QuadResult(0j)
        target_blocks: list[QuadBlock] = []
        radius = None
        if target is not None:
            target_blocks, radius = self.target_blocks(target)

        for block in self.grid_blocks:
            values = density(block)
            if target is not None and block.chart == target.chart:
                window = 1.0 - bump(np.abs(block.samples.base - target.base), radius, self.plateau)
                weights = block.samples.weights * window
                with np.errstate(invalid="ignore"):
                    per_node = np.where(weights[:, None] == 0.0, 0.0, values).sum(axis=1)
                result.value += complex(np.dot(weights, per_node))
            else:
                result.value += block.total(values)

        for patch in self.branch_patches:
            for block in patch.annuli:
                result.value += block.total(density(block))
            excluded, error = self._exclusion(patch, density)
            result.exclusion += excluded
            result.exclusion_error += error

        for block in target_blocks:
            result.value += block.total(density(block))
        result.value += result.exclusion
        return result

    def area(
        self,
    ) -> QuadResult:
        """Σ weights over every block (one sheet), for rule checks."""
        return self.integrate(lambda block: np.ones((block.samples.nodes, 1)))

    def to_dict(
        self,
    ) -> dict[str, Any]:
        return {
            "grid": self.grid.model_dump(),
            "branch_points": {
                str(chart): [[p.real, p.imag] for p in self.branch_points(chart)] for chart in (0, 1)
            },
            "branch_radii": {str(chart): self.branch_radii[chart].tolist() for chart in (0, 1)},
            "target_window": self.target_window,
        }
