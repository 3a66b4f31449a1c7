"""
The ambient ∂̄-solver on P^N (N = 1, 2) and the obstruction of the β branch.

P^N is covered by the polydiscs U_i = {max_j |ζ_j/ζ_i| ≤ 1}, which overlap
only on their boundaries, so chart integrals add. A top form restricted to
U_i is read off its dζ_J∧dζ̄_J coefficient (J = indices ≠ i) at ζ_i = 1.
The kernel singularity at z is cut out by a window χ defined on P^N and
integrated on dyadic polar (N = 1) or ball (N = 2) patches in the chart of z.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np

from app.core.config import settings
from app.core.errors import CalibrationError, TwistRangeError, UnsupportedRankError
from app.core.logger import get_logger
from app.models.scenario import GridSpec
from app.services.algebra.numeric import compile_rational
from app.services.algebra.universe import get_universe
from app.services.forms import FormExpr, extract, gen_id
from app.services.kernels import PnKernel, assemble_pn_kernel
from app.services.operators.conventions import SignRecord, record_sign, stored_signs
from app.services.operators.sections import SectionRep, holomorphic_top_forms, polynomial_section
from app.utils.numerics import (
    bump,
    convergence_slope,
    dyadic_ball_rules,
    dyadic_polar_rules,
    polar_rule,
    wirtinger_dbar,
)

logger = get_logger(__name__)

LEDGER_NAME = "pn"
DEFAULT_TARGETS = {
    1: ((1.0, 0.3 + 0.2j), (0.4 - 0.1j, 1.0)),
    2: ((1.0, 0.3 + 0.2j, -0.1 + 0.25j), (0.2j, 1.0, 0.5)),
}


def pn_signs(
    ledger: Optional[Path] = None,
) -> tuple[int, int]:
    return stored_signs(LEDGER_NAME, (settings.PN_SIGN, settings.PN_SIGN), path=ledger)


def default_weight(
    n: int,
    ell: int,
) -> str:
    return "alpha" if ell >= -n else "beta"


@dataclass(frozen=True, eq=False)
class PnBlock:
    kind: str
    chart: int
    zeta: np.ndarray
    weights: np.ndarray
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
        weights: Optional[np.ndarray] = None,
    ) -> complex:
        weights = self.weights if weights is None else weights
        with np.errstate(invalid="ignore"):
            values = np.where(weights == 0.0, 0.0, density)
        return complex(np.dot(weights, values))


PnDensity = Callable[[PnBlock], np.ndarray]


def _embed(
    coords: np.ndarray,
    chart: int,
) -> np.ndarray:
    """Chart coordinates (M, N) to representatives (M, N+1) with ζ_chart = 1."""
    return np.insert(coords, chart, 1.0, axis=-1)


def target_chart(
    z: np.ndarray,
) -> int:
    return int(np.argmax(np.abs(np.asarray(z, dtype=complex))))


def chart_coordinates(
    zeta: np.ndarray,
    chart: int,
) -> tuple[np.ndarray, np.ndarray]:
    """(coordinates ζ_j/ζ_chart, mask of points where ζ_chart ≠ 0)."""
    zeta = np.asarray(zeta, dtype=complex)
    pivot = zeta[..., chart]
    inside = np.abs(pivot) > 1e-300
    safe = np.where(inside, pivot, 1.0)
    return np.delete(zeta, chart, axis=-1) / safe[..., None], inside


class ProjectiveQuadrature:
    """Quadrature on P^N for one grid; densities are per unit volume dV of the chart."""

    def __init__(
        self,
        n: int,
        grid: Optional[GridSpec] = None,
        target_window: Optional[float] = None,
        plateau: Optional[float] = None,
    ):
        if n not in (1, 2):
            raise UnsupportedRankError(f"P^N quadrature supports N = 1, 2, got {n}")
        self.n = n
        self.grid = grid or (GridSpec() if n == 1 else GridSpec.square(settings.PN2_GRID_NODES))
        self.target_window = target_window or settings.TARGET_WINDOW_RADIUS
        self.plateau = plateau if plateau is not None else settings.WINDOW_PLATEAU

    @cached_property
    def grid_blocks(
        self,
    ) -> tuple[PnBlock, ...]:
        rule = polar_rule(self.grid.nodes_radial, self.grid.nodes_angular, 0.0, 1.0)
        nodes, weights = rule.nodes.reshape(-1), rule.weights.reshape(-1)
        if self.n == 1:
            coords, volume = nodes[:, None], weights
        else:
            first, second = np.meshgrid(nodes, nodes, indexing="ij")
            coords = np.stack([first.reshape(-1), second.reshape(-1)], axis=-1)
            volume = np.outer(weights, weights).reshape(-1)
        blocks = tuple(PnBlock("grid", chart, _embed(coords, chart), volume) for chart in range(self.n + 1))
        logger.debug(f"P^N grids built | N={self.n} | grid={self.grid.label} | nodes_per_chart={volume.size}")
        return blocks

    def window(
        self,
        zeta: np.ndarray,
        z: np.ndarray,
    ) -> np.ndarray:
        """χ around z, evaluated at arbitrary points of P^N."""
        chart = target_chart(z)
        center, _ = chart_coordinates(z, chart)
        coords, inside = chart_coordinates(zeta, chart)
        distance = np.where(inside, np.linalg.norm(coords - center, axis=-1), np.inf)
        return bump(distance, self.target_window, self.plateau)

    def target_blocks(
        self,
        z: np.ndarray,
    ) -> list[PnBlock]:
        chart = target_chart(z)
        center, _ = chart_coordinates(z, chart)
        if self.n == 1:
            rules = dyadic_polar_rules(
                complex(center[0]),
                0.0,
                self.target_window,
                self.grid.polar_levels,
                self.grid.polar_radial_nodes,
                settings.POLAR_BASE_ANGULAR * self.grid.polar_oversampling,
            )
            pieces = [(rule.nodes.reshape(-1)[:, None], rule.weights.reshape(-1)) for rule in rules]
        else:
            rules = dyadic_ball_rules(
                (complex(center[0]), complex(center[1])),
                0.0,
                self.target_window,
                self.grid.polar_levels,
                self.grid.polar_radial_nodes,
                settings.BALL_ANGULAR_NODES,
            )
            pieces = [(rule.nodes, rule.weights) for rule in rules]
        blocks = []
        for coords, weights in pieces:
            distance = np.linalg.norm(coords - center, axis=-1)
            windowed = weights * bump(distance, self.target_window, self.plateau)
            keep = windowed != 0.0
            blocks.append(PnBlock("target", chart, _embed(coords[keep], chart), windowed[keep]))
        return blocks

    def integrate(
        self,
        density: PnDensity,
        z: Optional[np.ndarray] = None,
    ) -> complex:
        """∫_{P^N} F dV, with the singular patch around z when given."""
        total = 0j
        for block in self.grid_blocks:
            values = density(block)
            if z is None:
                total += block.total(values)
            else:
                total += block.total(values, block.weights * (1.0 - self.window(block.zeta, z)))
        if z is not None:
            for block in self.target_blocks(z):
                total += block.total(density(block))
        return total

    def volume(
        self,
    ) -> complex:
        """∫ dV/|ζ|^{2(N+1)} (= π^N/N! for the chart representatives)."""
        return self.integrate(lambda block: np.sum(np.abs(block.zeta) ** 2, axis=-1) ** (-(self.n + 1)))


class TopFormDensity:
    """Chart density of a ζ-bidegree (N, N) form; z enters as a fixed point."""

    def __init__(
        self,
        form: FormExpr,
    ):
        u = form.universe
        n = u.n
        self.form = form
        self.universe = u
        self.orientation = (-1) ** (n * (n - 1) // 2) * (-2j) ** n
        self.components = {}
        for chart in range(n + 1):
            others = [j for j in range(n + 1) if j != chart]
            key = tuple(
                sorted([gen_id(u, "dzeta", j) for j in others] + [gen_id(u, "dzetabar", j) for j in others])
            )
            if key in form.terms:
                self.components[chart] = compile_rational(form.terms[key])

    @property
    def is_zero(self) -> bool:
        return not self.components

    def at(
        self,
        z: Optional[np.ndarray] = None,
    ) -> PnDensity:
        def density(block: PnBlock) -> np.ndarray:
            component = self.components.get(block.chart)
            if component is None:
                return np.zeros(block.zeta.shape[0], dtype=complex)
            values = self.universe.values(zeta=block.zeta, z=z)
            with np.errstate(divide="ignore", invalid="ignore"):
                return self.orientation * component(values, check_poles=False)

        return density


# -------------------------------------------------------------------- solve


@dataclass
class PnSolution:
    n: int
    twist: int
    q: int
    weight: str
    sign: int
    grid: GridSpec
    targets: list[np.ndarray]
    values: np.ndarray
    projection: Optional[np.ndarray] = None
    manufactured: Optional[np.ndarray] = None
    wirtinger: Optional[np.ndarray] = None
    projection_vanishes: Optional[bool] = None
    warnings: list[str] = field(default_factory=list)

    @property
    def manufactured_residual(self) -> Optional[float]:
        return None if self.manufactured is None else float(np.max(self.manufactured))

    @property
    def wirtinger_residual(self) -> Optional[float]:
        return None if self.wirtinger is None else float(np.max(self.wirtinger))

    def to_dict(
        self,
    ) -> dict[str, Any]:
        def pairs(values: Optional[np.ndarray]) -> Optional[list]:
            return None if values is None else [[complex(v).real, complex(v).imag] for v in values]

        return {
            "N": self.n,
            "twist": self.twist,
            "q": self.q,
            "weight": self.weight,
            "sign": self.sign,
            "grid": self.grid.model_dump(),
            "targets": [pairs(t) for t in self.targets],
            "values": pairs(self.values),
            "projection": pairs(self.projection),
            "manufactured": None if self.manufactured is None else self.manufactured.tolist(),
            "wirtinger": None if self.wirtinger is None else self.wirtinger.tolist(),
            "projection_vanishes": self.projection_vanishes,
            "warnings": self.warnings,
        }


def _section_value(
    section: SectionRep,
    z: np.ndarray,
) -> complex:
    return complex(section.value(np.asarray(z, dtype=complex)))


def _dbar_coefficients(
    section: SectionRep,
    z: np.ndarray,
) -> np.ndarray:
    """dζ̄_j coefficients of a (0,1)-form at z, j = 0..N."""
    u = section.universe
    coeffs = section.at(np.asarray(z, dtype=complex))
    out = np.zeros(u.size, dtype=complex)
    for j in range(u.size):
        out[j] = complex(coeffs.get((gen_id(u, "dzetabar", j),), 0j))
    return out


def pn_solve(
    n: int,
    ell: int,
    q: int,
    phi: SectionRep,
    grid: Optional[GridSpec] = None,
    psi: Optional[SectionRep] = None,
    weight: Optional[str] = None,
    targets: Optional[Sequence[np.ndarray]] = None,
    sign: Optional[int] = None,
    kernel: Optional[PnKernel] = None,
    wirtinger: bool = True,
    workers: Optional[int] = None,
) -> PnSolution:
    """
    Apply the P^N Koppelman operators to φ.

    For q = 1, u = σ·Kφ solves ∂̄u = φ when the obstruction vanishes; the
    residuals are |∂̄u − φ| in the chart of each target and, when ψ with
    φ = ∂̄ψ is given, |σKφ + σPψ − ψ|. For q = 0 only the projection term
    σ·Pφ is evaluated.

    Args:
        n: Dimension (1 or 2)
        ell: Twist ℓ of φ
        q: Form degree of φ (0 or 1)
        phi: Exact (0,q)-form with values in O(ℓ)
        grid: Quadrature grid
        psi: Preimage of φ for the manufactured residual
        weight: "alpha" (ℓ ≥ −N) or "beta" (ℓ ≤ −N); default by ℓ
        targets: Points z (N+1 coordinates)
        sign: Global sign σ (default: conventions ledger)
        kernel: Prebuilt kernel
        wirtinger: Compute Wirtinger residuals (q = 1)
        workers: Thread-pool size over targets

    Raises:
        TwistRangeError: ℓ outside the range of the weight
        UnsupportedRankError: N ∉ {1, 2} or q ∉ {0, 1}
    """
    if q not in (0, 1):
        raise UnsupportedRankError(f"pn_solve handles q = 0, 1, got q={q}")
    if phi.form is None or phi.universe.n != n or phi.twist != ell or phi.q != q:
        raise ValueError(f"φ must be an exact (0,{q})-form on P^{n} with twist {ell}")
    weight = weight or default_weight(n, ell)
    kernel = kernel or assemble_pn_kernel(n, ell, weight)
    quadrature = ProjectiveQuadrature(n, grid)
    sign = sign if sign is not None else pn_signs()[0]
    targets = [np.asarray(t, dtype=complex) for t in (targets or DEFAULT_TARGETS[n])]
    warnings: list[str] = []

    projection_term = TopFormDensity(kernel.projection_integrand(phi.form, q))
    projection_vanishes = projection_term.is_zero
    if q == 1 and weight == "alpha" and not projection_vanishes:
        warnings.append("alpha-branch projection of a (0,1)-form has nonzero terms")
        logger.error(f"Projection term not identically zero | N={n} | l={ell}")
    kernel_term = TopFormDensity(kernel.kernel_integrand(phi.form, q)) if q == 1 else None
    psi_term = None
    if psi is not None and q == 1:
        psi_term = TopFormDensity(kernel.projection_integrand(psi.form, 0))
    _ = quadrature.grid_blocks

    def solve_at(z: np.ndarray) -> tuple[complex, Optional[complex], Optional[float], Optional[float]]:
        projected = None
        if q == 0:
            projected = sign * quadrature.integrate(projection_term.at(z)) if not projection_vanishes else 0j
            return projected, projected, None, None

        def u_of(point: np.ndarray) -> complex:
            return sign * quadrature.integrate(kernel_term.at(point), point)

        value = u_of(z)
        manufactured = None
        if psi is not None:
            p_psi = 0j if psi_term.is_zero else sign * quadrature.integrate(psi_term.at(z))
            manufactured = abs(value + p_psi - _section_value(psi, z))
        dbar_error = None
        if wirtinger:
            chart = target_chart(z)
            rep = z / z[chart]
            coefficients = _dbar_coefficients(phi, rep)
            h = 1.0 / quadrature.grid.nodes_radial
            errors = []
            for j in (k for k in range(n + 1) if k != chart):

                def along(t: np.ndarray, j: int = j) -> np.ndarray:
                    flat = []
                    for c in np.ravel(t):
                        point = rep.copy()
                        point[j] = c
                        flat.append(u_of(point))
                    return np.asarray(flat, dtype=complex).reshape(np.shape(t))

                derivative = complex(wirtinger_dbar(along, np.asarray(rep[j]), h))
                errors.append(abs(derivative - coefficients[j]))
            dbar_error = max(errors)
        return value, projected, manufactured, dbar_error

    max_workers = max(1, min(len(targets), workers or settings.WORKER_COUNT))
    logger.info(
        f"Solving dbar on P^N | N={n} | l={ell} | q={q} | weight={weight} | grid={quadrature.grid.label} "
        f"| targets={len(targets)} | sign={sign}"
    )
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        rows = list(executor.map(solve_at, targets))

    solution = PnSolution(
        n=n,
        twist=ell,
        q=q,
        weight=weight,
        sign=sign,
        grid=quadrature.grid,
        targets=targets,
        values=np.array([row[0] for row in rows], dtype=complex),
        projection=np.array([row[1] for row in rows], dtype=complex) if q == 0 else None,
        manufactured=np.array([row[2] for row in rows]) if psi is not None and q == 1 else None,
        wirtinger=np.array([row[3] for row in rows]) if wirtinger and q == 1 else None,
        projection_vanishes=projection_vanishes,
        warnings=warnings,
    )
    logger.info(
        f"P^N solve finished | manufactured={solution.manufactured_residual} | wirtinger={solution.wirtinger_residual} "
        f"| projection_vanishes={projection_vanishes}"
    )
    return solution


def pn_convergence(
    n: int,
    ell: int,
    phi: SectionRep,
    refinements: Sequence[int],
    psi: Optional[SectionRep] = None,
    weight: Optional[str] = None,
    targets: Optional[Sequence[np.ndarray]] = None,
    sign: Optional[int] = None,
) -> dict[str, Any]:
    """
    Solve ∂̄u = φ for a (0,1)-form on square grids n × n and fit the orders.

    A Wirtinger order at or below NO_CONVERGENCE_SLOPE adds a "no convergence"
    warning: ∂̄u tends to φ − Pφ, so this is what data with a nonzero
    obstruction shows.

    Returns:
        {"grids", "manufactured", "wirtinger", "orders", "warnings", "solutions"}
    """
    weight = weight or default_weight(n, ell)
    kernel = assemble_pn_kernel(n, ell, weight)
    solutions = [
        pn_solve(
            n,
            ell,
            1,
            phi,
            grid=GridSpec.square(m),
            psi=psi,
            weight=weight,
            targets=targets,
            sign=sign,
            kernel=kernel,
        )
        for m in refinements
    ]
    manufactured = [sol.manufactured_residual for sol in solutions] if psi is not None else []
    dbar_errors = [sol.wirtinger_residual for sol in solutions]
    orders = {}
    warnings: list[str] = []
    if len(refinements) >= 2:
        orders["wirtinger"] = convergence_slope(refinements, dbar_errors)
        if manufactured:
            orders["manufactured"] = convergence_slope(refinements, manufactured)
        if orders["wirtinger"] <= settings.NO_CONVERGENCE_SLOPE:
            slope, last = orders["wirtinger"], dbar_errors[-1]
            warnings.append(f"no convergence: wirtinger order {slope:.2f} with residual {last:.3e}")
            logger.warning(f"No convergence | N={n} | l={ell} | weight={weight} | wirtinger={dbar_errors}")
    logger.info(f"P^N convergence study done | N={n} | l={ell} | weight={weight} | orders={orders}")
    return {
        "grids": list(refinements),
        "manufactured": manufactured,
        "wirtinger": dbar_errors,
        "orders": orders,
        "warnings": warnings,
        "solutions": solutions,
    }


def pn_obstruction(
    n: int,
    ell: int,
    phi: SectionRep,
    grid: Optional[GridSpec] = None,
) -> np.ndarray:
    """
    Pairings ∫ ζ^μ Ω ∧ φ over the monomial basis of holomorphic (N,0)-forms
    with values in O(−ℓ); φ = ∂̄u is solvable iff the vector vanishes.

    Raises:
        TwistRangeError: ℓ > −N − 1 (no such forms)
    """
    basis = holomorphic_top_forms(n, ell)
    if not basis:
        raise TwistRangeError(f"obstructions need l <= -{n + 1}, got {ell}")
    if phi.form is None or phi.q != n or phi.twist != ell:
        raise ValueError(f"φ must be an exact (0,{n})-form with twist {ell}")
    quadrature = ProjectiveQuadrature(n, grid)
    moments = []
    for mu, top in basis:
        pairing = extract(top.wedge(phi.form, max_dzeta=n), n, n, 0, 0)
        moments.append(quadrature.integrate(TopFormDensity(pairing).at()))
    moments = np.array(moments, dtype=complex)
    logger.info(f"Obstruction computed | N={n} | l={ell} | grid={quadrature.grid.label} | moments={moments}")
    return moments


def pn_sign(
    grid: Optional[GridSpec] = None,
    n: int = 1,
    ledger: Optional[Path] = None,
    persist: bool = True,
) -> int:
    """
    Calibrate σ on P^N from the α branch at ℓ = 0: σ·P(1) must equal 1.

    Raises:
        CalibrationError: |σP(1) − 1| exceeds CALIBRATION_FACTOR·PN_TOLERANCE
    """
    u = get_universe(n)
    one = polynomial_section(u, u.ring.one, 0)
    solution = pn_solve(n, 0, 0, one, grid=grid, weight="alpha", sign=1)
    raw = solution.values
    sign = 1 if float(np.mean(raw.real)) > 0 else -1
    residual = float(np.max(np.abs(sign * raw - 1.0)))
    losing = float(np.max(np.abs(-sign * raw - 1.0)))
    logger.info(f"P^N sign calibrated | N={n} | sign={sign} | residual={residual:.3e}")
    if residual > settings.CALIBRATION_FACTOR * settings.PN_TOLERANCE:
        raise CalibrationError(f"P(1) = {raw.tolist()} is not ±1")
    if persist:
        record_sign(
            LEDGER_NAME,
            SignRecord(
                kernel_sign=sign,
                projection_sign=sign,
                residual=residual,
                losing_residual=losing,
                grid=solution.grid.label,
                source=f"pn_sign:N={n}",
            ),
            path=ledger,
        )
    return sign
