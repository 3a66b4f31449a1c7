"""
The ∂̄-solution operator K and the projection P on smooth plane curves.

u = σ_K·Kφ solves ∂̄u = φ for (0,1)-forms with values in L^s, and for smooth
sections ψ the identity ψ = σ_K·K(∂̄ψ) + σ_P·Pψ holds on X. The signs σ are
fixed by ``koppelman_selftest`` and read from the conventions ledger.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from app.core.config import settings
from app.core.errors import CalibrationError, CurveNotSmoothError, ExtensionFitError
from app.core.logger import get_logger
from app.models.scenario import GridSpec
from app.services.curves import PlaneCurve, area_factor, sample_points
from app.services.kernels import (
    KernelEval,
    ProjectionKernel,
    assemble_plane_kernel,
    assemble_projection_kernel,
    z_monomials,
)
from app.services.operators.conventions import SignRecord, record_sign, stored_signs
from app.services.operators.quadrature import (
    CurveQuadrature,
    CurveTarget,
    Density,
    QuadBlock,
    QuadResult,
    curve_target,
    follow_target,
    target_on_sheet,
)
from app.services.operators.sections import SectionRep, dbar_section, monomial_exponents, polynomial_section
from app.utils.numerics import convergence_slope, wirtinger_dbar

logger = get_logger(__name__)

Moment = tuple[int, ...]

DEFAULT_BASES = ((0.1, 0.05), (-0.2, 0.15))
LEDGER_NAME = "curve"


def curve_signs(
    ledger: Optional[Path] = None,
) -> tuple[int, int]:
    """(σ_K, σ_P) for curves: calibrated if a self-test ran, configured otherwise."""
    return stored_signs(
        LEDGER_NAME,
        (settings.CURVE_KERNEL_SIGN, settings.CURVE_PROJECTION_SIGN),
        path=ledger,
    )


def curve_targets(
    curve: PlaneCurve,
    bases: Sequence[tuple[float, float]] = DEFAULT_BASES,
    sheets: int = 2,
) -> list[CurveTarget]:
    """Points of X over chart-0 base points, on the first ``sheets`` sheets."""
    return [
        target_on_sheet(curve, complex(x, y), sheet)
        for x, y in bases
        for sheet in range(min(sheets, curve.sheets))
    ]


class CurveOperators:
    """
    K and P of one smooth plane curve and twist on one quadrature grid.

    Kernels are assembled once and shared by ``with_grid``; per-block
    evaluations (kernel z-moment tables, section pullbacks) are cached on the
    rule pieces, so additional targets only pay for their own patches.
    """

    def __init__(
        self,
        curve: PlaneCurve,
        s: int,
        grid: Optional[GridSpec] = None,
        kernel: Optional[KernelEval] = None,
        projection: Optional[ProjectionKernel] = None,
        quadrature: Optional[CurveQuadrature] = None,
    ):
        if not curve.smooth:
            raise CurveNotSmoothError(f"{curve.label or 'curve'} has {len(curve.singular_points)} singular point(s)")
        self.curve = curve
        self.twist = s
        self._kernel = kernel
        self._projection = projection
        self.quadrature = quadrature or CurveQuadrature(curve, grid)

    @property
    def kernel(self) -> KernelEval:
        if self._kernel is None:
            self._kernel = assemble_plane_kernel(self.curve, self.twist)
        return self._kernel

    @property
    def projection(self) -> ProjectionKernel:
        if self._projection is None:
            self._projection = assemble_projection_kernel(self.curve, self.twist)
        return self._projection

    @property
    def grid(self) -> GridSpec:
        return self.quadrature.grid

    def with_grid(
        self,
        grid: GridSpec,
    ) -> "CurveOperators":
        return CurveOperators(self.curve, self.twist, grid, kernel=self._kernel, projection=self._projection)

    def check_section(
        self,
        section: SectionRep,
        q: int,
    ) -> None:
        if section.twist != self.twist:
            raise ValueError(f"section {section.label!r} has twist {section.twist}, operators use s={self.twist}")
        if section.q != q:
            raise ValueError(f"expected a (0,{q})-form, got (0,{section.q})")

    @staticmethod
    def _section_values(
        block: QuadBlock,
        section: SectionRep,
    ) -> np.ndarray:
        return block.cached(("section", section), lambda: section.on_samples(block.samples))

    # ------------------------------------------------------------------ K

    def kernel_density(
        self,
        section: SectionRep,
        z: np.ndarray,
    ) -> Density:
        kernel = self.kernel

        def density(block: QuadBlock) -> np.ndarray:
            samples = block.samples
            table = block.cached(("kernel", kernel), lambda: kernel.moment_values(samples.zeta))
            frame = block.cached(("frame", kernel), lambda: kernel.base_form(samples))
            values = kernel.from_moments(table, samples.zeta, z)
            return values * frame * self._section_values(block, section) * area_factor()

        return density

    def apply_kernel(
        self,
        section: SectionRep,
        target: CurveTarget,
    ) -> QuadResult:
        """Kφ(z) = ∫_X k(ζ, z)∧φ(ζ), unsigned."""
        self.check_section(section, 1)
        return self.quadrature.integrate(self.kernel_density(section, target.zeta), target)

    # ------------------------------------------------------------------ P

    def projection_moments(
        self,
        section: SectionRep,
    ) -> dict[Moment, QuadResult]:
        """I_μ = ∫_X p_μ∧ψ, so that Pψ(z) = Σ_μ z^μ I_μ (unsigned)."""
        if section.q != 0:
            logger.debug(f"Projection of a (0,{section.q})-form vanishes | section={section.label}")
            return {}
        self.check_section(section, 0)
        projection = self.projection

        def moment_density(mu: Moment) -> Density:
            def density(block: QuadBlock) -> np.ndarray:
                table = block.cached(("projection", projection), lambda: projection.moment_densities(block.samples))
                return table[mu] * self._section_values(block, section) * area_factor()

            return density

        return {mu: self.quadrature.integrate(moment_density(mu)) for mu in projection.moments}

    @staticmethod
    def from_moments(
        moments: dict[Moment, QuadResult],
        z: np.ndarray,
    ) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        total = np.zeros(z.shape[:-1], dtype=complex)
        for mu, monomial in z_monomials(moments, z).items():
            total = total + moments[mu].value * monomial
        return total

    def apply_projection_direct(
        self,
        section: SectionRep,
        z: np.ndarray,
    ) -> QuadResult:
        """Pψ(z) by quadrature of p(·, z)∧ψ without the moment split (unsigned)."""
        self.check_section(section, 0)
        projection = self.projection
        z = np.asarray(z, dtype=complex)

        def density(block: QuadBlock) -> np.ndarray:
            return projection.density(block.samples, z) * self._section_values(block, section) * area_factor()

        return self.quadrature.integrate(density)

    # -------------------------------------------------------------- values

    def section_at(
        self,
        section: SectionRep,
        target: CurveTarget,
    ) -> complex:
        """Scalar or dt̄ coefficient of a section at a target, in the target's chart."""
        samples = sample_points(self.curve, target.chart, np.array([target.base]))
        fibers = samples.zeta[0, :, self.curve.fiber_variable]
        sheet = int(np.argmin(np.abs(fibers - target.fiber)))
        return complex(section.on_samples(samples)[0, sheet])

    def to_dict(
        self,
    ) -> dict[str, Any]:
        return {
            "curve": self.curve.label,
            "twist": self.twist,
            "kernel": self.kernel.to_dict(),
            "projection": self.projection.to_dict(),
            "quadrature": self.quadrature.to_dict(),
        }


# -------------------------------------------------------------------- solve


@dataclass
class CurveSolution:
    """u = σ_K·Kφ at the targets with its residuals; callable on new points of X."""

    operators: CurveOperators
    section: SectionRep
    kernel_sign: int
    projection_sign: int
    targets: list[CurveTarget]
    values: np.ndarray
    wirtinger: Optional[np.ndarray] = None
    koppelman: Optional[np.ndarray] = None
    exclusion_error: float = 0.0
    step: Optional[float] = None
    warnings: list[str] = field(default_factory=list)

    def __call__(
        self,
        zeta: np.ndarray,
    ) -> complex:
        target = curve_target(self.operators.curve, zeta)
        return self.kernel_sign * self.operators.apply_kernel(self.section, target).value

    @property
    def wirtinger_residual(self) -> Optional[float]:
        return None if self.wirtinger is None else float(np.max(self.wirtinger))

    @property
    def koppelman_residual(self) -> Optional[float]:
        return None if self.koppelman is None else float(np.max(self.koppelman))

    def to_dict(
        self,
    ) -> dict[str, Any]:
        return {
            "grid": self.operators.grid.model_dump(),
            "section": self.section.to_dict(),
            "kernel_sign": self.kernel_sign,
            "projection_sign": self.projection_sign,
            "targets": [t.to_dict() for t in self.targets],
            "values": [[v.real, v.imag] for v in self.values],
            "wirtinger": None if self.wirtinger is None else self.wirtinger.tolist(),
            "koppelman": None if self.koppelman is None else self.koppelman.tolist(),
            "exclusion_error": self.exclusion_error,
            "step": self.step,
            "warnings": self.warnings,
        }


def solve_dbar_curve(
    curve: PlaneCurve,
    s: int,
    phi: SectionRep,
    grid: Optional[GridSpec] = None,
    targets: Optional[Sequence[CurveTarget]] = None,
    psi: Optional[SectionRep] = None,
    kernel_sign: Optional[int] = None,
    projection_sign: Optional[int] = None,
    operators: Optional[CurveOperators] = None,
    wirtinger: bool = True,
    workers: Optional[int] = None,
) -> CurveSolution:
    """
    Solve ∂̄u = φ on X for a (0,1)-form φ with values in L^s.

    Args:
        curve: Smooth plane curve
        s: Twist (κ = s − d + 2 ≥ 0)
        phi: (0,1)-form; every such form is ∂̄-closed on a curve
        grid: Quadrature grid (ignored when ``operators`` is given)
        targets: Points of X where u is evaluated (default: two base points, two sheets)
        psi: Known preimage (φ = ∂̄ψ) for the manufactured residual |u + σ_P Pψ − ψ|
        kernel_sign: σ_K (default: conventions ledger)
        projection_sign: σ_P (default: conventions ledger)
        operators: Prebuilt operators for this curve and twist
        wirtinger: Also compute |∂̄u − φ| by the 5-point stencil with h = grid spacing
        workers: Thread-pool size over targets

    Raises:
        TwistBelowThresholdError: κ < 0
        CurveNotSmoothError: X is singular
        TargetNearDiscriminantError: a target sits inside a branch window
    """
    ops = operators or CurveOperators(curve, s, grid)
    ops.check_section(phi, 1)
    stored = curve_signs()
    sign_k = kernel_sign if kernel_sign is not None else stored[0]
    sign_p = projection_sign if projection_sign is not None else stored[1]
    targets = list(targets) if targets is not None else curve_targets(curve)
    warnings: list[str] = []

    if phi.symbolic and not phi.closed:
        warnings.append("φ is closed on X by dimension; no ambient closedness certificate")

    # assemble the kernel and the shared rule pieces before the pool fans out
    _ = ops.kernel, ops.quadrature.grid_blocks, ops.quadrature.branch_patches
    moments = ops.projection_moments(psi) if psi is not None else None
    step = ops.curve.chart_radius(0) / ops.grid.nodes_radial

    def solve_at(target: CurveTarget) -> tuple[complex, Optional[float], Optional[float], float]:
        result = ops.apply_kernel(phi, target)
        value = sign_k * result.value
        dbar_error = None
        if wirtinger:
            h = ops.curve.chart_radius(target.chart) / ops.grid.nodes_radial

            def u_of(t: np.ndarray) -> np.ndarray:
                flat = [
                    sign_k * ops.apply_kernel(phi, follow_target(ops.curve, target, complex(b))).value
                    for b in np.ravel(t)
                ]
                return np.asarray(flat, dtype=complex).reshape(np.shape(t))

            derivative = complex(wirtinger_dbar(u_of, np.asarray(target.base), h))
            dbar_error = abs(derivative - ops.section_at(phi, target))
        identity_error = None
        if psi is not None:
            projected = complex(ops.from_moments(moments, target.zeta))
            identity_error = abs(value + sign_p * projected - ops.section_at(psi, target))
        return value, dbar_error, identity_error, result.exclusion_error

    max_workers = max(1, min(len(targets), workers or settings.WORKER_COUNT))
    logger.info(
        f"Solving dbar on curve | curve={curve.label} | s={s} | grid={ops.grid.label} | targets={len(targets)} "
        f"| max_workers={max_workers} | wirtinger={wirtinger}"
    )
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        rows = list(executor.map(solve_at, targets))

    values = np.array([row[0] for row in rows], dtype=complex)
    solution = CurveSolution(
        operators=ops,
        section=phi,
        kernel_sign=sign_k,
        projection_sign=sign_p,
        targets=targets,
        values=values,
        wirtinger=np.array([row[1] for row in rows]) if wirtinger else None,
        koppelman=np.array([row[2] for row in rows]) if psi is not None else None,
        exclusion_error=float(max(row[3] for row in rows)) if rows else 0.0,
        step=step,
        warnings=warnings,
    )
    logger.info(
        f"Curve solve finished | grid={ops.grid.label} | wirtinger={solution.wirtinger_residual} "
        f"| koppelman={solution.koppelman_residual} | exclusion_error={solution.exclusion_error:.2e}"
    )
    return solution


def curve_convergence(
    curve: PlaneCurve,
    s: int,
    psi: SectionRep,
    refinements: Sequence[int],
    targets: Optional[Sequence[CurveTarget]] = None,
    wirtinger: bool = True,
    operators: Optional[CurveOperators] = None,
    kernel_sign: Optional[int] = None,
    projection_sign: Optional[int] = None,
) -> dict[str, Any]:
    """
    Solve with φ = ∂̄ψ on square grids n × n and fit the observed orders.

    The signs default to the conventions ledger, as in ``solve_dbar_curve``.

    Returns:
        {"grids", "koppelman", "wirtinger", "orders", "solutions"}
    """
    phi = dbar_section(psi)
    base = operators or CurveOperators(curve, s, GridSpec.square(refinements[0]))
    solutions = []
    for n in refinements:
        ops = base.with_grid(GridSpec.square(n))
        solutions.append(
            solve_dbar_curve(
                curve,
                s,
                phi,
                targets=targets,
                psi=psi,
                kernel_sign=kernel_sign,
                projection_sign=projection_sign,
                operators=ops,
                wirtinger=wirtinger,
            )
        )
    koppelman = [sol.koppelman_residual for sol in solutions]
    dbar_errors = [sol.wirtinger_residual for sol in solutions] if wirtinger else []
    orders = {}
    if len(refinements) >= 2:
        orders["koppelman"] = convergence_slope(refinements, koppelman)
        if wirtinger:
            orders["wirtinger"] = convergence_slope(refinements, dbar_errors)
    logger.info(f"Convergence study done | curve={curve.label} | s={s} | koppelman={koppelman} | orders={orders}")
    return {
        "grids": list(refinements),
        "koppelman": koppelman,
        "wirtinger": dbar_errors,
        "orders": orders,
        "solutions": solutions,
    }


# ---------------------------------------------------------------- extension


@dataclass
class ExtensionResult:
    """A homogeneous polynomial of degree s whose restriction to X is φ."""

    twist: int
    basis: list[Moment]
    coefficients: np.ndarray
    moment_coefficients: np.ndarray
    fit_residual: float
    agreement: float
    holomorphy: Optional[float]
    projection_sign: int
    exclusion_error: float
    grid: GridSpec

    def __call__(
        self,
        z: np.ndarray,
    ) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        total = np.zeros(z.shape[:-1], dtype=complex)
        for mu, c in zip(self.basis, self.coefficients):
            total = total + c * np.prod(z ** np.asarray(mu), axis=-1)
        return total

    @property
    def polynomial(self) -> str:
        terms = []
        for mu, c in zip(self.basis, self.coefficients):
            if abs(c) < settings.EXTENSION_TOLERANCE:
                continue
            monomial = "*".join(f"z{j}^{e}" if e > 1 else f"z{j}" for j, e in enumerate(mu) if e)
            terms.append(f"({c.real:.10g}{c.imag:+.10g}*i)" + (f"*{monomial}" if monomial else ""))
        return " + ".join(terms) or "0"

    def to_dict(
        self,
    ) -> dict[str, Any]:
        return {
            "twist": self.twist,
            "polynomial": self.polynomial,
            "basis": [list(mu) for mu in self.basis],
            "coefficients": [[c.real, c.imag] for c in self.coefficients],
            "moment_coefficients": [[c.real, c.imag] for c in self.moment_coefficients],
            "fit_residual": self.fit_residual,
            "agreement": self.agreement,
            "holomorphy": self.holomorphy,
            "projection_sign": self.projection_sign,
            "exclusion_error": self.exclusion_error,
            "grid": self.grid.model_dump(),
        }


def _agreement_samples(
    curve: PlaneCurve,
) -> list:
    bases = [0.0] + [0.6 * np.exp(2j * np.pi * (k + 0.25) / 6) for k in range(6)]
    return [
        sample_points(curve, 0, np.asarray(bases)),
        sample_points(curve, 1, 0.3 * np.exp(2j * np.pi * np.arange(3) / 3)),
    ]


def _fit_points(
    curve: PlaneCurve,
    count: int,
    seed: int,
) -> np.ndarray:
    """Half on X (unit representatives), half off X, all of norm 1."""
    rng = np.random.default_rng(seed)
    on = count // 2 + count % 2
    bases = 0.7 * (rng.uniform(-1, 1, on) + 1j * rng.uniform(-1, 1, on))
    samples = sample_points(curve, 0, bases)
    picks = samples.zeta[np.arange(on), rng.integers(0, curve.sheets, on)]
    off = rng.normal(size=(count - on, 3)) + 1j * rng.normal(size=(count - on, 3))
    points = np.concatenate([picks, off])
    return points / np.linalg.norm(points, axis=-1, keepdims=True)


def extend_section(
    curve: PlaneCurve,
    s: int,
    phi: SectionRep,
    grid: Optional[GridSpec] = None,
    operators: Optional[CurveOperators] = None,
    projection_sign: Optional[int] = None,
    tolerance: Optional[float] = None,
    extra_points: int = 3,
    check_holomorphy: bool = True,
    seed: int = 0,
    workers: Optional[int] = None,
) -> ExtensionResult:
    """
    Extend a holomorphic section on X to a homogeneous polynomial of degree s.

    Pφ is evaluated by direct quadrature on a z-sample set on and off X and
    fitted onto the degree-s monomial basis; the z-moments of P give the same
    polynomial and are reported alongside. Without an explicit sign, σ_P is
    the sign that reproduces φ on X (the identity reduces to Pφ = φ there).

    Raises:
        ExtensionFitError: the fit residual exceeds ``tolerance``
    """
    ops = operators or CurveOperators(curve, s, grid)
    ops.check_section(phi, 0)
    tolerance = tolerance or settings.EXTENSION_TOLERANCE
    basis = monomial_exponents(3, s)
    _ = ops.projection, ops.quadrature.grid_blocks, ops.quadrature.branch_patches
    moments = ops.projection_moments(phi)
    exclusion_error = float(sum(m.exclusion_error for m in moments.values()))

    checks = _agreement_samples(curve)
    expected = [phi.on_samples(samples) for samples in checks]
    projected = [ops.from_moments(moments, samples.zeta) for samples in checks]

    def agreement_for(sign: int) -> float:
        return float(max(np.max(np.abs(sign * p - e)) for p, e in zip(projected, expected)))

    candidates = {sign: agreement_for(sign) for sign in (1, -1)}
    if projection_sign is None:
        if candidates[1] == candidates[-1]:
            projection_sign = curve_signs()[1]
        else:
            projection_sign = min(candidates, key=candidates.get)
    agreement = candidates[projection_sign]

    points = _fit_points(curve, len(basis) + extra_points, seed)
    max_workers = max(1, min(len(points), workers or settings.WORKER_COUNT))
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        direct = list(executor.map(lambda z: ops.apply_projection_direct(phi, z), points))
    values = projection_sign * np.array([r.value for r in direct], dtype=complex)
    matrix = np.stack([np.prod(points ** np.asarray(mu), axis=-1) for mu in basis], axis=-1)
    coefficients, *_ = np.linalg.lstsq(matrix, values, rcond=None)
    fit_residual = float(np.max(np.abs(matrix @ coefficients - values)) / max(1.0, float(np.max(np.abs(values)))))
    moment_coefficients = np.array(
        [projection_sign * moments[mu].value if mu in moments else 0j for mu in basis], dtype=complex
    )

    holomorphy = None
    if check_holomorphy and len(points) > len(basis):
        z0 = points[-1]
        direction = np.zeros(3, dtype=complex)
        direction[int(np.argmin(np.abs(z0)))] = 1.0

        def along(t: np.ndarray) -> np.ndarray:
            flat = [ops.apply_projection_direct(phi, z0 + complex(c) * direction).value for c in np.ravel(t)]
            return np.asarray(flat, dtype=complex).reshape(np.shape(t))

        holomorphy = float(abs(wirtinger_dbar(along, np.asarray(0j), 0.05)))

    result = ExtensionResult(
        twist=s,
        basis=basis,
        coefficients=coefficients,
        moment_coefficients=moment_coefficients,
        fit_residual=fit_residual,
        agreement=agreement,
        holomorphy=holomorphy,
        projection_sign=projection_sign,
        exclusion_error=exclusion_error,
        grid=ops.grid,
    )
    logger.info(
        f"Extension fitted | curve={curve.label} | s={s} | grid={ops.grid.label} | polynomial={result.polynomial} "
        f"| fit_residual={fit_residual:.2e} | agreement={agreement:.2e} | sign={projection_sign}"
    )
    if fit_residual > tolerance:
        raise ExtensionFitError(
            f"fit residual {fit_residual:.3e} > {tolerance:.1e} | agreement={agreement:.3e} "
            f"| exclusion_error={exclusion_error:.3e} | grid={ops.grid.label}"
        )
    return result


def extension_difference(
    curve: PlaneCurve,
    first: ExtensionResult,
    second: ExtensionResult,
) -> float:
    """
    Residual of fitting the difference of two extensions against f·(degree s − d monomials).

    Near zero when the extended sections agree on X.
    """
    if first.twist != second.twist:
        raise ValueError("extensions of different twists")
    u = curve.universe
    basis = first.basis
    index = {mu: i for i, mu in enumerate(basis)}
    zeta = u.family_slices["zeta"]
    difference = first.coefficients - second.coefficients
    columns = []
    for m in monomial_exponents(3, first.twist - curve.degree):
        monomial = u.ring.one
        for j, e in enumerate(m):
            monomial = monomial * u.gen("zeta", j) ** e
        column = np.zeros(len(basis), dtype=complex)
        for monom, c in (curve.f * monomial).items():
            column[index[tuple(monom[zeta.start : zeta.stop])]] += complex(float(c.x), float(c.y))
        columns.append(column)
    scale = max(1.0, float(np.max(np.abs(difference))))
    if not columns:
        return float(np.max(np.abs(difference))) / scale
    matrix = np.stack(columns, axis=-1)
    solution, *_ = np.linalg.lstsq(matrix, difference, rcond=None)
    return float(np.max(np.abs(matrix @ solution - difference))) / scale


# ---------------------------------------------------------------- self-test


@dataclass
class CalibrationRecord:
    curve: str
    twist: int
    kernel_sign: int
    projection_sign: int
    grids: list[int]
    residuals: list[float]
    losing_residuals: list[float]
    projection_residual: float
    order: Optional[float]
    exclusion_error: float

    @property
    def residual(self) -> float:
        return self.residuals[-1]

    @property
    def losing_residual(self) -> float:
        return self.losing_residuals[-1]

    def to_dict(
        self,
    ) -> dict[str, Any]:
        return {
            "curve": self.curve,
            "twist": self.twist,
            "kernel_sign": self.kernel_sign,
            "projection_sign": self.projection_sign,
            "grids": self.grids,
            "residuals": self.residuals,
            "losing_residuals": self.losing_residuals,
            "projection_residual": self.projection_residual,
            "order": self.order,
            "exclusion_error": self.exclusion_error,
        }


def koppelman_selftest(
    curve: PlaneCurve,
    s: int,
    psi: SectionRep,
    grids: Sequence[int] = (16, 32, 64),
    targets: Optional[Sequence[CurveTarget]] = None,
    tolerance: Optional[float] = None,
    ledger: Optional[Path] = None,
    persist: bool = True,
    operators: Optional[CurveOperators] = None,
) -> CalibrationRecord:
    """
    Fix the global signs of K and P on curves.

    σ_P is chosen so that P reproduces the holomorphic section ζ0^s on X;
    σ_K then minimizes |σ_K K(∂̄ψ) + σ_P Pψ − ψ| on the finest grid. The
    losing candidate differs from the winner by 2K(∂̄ψ), generically O(1).

    Raises:
        CalibrationError: neither σ_K brings the residual below
            CALIBRATION_FACTOR·tolerance, or the winner does not converge
    """
    tolerance = tolerance or settings.KOPPELMAN_TOLERANCE
    grids = list(grids)
    u = curve.universe
    holomorphic = polynomial_section(u, u.gen("zeta", 0) ** s, s)
    phi = dbar_section(psi)
    targets = list(targets) if targets is not None else curve_targets(curve)
    base = operators or CurveOperators(curve, s, GridSpec.square(grids[0]))

    kernel_values, projected, expected = [], [], []
    projection_residuals = {1: 0.0, -1: 0.0}
    exclusion_error = 0.0
    for n in grids:
        ops = base.with_grid(GridSpec.square(n))
        solution = solve_dbar_curve(curve, s, phi, targets=targets, operators=ops, kernel_sign=1, wirtinger=False)
        moments = ops.projection_moments(psi)
        kernel_values.append(solution.values)
        projected.append(np.array([complex(ops.from_moments(moments, t.zeta)) for t in targets]))
        expected.append(np.array([ops.section_at(psi, t) for t in targets]))
        exclusion_error = max(exclusion_error, solution.exclusion_error)
        if n == grids[-1]:
            reproduced = ops.projection_moments(holomorphic)
            for sign in (1, -1):
                projection_residuals[sign] = float(
                    max(
                        abs(sign * complex(ops.from_moments(reproduced, t.zeta)) - ops.section_at(holomorphic, t))
                        for t in targets
                    )
                )
    sign_p = min(projection_residuals, key=projection_residuals.get)

    def residuals(sign_k: int) -> list[float]:
        return [
            float(np.max(np.abs(sign_k * k + sign_p * p - e))) for k, p, e in zip(kernel_values, projected, expected)
        ]

    candidates = {sign: residuals(sign) for sign in (1, -1)}
    sign_k = min(candidates, key=lambda sign: candidates[sign][-1])
    winner, loser = candidates[sign_k], candidates[-sign_k]
    order = convergence_slope(grids, winner) if len(grids) >= 2 else None

    record = CalibrationRecord(
        curve=curve.label,
        twist=s,
        kernel_sign=sign_k,
        projection_sign=sign_p,
        grids=grids,
        residuals=winner,
        losing_residuals=loser,
        projection_residual=projection_residuals[sign_p],
        order=order,
        exclusion_error=exclusion_error,
    )
    logger.info(
        f"Self-test done | curve={curve.label} | s={s} | kernel_sign={sign_k} | projection_sign={sign_p} "
        f"| residuals={winner} | losing={loser[-1]:.3e} | order={order}"
    )
    converging = order is None or order >= settings.NO_CONVERGENCE_SLOPE or winner[-1] <= tolerance
    if winner[-1] > settings.CALIBRATION_FACTOR * tolerance or not converging:
        raise CalibrationError(
            f"best residual {winner[-1]:.3e} (sign {sign_k}), other {loser[-1]:.3e}, order {order}"
        )
    if persist:
        record_sign(
            LEDGER_NAME,
            SignRecord(
                kernel_sign=sign_k,
                projection_sign=sign_p,
                residual=winner[-1],
                losing_residual=loser[-1],
                grid=GridSpec.square(grids[-1]).label,
                source=f"selftest:{curve.label}:s={s}:{psi.label}",
            ),
            path=ledger,
        )
    return record
