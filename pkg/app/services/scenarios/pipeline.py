"""
Scenario pipelines: each scenario kind turns a validated ScenarioConfig into
a Report. Tolerance failures mark the report as failed; input and numerical
errors propagate as KoppelmanError and are mapped to exit codes by
``run_scenario``.
"""

from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from app.core.errors import KoppelmanError, TwistRangeError, UnsupportedRankError
from app.core.logger import get_logger, log_error
from app.models.scenario import Report, ScenarioConfig
from app.services.algebra.parsing import parse_poly
from app.services.algebra.universe import get_universe
from app.services.curves import PlaneCurve, fermat_curve, plane_curve_new, sample_points
from app.services.hefer import (
    cusp_hefer_variants,
    degree_ledger,
    hefer_decompose,
    koszul_data_new,
    koszul_hefer,
    select_hefer_variant,
    tau_star_residual,
)
from app.services.kernels import (
    assemble_plane_kernel,
    cusp_curve,
    cusp_kernel,
    cusp_leading_defect,
    kernel_residual_on_curve,
    on_curve_pairs,
    plane_relation_residual,
    reduction_identity_residual,
    twist_kappa,
    weighted_kernel_form,
)
from app.services.operators import (
    SectionRep,
    curve_convergence,
    curve_targets,
    dbar_section,
    extend_section,
    koppelman_selftest,
    manufactured_section,
    pn_convergence,
    pn_dual_form,
    pn_obstruction,
    pn_sign,
    pn_solve,
    polynomial_section,
    smooth_section,
)
from app.services.operators.pn import default_weight
from app.services.scenarios.suite import KERNEL_TOLERANCE, SCALING_FACTORS, fermat_regression, identity_checks
from app.utils.reports import emit_convergence

logger = get_logger(__name__)

FORM_TOLERANCE = 1e-8
OBSTRUCTION_FLOOR = 0.1
MOMENT_TOLERANCE = 1e-5
CUSP_LEAD_RATIO = 0.1


def resolve_curve(
    name: Optional[str],
) -> PlaneCurve:
    """Curve by name ("fermat" by default, "cusp") or by a homogeneous polynomial in z0, z1, z2."""
    if name in (None, "", "fermat"):
        return fermat_curve()
    if name == "cusp":
        return cusp_curve()
    return plane_curve_new(parse_poly(name, get_universe(2)), label=name)


def _pairs(
    values: np.ndarray,
) -> list[list[float]]:
    return [[complex(v).real, complex(v).imag] for v in np.ravel(values)]


class ScenarioPipeline:
    def __init__(
        self,
        config: ScenarioConfig,
    ):
        self.config = config
        self.tolerances = config.tolerances
        self.pipelines: dict[str, Callable[[], Report]] = {
            "verify-identities": self.verify_identities,
            "hefer": self.hefer,
            "kernel": self.kernel,
            "solve": self.solve,
            "extend": self.extend,
            "pn-solve": self.pn_solve,
            "selftest": self.selftest,
        }

        logger.info(
            f"ScenarioPipeline initialized | kind={config.kind} | curve={config.curve} | "
            f"twist={config.twist} | grid={config.grid.label}"
        )

    def run(
        self,
    ) -> Report:
        return self.pipelines[self.config.kind]()

    # ----------------------------------------------------------- helpers

    def _report(
        self,
    ) -> Report:
        return Report(scenario=self.config.kind, grid=self.config.grid.model_dump())

    def _curve_twist(
        self,
        curve: PlaneCurve,
    ) -> int:
        """Configured twist, or the smallest admissible one (s = d − 2); validated against the threshold."""
        s = self.config.twist if self.config.twist is not None else curve.degree - 2
        twist_kappa(curve, s)
        return s

    def _convergence_csv(
        self,
        name: str,
    ) -> Optional[Path]:
        if self.config.output is None:
            return None
        out = Path(self.config.output)
        return out.with_name(f"{out.stem}_{name}.csv")

    def _bound(
        self,
        report: Report,
        name: str,
        value: Optional[float],
        tolerance: float,
    ) -> None:
        if value is None:
            return
        report.residuals[name] = value
        if value > tolerance:
            report.fail(f"{name} residual {value:.3e} > {tolerance:.1e}")

    # ------------------------------------------------------------- exact

    def verify_identities(
        self,
    ) -> Report:
        report = self._report()
        n = self.config.dimension
        report.identities.update(identity_checks(n))
        u = get_universe(n)
        for text in self.config.polynomials:
            hefer = hefer_decompose(parse_poly(text, u), u)
            report.identities[f"hefer:{text}"] = hefer.is_valid()
            report.identities[f"tau_star:{text}"] = tau_star_residual(hefer).is_zero()
        for name, holds in report.identities.items():
            if not holds:
                report.fail(f"identity failed: {name}")
        return report

    def hefer(
        self,
    ) -> Report:
        report = self._report()
        n = self.config.dimension
        u = get_universe(n)
        texts = self.config.polynomials or ["+".join(f"z{j}^3" for j in range(n + 1))]
        polys = [parse_poly(text, u) for text in texts]
        hefers = [hefer_decompose(f, u) for f in polys]
        report.data["hefer"] = {text: h.to_dict() for text, h in zip(texts, hefers)}
        for text, h in zip(texts, hefers):
            report.identities[f"hefer:{text}"] = h.is_valid()

        if len(polys) <= n:
            data = koszul_data_new(polys, u, hefers)
            kh = koszul_hefer(data, check_relations=tuple(range(1, data.p + 1)))
            for k, holds in kh.relations.items():
                report.identities[f"hefer_relation:k={k}"] = holds
            s = self.config.twist if self.config.twist is not None else data.kappa0 - n
            ledger = degree_ledger(data, s, self.config.degree)
            report.data["degrees"] = ledger
            if not ledger["threshold_holds"]:
                report.warnings.append(
                    f"s={s} below the solvability threshold s ≥ κ₀ − N = {ledger['threshold']}"
                )
        else:
            report.warnings.append(f"p={len(polys)} > N={n}: Koszul data skipped")

        if self.config.curve == "cusp":
            report.identities["cusp_variant"] = select_hefer_variant(cusp_hefer_variants(get_universe(2)))
        for name, holds in report.identities.items():
            if holds is False:
                report.fail(f"identity failed: {name}")
        return report

    def kernel(
        self,
    ) -> Report:
        report = self._report()
        curve = resolve_curve(self.config.curve)
        s = self._curve_twist(curve)
        kernel = cusp_kernel(s) if curve.label == "cusp" else assemble_plane_kernel(curve, s)
        report.data["kernel"] = kernel.to_dict()
        report.data["curve"] = curve.to_dict()

        report.identities["plane_relation"] = plane_relation_residual(curve).is_zero()
        report.identities["reduction"] = reduction_identity_residual(kernel.hefer, kernel.kappa).is_zero()

        zeta, z = on_curve_pairs(curve, 50, seed=0)
        lam, mu = SCALING_FACTORS
        self._bound(report, "scaling", kernel.scaling_defect(zeta, z, lam, mu), KERNEL_TOLERANCE)
        samples = sample_points(curve, 0, 0.5 * np.exp(2j * np.pi * (np.arange(8) + 0.5) / 8))
        form = weighted_kernel_form(curve, s, kernel.hefer)
        on_curve = kernel_residual_on_curve(kernel, samples, z[0], form)
        self._bound(report, "on_curve_form", on_curve, FORM_TOLERANCE)

        if curve.label == "fermat":
            regression = fermat_regression(s)
            self._bound(report, "closed_form", regression["closed_form"], KERNEL_TOLERANCE)
        if curve.label == "cusp":
            defects = cusp_leading_defect(kernel)
            report.data["cusp_leading_defect"] = {str(r): d for r, d in defects.items()}
            separations = sorted(defects, reverse=True)
            series = [defects[r]["defect"] for r in separations]
            smallest = defects[separations[-1]]
            if any(b >= a for a, b in zip(series, series[1:])):
                report.fail("cusp kernel does not approach its leading term")
            if smallest["defect"] > CUSP_LEAD_RATIO * smallest["reference"]:
                report.fail(f"cusp leading-term defect above {CUSP_LEAD_RATIO} of the leading term")

        for name, holds in report.identities.items():
            if not holds:
                report.fail(f"identity failed: {name}")
        return report

    # ----------------------------------------------------------- curves

    def solve(
        self,
    ) -> Report:
        report = self._report()
        curve = resolve_curve(self.config.curve)
        s = self._curve_twist(curve)
        psi = manufactured_section(curve.universe, s)
        targets = curve_targets(curve, self.config.targets)
        study = curve_convergence(curve, s, psi, self.config.refinements, targets=targets)
        finest = study["solutions"][-1]

        report.grid = finest.operators.grid.model_dump()
        report.sign = {"kernel": finest.kernel_sign, "projection": finest.projection_sign}
        report.error_estimates["exclusion"] = max(sol.exclusion_error for sol in study["solutions"])
        report.data["section"] = psi.to_dict()
        report.data["study"] = {
            "grids": study["grids"],
            "koppelman": study["koppelman"],
            "wirtinger": study["wirtinger"],
        }
        report.data["solution"] = finest.to_dict()
        report.warnings.extend(finest.warnings)
        self._bound(report, "koppelman", finest.koppelman_residual, self.tolerances.koppelman)
        self._bound(report, "wirtinger", finest.wirtinger_residual, self.tolerances.wirtinger)

        for name in ("koppelman", "wirtinger"):
            series = list(zip(study["grids"], study[name]))
            if len(series) < 3:
                continue
            fit = emit_convergence(series, self._convergence_csv(name))
            report.slopes[name] = fit.slope
            if not fit.converged:
                report.fail(f"{name}: {fit.flag}")
        return report

    def extend(
        self,
    ) -> Report:
        report = self._report()
        curve = resolve_curve(self.config.curve)
        u = curve.universe
        text = self.config.section or f"z0^{self._curve_twist(curve)}"
        phi = polynomial_section(u, text, self.config.twist)
        s = phi.twist
        twist_kappa(curve, s)
        result = extend_section(curve, s, phi, grid=self.config.grid, tolerance=self.tolerances.extension)
        report.data["extension"] = result.to_dict()
        report.sign = {"projection": result.projection_sign}
        report.error_estimates["exclusion"] = result.exclusion_error
        self._bound(report, "fit", result.fit_residual, self.tolerances.extension)
        report.residuals["agreement"] = result.agreement
        self._bound(report, "holomorphy", result.holomorphy, self.tolerances.wirtinger)
        return report

    # ------------------------------------------------------------- P^N

    def pn_solve(
        self,
    ) -> Report:
        report = self._report()
        n = self.config.dimension
        if n not in (1, 2):
            raise UnsupportedRankError(f"P^N solves need N in (1, 2), got N={n}")
        ell = self.config.twist if self.config.twist is not None else 0
        q = self.config.degree
        u = get_universe(n)
        weight = self.config.weight if "weight" in self.config.model_fields_set else default_weight(n, ell)
        manufactured = self.config.manufactured

        if manufactured != "smooth":
            if ell > -n - 1:
                raise TwistRangeError(f"moment tests need l <= -{n + 1}, got {ell}")
            if manufactured == "zero-moment":
                if n != 1:
                    raise UnsupportedRankError("zero-moment data is built on P^1")
                phi = dbar_section(smooth_section(u, ell))
            else:
                phi = pn_dual_form(n, ell)
            moments = pn_obstruction(n, ell, phi, grid=self.config.grid)
            report.obstruction = _pairs(moments)
            size = float(np.max(np.abs(moments)))
            report.residuals["obstruction"] = size
            if manufactured == "zero-moment" and size > MOMENT_TOLERANCE:
                report.fail(f"obstruction {size:.3e} of an exact form exceeds {MOMENT_TOLERANCE:.0e}")
            if manufactured == "unit-moment":
                if size < OBSTRUCTION_FLOOR:
                    report.fail(f"unit-moment obstruction not detected ({size:.3e})")
                else:
                    report.warnings.append("nonzero obstruction: φ is not ∂̄-exact")
                if n == 1 and len(self.config.refinements) >= 3:
                    self._unit_moment_study(report, ell, phi)
            return report

        if q == 1:
            psi = smooth_section(u, ell)
            solution = pn_solve(n, ell, 1, dbar_section(psi), grid=self.config.grid, psi=psi, weight=weight)
            self._bound(report, "manufactured", solution.manufactured_residual, self.tolerances.pn)
            self._bound(report, "wirtinger", solution.wirtinger_residual, self.tolerances.wirtinger)
            if solution.projection_vanishes is False and weight == "alpha":
                report.fail("projection term of a (0,1)-form is not identically zero")
        elif q == 0:
            if ell < 0:
                raise TwistRangeError(f"holomorphic sections need l >= 0, got {ell}")
            phi = polynomial_section(u, u.gen("zeta", 0) ** ell, ell)
            solution = pn_solve(n, ell, 0, phi, grid=self.config.grid, weight=weight)
            expected = np.array([complex(phi.value(t)) for t in solution.targets])
            reproduction = float(np.max(np.abs(solution.values - expected)))
            self._bound(report, "reproduction", reproduction, self.tolerances.pn)
        else:
            raise UnsupportedRankError(f"P^N solves handle q in (0, 1), got q={q}")

        report.grid = solution.grid.model_dump()
        report.sign = {"pn": solution.sign}
        report.data["solution"] = solution.to_dict()
        report.warnings.extend(solution.warnings)
        return report

    def _unit_moment_study(
        self,
        report: Report,
        ell: int,
        phi: SectionRep,
    ) -> None:
        """Refine the β solve of unit-moment data on P^1; its Wirtinger residual must stall."""
        study = pn_convergence(1, ell, phi, self.config.refinements, weight="beta")
        report.data["study"] = {"grids": study["grids"], "wirtinger": study["wirtinger"]}
        report.slopes["wirtinger"] = study["orders"]["wirtinger"]
        report.warnings.extend(study["warnings"])
        if not study["warnings"]:
            report.fail(f"unit-moment data converged with order {study['orders']['wirtinger']:.2f}")

    # ---------------------------------------------------------- selftest

    def selftest(
        self,
    ) -> Report:
        report = self._report()
        curve = resolve_curve(self.config.curve)
        s = self._curve_twist(curve)
        psi = manufactured_section(curve.universe, s)
        record = koppelman_selftest(
            curve,
            s,
            psi,
            grids=self.config.refinements,
            targets=curve_targets(curve, self.config.targets),
            tolerance=self.tolerances.koppelman,
        )
        report.sign = {"curve": record.to_dict()}
        report.error_estimates["exclusion"] = record.exclusion_error
        self._bound(report, "koppelman", record.residual, self.tolerances.koppelman)
        report.residuals["losing"] = record.losing_residual
        if record.order is not None:
            report.slopes["koppelman"] = record.order

        report.sign["pn"] = pn_sign()
        return report


def scenario_context(
    config: ScenarioConfig,
    **extra: Any,
) -> dict[str, Any]:
    """Coordinates of a scenario for error logs; fields a kind does not use stay None."""
    on_curve = config.kind in ("kernel", "solve", "extend", "selftest")
    return {
        "kind": config.kind,
        "curve": config.curve or ("fermat" if on_curve else None),
        "dimension": None if on_curve else config.dimension,
        "twist": config.twist,
        "degree": config.degree if config.kind == "pn-solve" else None,
        "weight": config.weight if config.kind == "pn-solve" else None,
        "grid": config.grid.label,
        **extra,
    }


def run_scenario(
    config: ScenarioConfig,
) -> tuple[Report, int]:
    """
    Run one scenario.

    Returns:
        (report, exit code): 0 when every tolerance holds, 1 on tolerance or
        numerical failure, 2 on input errors
    """
    try:
        report = ScenarioPipeline(config).run()
    except ValueError as e:
        code = e.exit_code if isinstance(e, KoppelmanError) else 2
        log_error(logger, "Scenario failed", e, scenario_context(config, exit_code=code))
        report = Report(scenario=config.kind, passed=False, warnings=[str(e)])
        report.data["error"] = {"type": type(e).__name__, "exit_code": code}
        return report, code
    code = 0 if report.passed else 1
    logger.info(f"Scenario finished | kind={config.kind} | passed={report.passed} | exit_code={code}")
    return report, code
