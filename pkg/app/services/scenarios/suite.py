"""
The regression suite: exact identities, a seeded Hefer corpus and the
closed-form kernel checks, collected into one report.
"""

from typing import Optional

import numpy as np
from sympy.polys.rings import PolyElement

from app.core.logger import get_logger
from app.models.scenario import Report
from app.services.algebra.universe import Universe, get_universe
from app.services.curves import fermat_curve
from app.services.forms import contract, eta_field, nabla_eta
from app.services.hefer import (
    HeferScalar,
    cusp_hefer_variants,
    fermat_hefer,
    hefer_decompose,
    select_hefer_variant,
    tau_star_residual,
)
from app.services.kernels import (
    assemble_plane_kernel,
    cusp_curve,
    fermat_closed_form,
    on_curve_pairs,
    plane_relation_residual,
    reduction_identity_residual,
)
from app.services.operators.sections import monomial_exponents
from app.services.weights import (
    GAMMA_VARIANTS,
    beta_potential_residual,
    build_alpha,
    build_b_B,
    build_beta,
    gamma_residual,
)

logger = get_logger(__name__)

KERNEL_TOLERANCE = 1e-12
B_IDENTITY_MAX_DIMENSION = 2
SCALING_FACTORS = (0.7 + 0.4j, -1.3 + 0.2j)


def identity_checks(
    n: int,
    powers: tuple[int, ...] = (1, 2),
) -> dict[str, bool]:
    """Exact weight identities on P^n; every entry must be True."""
    u = get_universe(n)
    b, B = build_b_B(n)
    checks = {f"N{n}:b_contraction": (contract(eta_field(u), b) - 1).is_zero()}
    if n <= B_IDENTITY_MAX_DIMENSION:
        checks[f"N{n}:B_nabla_eta"] = (nabla_eta(B) - 1).is_zero()
    for power in powers:
        checks[f"N{n}:alpha^{power}_weight"] = build_alpha(n, power).certificate.passed
        checks[f"N{n}:beta^{power}_weight"] = build_beta(n, power)[0].certificate.passed
    checks[f"N{n}:beta_potential"] = beta_potential_residual(n).is_zero()
    for variant in GAMMA_VARIANTS:
        for j in range(n + 1):
            checks[f"N{n}:gamma_{variant}_{j}"] = gamma_residual(n, variant, j).is_zero()
    if n == 2:
        checks["N2:tau_star_fermat"] = tau_star_residual(fermat_hefer(u)).is_zero()
    failed = [name for name, holds in checks.items() if not holds]
    logger.info(f"Identity checks done | N={n} | checks={len(checks)} | failed={failed}")
    return checks


def random_homogeneous(
    universe: Universe,
    degree: int,
    rng: np.random.Generator,
    coefficient_range: int = 5,
) -> PolyElement:
    """A homogeneous polynomial with random small integer coefficients, nonzero in ζ0^degree."""
    u = universe
    f = u.ring.zero
    for i, mu in enumerate(monomial_exponents(u.size, degree)):
        c = int(rng.integers(-coefficient_range, coefficient_range + 1))
        if i == 0 and c == 0:
            c = 1
        monomial = u.ring.one
        for j, e in enumerate(mu):
            monomial = monomial * u.gen("zeta", j) ** e
        f += u.constant(c) * monomial
    return f


def hefer_corpus(
    count: int = 20,
    seed: int = 0,
    degrees: tuple[int, ...] = (2, 3, 4),
    dimensions: tuple[int, ...] = (1, 2, 3),
) -> dict[str, HeferScalar]:
    """Telescoping Hefer forms of ``count`` seeded random polynomials."""
    rng = np.random.default_rng(seed)
    corpus = {}
    for i in range(count):
        n = dimensions[i % len(dimensions)]
        degree = degrees[i % len(degrees)]
        f = random_homogeneous(get_universe(n), degree, rng)
        corpus[f"random{i}:N{n}:d{degree}"] = hefer_decompose(f, get_universe(n))
    return corpus


def fermat_regression(
    s: int = 1,
    count: int = 100,
    seed: int = 0,
) -> dict[str, float]:
    """Relative deviation of the Fermat kernel from its closed form, and its scaling defect."""
    curve = fermat_curve()
    kernel = assemble_plane_kernel(curve, s)
    zeta, z = on_curve_pairs(curve, count, seed=seed)
    values = kernel(zeta, z)
    expected = fermat_closed_form(zeta, z, s)
    closed_form = float(np.max(np.abs(values - expected) / np.abs(expected)))
    lam, mu = SCALING_FACTORS
    scaling = kernel.scaling_defect(zeta, z, lam, mu)
    logger.info(
        f"Fermat regression | s={s} | pairs={count} | closed_form={closed_form:.3e} | scaling={scaling:.3e}"
    )
    return {"closed_form": closed_form, "scaling": scaling}


def verify_suite(
    dimensions: tuple[int, ...] = (1, 2, 3),
    hefers: Optional[dict[str, HeferScalar]] = None,
    corpus_size: int = 20,
    seed: int = 0,
) -> Report:
    """
    Run every exact identity and the closed-form kernel regressions.

    Args:
        dimensions: Projective dimensions for the weight identities
        hefers: Additional named Hefer forms to check
        corpus_size: Number of random polynomials in the Hefer corpus
        seed: Corpus seed

    Returns:
        Report whose ``passed`` is False when any identity fails; failures
        are named in ``warnings``
    """
    report = Report(scenario="verify-suite")

    for n in dimensions:
        report.identities.update(identity_checks(n))

    corpus = hefer_corpus(corpus_size, seed)
    corpus.update(hefers or {})
    for name, hefer in corpus.items():
        report.identities[f"hefer:{name}"] = hefer.is_valid()

    u = get_universe(2)
    report.identities["cusp_variant"] = select_hefer_variant(cusp_hefer_variants(u))
    report.identities["cusp_plane_relation"] = plane_relation_residual(cusp_curve()).is_zero()
    fermat = fermat_curve()
    report.identities["fermat_plane_relation"] = plane_relation_residual(fermat).is_zero()
    kernel = assemble_plane_kernel(fermat, 1)
    report.identities["fermat_reduction"] = reduction_identity_residual(kernel.hefer, kernel.kappa).is_zero()

    regression = fermat_regression()
    report.residuals.update({f"fermat_{name}": value for name, value in regression.items()})
    for name, value in regression.items():
        if value > KERNEL_TOLERANCE:
            report.fail(f"fermat {name} residual {value:.3e} > {KERNEL_TOLERANCE:.0e}")

    for name, holds in report.identities.items():
        if holds is False:
            report.fail(f"identity failed: {name}")
    logger.info(f"Verify suite done | identities={len(report.identities)} | passed={report.passed}")
    return report
