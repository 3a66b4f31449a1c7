"""
Plane curves as branched covers: validation, branch and singular points,
fiber sampling, sheet continuation, pullback and the cusp parametrization.

Run with:
    pytest test_curves.py
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from app.core.errors import ContinuationBreakError, FiberVariableDegenerateError, RepeatedFactorError
from app.services.algebra import get_universe, parse_poly
from app.models.scenario import GridSpec
from app.services.curves import (
    area_factor,
    chart_sample,
    cusp_parametrization,
    fermat_curve,
    fiber_roots,
    plane_curve_new,
    pullback,
    rational_param_new,
    rational_param_sample,
    sample_points,
    track_sheets,
)
from app.services.forms import FormExpr
from app.services.kernels import cusp_curve

U = get_universe(2)


def curve(text: str, **kwargs):
    return plane_curve_new(parse_poly(text, U), **kwargs)


def test_fermat_cover_data():
    fermat = fermat_curve()
    assert fermat.label == "fermat"
    assert fermat.smooth
    assert fermat.degree == 3
    assert fermat.sheets == 3
    assert fermat.fiber_variable == 2
    assert fermat.base_variables == (0, 1)

    branch = np.concatenate([fermat.branch_points[0], 1.0 / fermat.branch_points[1]])
    assert branch.size == 3
    np.testing.assert_allclose(branch**3, -1.0, atol=1e-10)
    assert not np.any(np.isclose(np.abs(branch), fermat.split_radius))
    assert fermat.chart_radius(1) == pytest.approx(1.0 / fermat.chart_radius(0))


def test_cusp_is_singular_at_the_origin_of_its_chart():
    cusp = cusp_curve()
    assert cusp.label == "cusp"
    assert not cusp.smooth
    assert len(cusp.singular_points) == 1
    point = cusp.singular_points[0]
    assert abs(point[0]) > 0
    np.testing.assert_allclose(point[1:] / point[0], 0.0, atol=1e-6)


def test_repeated_factor_is_rejected():
    with pytest.raises(RepeatedFactorError, match="repeated factor"):
        curve("(z0 - z1)^2*z2")


def test_degenerate_fiber_variable_is_rejected():
    with pytest.raises(FiberVariableDegenerateError):
        curve("z0*z2 + z0*z1")
    with pytest.raises(FiberVariableDegenerateError):
        curve("z0^2 + z1^2", fiber_variable=2)


def test_fiber_variable_fallback():
    conic = curve("z0*z2 - z1^2 + z2^2 + z0^2 - z0*z1")
    assert conic.fiber_variable == 2
    assert conic.sheets == 2
    assert conic.smooth


def test_inhomogeneous_input_is_rejected():
    with pytest.raises(ValueError):
        curve("z0^3 + z1^2 + z2^3")


def test_fiber_samples_lie_on_the_curve():
    fermat = fermat_curve()
    base = 0.5 * np.exp(2j * np.pi * np.arange(8) / 8)
    samples = sample_points(fermat, 0, base)
    assert samples.zeta.shape == (8, 3, 3)
    assert samples.sheets == 3
    assert np.max(samples.residual) < 1e-12
    np.testing.assert_allclose(samples.zeta[..., 0], 1.0)
    np.testing.assert_allclose(samples.zeta[..., 1], base[:, None] * np.ones((1, 3)))

    grad = fermat.gradient(samples.zeta)
    np.testing.assert_allclose(np.sum(grad * samples.tangent, axis=-1), 0.0, atol=1e-10)


def test_roots_cover_every_sheet():
    fermat = fermat_curve()
    roots = fiber_roots(fermat, 1, np.array([0.1 + 0.2j]))
    assert roots.shape == (1, 3)
    assert len({np.round(r, 8) for r in roots[0]}) == 3


def circle(center: complex, radius: float, n: int = 64) -> list[complex]:
    path = [center + radius * np.exp(2j * np.pi * k / n) for k in range(n)]
    return path + [path[0]]


def test_loop_away_from_branch_points_keeps_sheets():
    fermat = fermat_curve()
    table, permutation = track_sheets(fermat, 0, circle(0.0, 0.3))
    assert table.shape == (65, 3)
    assert list(permutation) == [0, 1, 2]


def test_loop_around_a_branch_point_permutes_sheets():
    fermat = fermat_curve()
    _, permutation = track_sheets(fermat, 0, circle(-1.0, 0.2))
    assert sorted(permutation) == [0, 1, 2]
    assert all(permutation[i] != i for i in range(3))


def test_open_path_has_no_permutation():
    _, permutation = track_sheets(fermat_curve(), 0, [0.0, 0.1, 0.2j])
    assert permutation is None


def test_path_through_a_branch_point_breaks_in_strict_mode():
    with pytest.raises(ContinuationBreakError):
        track_sheets(fermat_curve(), 0, [-0.5, -1.0, -1.5])


def test_pullback_of_base_and_fiber_differentials():
    fermat = fermat_curve()
    samples = sample_points(fermat, 0, np.array([0.3 + 0.1j]))
    d_base = FormExpr.generator(U, "dzeta", 1)
    d_fiber = FormExpr.generator(U, "dzeta", 2)
    assert np.allclose(pullback(samples, d_base)["dt"], 1.0)
    np.testing.assert_allclose(pullback(samples, d_fiber)["dt"], samples.tangent[..., 2])

    area = d_base.wedge(FormExpr.generator(U, "dzetabar", 1))
    slots = pullback(samples, area)
    np.testing.assert_allclose(slots["dt_dtbar"], 1.0)
    assert area_factor() == -2j


def test_pullback_rejects_z_differentials():
    samples = sample_points(fermat_curve(), 0, np.array([0.2]))
    with pytest.raises(ValueError):
        pullback(samples, FormExpr.generator(U, "dzbar", 0))


def test_cusp_parametrization_lies_on_the_cusp():
    param = cusp_parametrization()
    assert param.degree == 3
    assert param.composed().is_zero()
    points = param.evaluate(0, np.array([0.5, 0.2 - 0.3j]))
    np.testing.assert_allclose(cusp_curve().evaluate(points), 0.0, atol=1e-14)


def test_parametrization_must_land_on_the_curve():
    t0, t1 = U.gen("t", 0), U.gen("t", 1)
    with pytest.raises(ValueError):
        rational_param_new((t0**2, t0 * t1, t1**2), U, parse_poly("z0^3 + z1^3 + z2^3", U))


def test_chart_sampling_covers_both_charts():
    fermat = fermat_curve()
    charts = chart_sample(fermat, GridSpec.square(8))
    assert [c.chart for c in charts] == [0, 1]
    for c in charts:
        assert c.zeta.shape[0] + len(c.skipped) == 64
        assert c.zeta.shape[1:] == (3, 3)
        assert np.max(c.residual) < 1e-10
        np.testing.assert_allclose(fermat.evaluate(c.zeta), 0.0, atol=1e-8)
        assert c.labels.shape == (c.zeta.shape[0], 3)


def test_rational_samples_lie_on_the_cusp():
    charts = rational_param_sample(cusp_parametrization(), GridSpec.square(16))
    assert len(charts) == 2
    for c in charts:
        assert c.zeta.shape == (256, 1, 3)
        np.testing.assert_allclose(cusp_curve().evaluate(c.zeta[:, 0, :]), 0.0, atol=1e-12)
        assert np.sum(c.weights) == pytest.approx(np.pi)
