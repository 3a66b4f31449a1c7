"""
Hefer forms, the τ* substitution, Koszul data and the Hefer-morphism
relation.

Run with:
    pytest test_hefer.py
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from app.core.errors import PointOnVarietyError, UnsupportedRankError
from app.services.algebra import get_universe, parse_poly
from app.services.forms import nabla_eta
from app.services.hefer import (
    HeferScalar,
    cusp_hefer_variants,
    degree_ledger,
    eval_sigma,
    fermat_hefer,
    hefer_decompose,
    koszul_data_new,
    koszul_differential,
    koszul_hefer,
    select_hefer_variant,
    tau_star,
    tau_star_poly,
    tau_star_residual,
)
from app.services.scenarios import hefer_corpus, random_homogeneous, verify_suite


def test_fermat_hefer_identity():
    u = get_universe(2)
    hefer = fermat_hefer(u)
    assert hefer.is_valid()
    assert hefer.component_degrees() == [2, 2, 2]


def test_cusp_identity_holds_for_the_negated_variant():
    variants = cusp_hefer_variants(get_universe(2))
    assert not variants["displayed"].is_valid()
    assert variants["negated"].is_valid()
    assert select_hefer_variant(variants) == "negated"


def test_cusp_variants_need_the_plane():
    with pytest.raises(ValueError):
        cusp_hefer_variants(get_universe(1))


def test_select_fails_when_no_variant_holds():
    variants = cusp_hefer_variants(get_universe(2))
    with pytest.raises(ValueError):
        select_hefer_variant({"displayed": variants["displayed"]})


@pytest.mark.parametrize("text", ["z0^2 + z1", "0"])
def test_decomposition_needs_homogeneous_input(text):
    u = get_universe(1)
    with pytest.raises(ValueError):
        hefer_decompose(parse_poly(text, u), u)


def test_decomposition_accepts_polynomials_in_w():
    u = get_universe(1)
    f = u.gen("w", 0) ** 2 * u.gen("w", 1)
    hefer = hefer_decompose(f, u)
    assert hefer.degree == 3
    assert hefer.is_valid()


def test_random_corpus_is_valid():
    corpus = hefer_corpus(count=20, seed=0)
    assert len(corpus) == 20
    for name, hefer in corpus.items():
        assert hefer.is_valid(), name
        assert all(d == hefer.degree - 1 for d in hefer.component_degrees()), name


def test_random_homogeneous_has_requested_degree():
    u = get_universe(2)
    f = random_homogeneous(u, 4, np.random.default_rng(3))
    assert f
    assert all(sum(m) == 4 for m in f.keys())


def test_perturbed_hefer_form_fails_the_suite():
    u = get_universe(1)
    good = hefer_decompose(parse_poly("z0^3 - 2*z0*z1^2", u), u)
    numerators = (good.numerators[0] + u.gen("z", 1) ** 2,) + good.numerators[1:]
    bad = HeferScalar(u, good.f, good.degree, numerators, "perturbed")
    assert not bad.is_valid()

    report = verify_suite(dimensions=(1,), hefers={"perturbed": bad}, corpus_size=2)
    assert report.identities["hefer:perturbed"] is False
    assert not report.passed
    assert "identity failed: hefer:perturbed" in report.warnings


def test_tau_star_naturality():
    u = get_universe(1)
    hefer = hefer_decompose(parse_poly("z0^2 + 3*z0*z1 - z1^2", u), u)
    assert tau_star_residual(hefer).is_zero()
    assert tau_star(hefer).bundle == (0, 2)


def test_tau_star_sign_convention():
    u = get_universe(2)
    hefer = fermat_hefer(u)
    assert hefer.contracted() == hefer.f_in("w") - hefer.f_in("z")
    assert nabla_eta(tau_star(hefer)) == tau_star_poly(hefer.f_in("z") - hefer.f_in("w"), u)
    data = koszul_data_new([hefer.f], u, hefers=[hefer])
    kh = koszul_hefer(data, max_rank=1, check_relations=(1,))
    assert kh.component(1, (0,)) == -tau_star(hefer)
    assert kh.relations[1] is True


def test_koszul_data_and_ledger_for_the_fermat_cubic():
    u = get_universe(2)
    data = koszul_data_new([fermat_hefer(u).f], u)
    assert data.p == 1
    assert data.kappa0 == 3
    assert data.kappa(1) == 0
    assert data.regularity() == 3
    assert data.minor_variables == (2,)

    ledger = degree_ledger(data, s=1)
    assert ledger["threshold"] == 1
    assert ledger["threshold_holds"] is True
    assert ledger["kappa_q"] == 3
    assert degree_ledger(data, s=0)["threshold_holds"] is False


def test_koszul_differential_signs():
    u = get_universe(2)
    f1, f2 = parse_poly("z1", u), parse_poly("z2^2", u)
    data = koszul_data_new([f1, f2], u)
    assert koszul_differential(data, (0, 1)) == {(1,): f1, (0,): -f2}
    assert data.regularity() == 2
    assert data.koszul_degrees(2) == {(0, 1): 3}


def test_rank_limits():
    u = get_universe(1)
    with pytest.raises(UnsupportedRankError):
        koszul_data_new([parse_poly("z0", u), parse_poly("z1", u)], u)
    data = koszul_data_new([parse_poly("z0*z1", u)], u)
    with pytest.raises(UnsupportedRankError):
        koszul_hefer(data, max_rank=2)


def test_hefer_relation_for_a_plane_curve():
    u = get_universe(2)
    data = koszul_data_new([fermat_hefer(u).f], u, hefers=[fermat_hefer(u)])
    kh = koszul_hefer(data, check_relations=(1,))
    assert kh.relations == {1: True}


def test_hefer_relation_for_a_complete_intersection():
    u = get_universe(2)
    data = koszul_data_new([parse_poly("z1", u), parse_poly("z2 - z0", u)], u)
    kh = koszul_hefer(data, check_relations=(1, 2))
    assert kh.relations == {1: True, 2: True}


def test_sigma_inverts_f_off_the_curve():
    u = get_universe(2)
    data = koszul_data_new([fermat_hefer(u).f], u)
    zeta = np.array([[1.0, 0.5j, -0.3], [0.2, 1.0, 1.0 + 1.0j]])
    sigma = eval_sigma(data, zeta)
    values = data.evaluate(zeta)
    np.testing.assert_allclose(np.sum(sigma * values, axis=0), 1.0, atol=1e-12)

    with pytest.raises(PointOnVarietyError, match="point on X"):
        eval_sigma(data, np.array([1.0, -1.0, 0.0]))
