"""Inequality reports: equality cases, strictness, audits, identity residuals."""

import math

import numpy as np
import pytest

from fbmink import (
    CapSpec,
    DimensionTooLow,
    NonSmoothTestFunction,
    PerturbationSpec,
    QuadratureRule,
    SupportKind,
    af_report,
    hypothesis_audit,
    make_perturbed_cap,
    make_umbilical_cap,
    make_support,
    minkowski_report,
    reilly_residual,
    schur_report,
)

from conftest import canonical_scenario, canonical_support

RULE24 = QuadratureRule(24)
ALL_KINDS = list(SupportKind)


# -- equality cases ---------------------------------------------------------------


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_minkowski_equality_on_umbilical_caps(kind):
    report = minkowski_report(canonical_scenario(kind), RULE24)
    assert abs(report.relative_deficit) <= 1e-6
    assert report.equality_flag
    assert report.hypothesis_ok


def test_minkowski_closed_form_hemisphere(hemisphere):
    """Unit hemisphere over the flat plane: lhs = rhs = 4 pi^2 exactly."""
    report = minkowski_report(hemisphere, RULE24)
    four_pi_sq = 4.0 * math.pi**2
    assert np.isclose(report.lhs, four_pi_sq, rtol=1e-10)
    assert np.isclose(report.rhs, four_pi_sq, rtol=1e-10)
    assert np.isclose(report.integrals["weighted_area"], 2.0 * math.pi, rtol=1e-12)
    assert np.isclose(report.integrals["weighted_volume"], 2.0 * math.pi / 3.0, rtol=1e-12)
    assert np.isclose(report.integrals["weighted_mean_curvature"], 4.0 * math.pi, rtol=1e-12)


def test_minkowski_closed_form_scales_with_radius():
    # plane support, weight 1: lhs = rhs = 4 pi^2 r^4
    support = canonical_support(SupportKind.EUCLIDEAN_PLANE)
    for r in (0.5, 2.0):
        sc = make_umbilical_cap(CapSpec(support=support, radius=r))
        report = minkowski_report(sc, RULE24)
        assert np.isclose(report.lhs, 4.0 * math.pi**2 * r**4, rtol=1e-10)
        assert abs(report.relative_deficit) <= 1e-12


def test_af_equality_on_unit_hemisphere(hemisphere):
    report = af_report(hemisphere, RULE24)
    sixteen_pi_sq = 16.0 * math.pi**2
    assert abs(report.lhs - sixteen_pi_sq) <= 1e-6 * sixteen_pi_sq
    assert abs(report.rhs - sixteen_pi_sq) <= 1e-6 * sixteen_pi_sq
    assert abs(report.relative_deficit) <= 1e-6
    assert report.equality_flag


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_af_equality_on_umbilical_caps(kind):
    report = af_report(canonical_scenario(kind), RULE24)
    assert abs(report.relative_deficit) <= 1e-6
    assert report.hypothesis_ok


# -- strictness under perturbation ------------------------------------------------


def perturbed_hemisphere(eps, power=3):
    support = canonical_support(SupportKind.EUCLIDEAN_PLANE)
    return make_perturbed_cap(CapSpec(support=support, radius=1.0),
                              PerturbationSpec(epsilon=eps, power=power))


def test_perturbed_deficits_strictly_positive_and_quadratic():
    eps = np.array([0.02, 0.04, 0.08])
    mink = np.array([minkowski_report(perturbed_hemisphere(e), RULE24).deficit
                     for e in eps])
    af = np.array([af_report(perturbed_hemisphere(e), RULE24).deficit for e in eps])
    assert np.all(mink > 0.0)
    assert np.all(af > 0.0)
    # leading order c eps^2: doubling eps roughly quadruples the deficit
    assert 3.0 < mink[1] / mink[0] < 5.0
    assert 3.0 < mink[2] / mink[1] < 5.0
    assert 3.0 < af[1] / af[0] < 5.0


def test_deficit_sign_convention_holds_under_hypotheses():
    # deficit is oriented so the theorem asserts deficit >= 0
    for e in (0.0, 0.05):
        sc = perturbed_hemisphere(e) if e else canonical_scenario(SupportKind.EUCLIDEAN_PLANE)
        for build in (minkowski_report, af_report):
            report = build(sc, RULE24)
            assert report.deficit >= -1e-12
            assert report.hypothesis_ok


def test_af_normalized_form_sign_agreement_randomized():
    """Normalized and displayed deficits agree in sign on random perturbations."""
    rng = np.random.default_rng(42)
    kinds = [SupportKind.EUCLIDEAN_PLANE, SupportKind.EUCLIDEAN_SPHERE,
             SupportKind.HOROSPHERE, SupportKind.EQUIDISTANT,
             SupportKind.SPH_GEODESIC_SPHERE]
    checked = 0
    while checked < 20:
        kind = kinds[checked % len(kinds)]
        support = canonical_support(kind)
        from fbmink import default_cap_spec
        base = default_cap_spec(support)
        radius = base.radius * float(rng.uniform(0.8, 1.1))
        eps = float(rng.uniform(0.02, 0.10)) * (1 if rng.uniform() < 0.5 else -1)
        power = int(rng.integers(3, 6))
        sc = make_perturbed_cap(
            CapSpec(support=support, radius=radius),
            PerturbationSpec(epsilon=eps, power=power))
        report = af_report(sc, QuadratureRule(16))
        norm_deficit = report.extras["normalized_deficit"]
        assert report.deficit > 0.0
        assert norm_deficit > 0.0  # same sign as the displayed deficit
        checked += 1


def test_af_normalized_deficit_is_exact_rearrangement():
    """The mean-curvature-pinching form differs from the quadratic form by
    an exact algebraic identity, so the two deficits agree after dividing
    by the weighted area."""
    sc = perturbed_hemisphere(0.06)
    report = af_report(sc, RULE24)
    area_v = report.integrals["weighted_area"]
    lhs_n = report.extras["normalized_lhs"]
    rhs_n = report.extras["normalized_rhs"]
    assert np.isclose(report.extras["normalized_deficit"], rhs_n - lhs_n, rtol=1e-12)
    assert np.isclose(report.extras["normalized_deficit"],
                      report.deficit / area_v, rtol=1e-9)


# -- almost-Schur -----------------------------------------------------------------


def r4_scenario(eps=0.0):
    support = make_support(SupportKind.EUCLIDEAN_PLANE, 4)
    spec = CapSpec(support=support, radius=1.0)
    if eps:
        return make_perturbed_cap(spec, PerturbationSpec(epsilon=eps, power=3))
    return make_umbilical_cap(spec)


def test_schur_equality_on_umbilical_cap_r4():
    report = schur_report(r4_scenario(), QuadratureRule(12))
    assert abs(report.lhs) <= 1e-10
    assert abs(report.rhs) <= 1e-10


def test_schur_strict_on_perturbed_cap_r4():
    report = schur_report(r4_scenario(0.08), QuadratureRule(12))
    assert report.deficit > 1e-6
    assert report.lhs < report.rhs


def test_schur_rejects_low_dimensions(hemisphere):
    with pytest.raises(DimensionTooLow):
        schur_report(hemisphere, QuadratureRule(8))


def test_af_rejects_dimension_two():
    # sphere supports build fine at n = 2, where the bound is void
    support = make_support(SupportKind.EUCLIDEAN_SPHERE, 2, radius=1.0)
    sc = make_umbilical_cap(CapSpec(support=support, radius=0.5))
    with pytest.raises(DimensionTooLow):
        af_report(sc, QuadratureRule(8))


def test_minkowski_holds_at_n2_on_sphere_support():
    support = make_support(SupportKind.EUCLIDEAN_SPHERE, 2, radius=1.0)
    sc = make_umbilical_cap(CapSpec(support=support, radius=0.5))
    report = minkowski_report(sc, QuadratureRule(32))
    assert abs(report.relative_deficit) <= 1e-12


def test_plane_supports_reject_dimension_two():
    support = make_support(SupportKind.EUCLIDEAN_PLANE, 2)
    with pytest.raises(DimensionTooLow):
        make_umbilical_cap(CapSpec(support=support, radius=1.0))


# -- report contract --------------------------------------------------------------


def test_report_serialization_contract(hemisphere):
    doc = minkowski_report(hemisphere, RULE24).to_dict()
    for key in ("theorem_id", "lhs", "rhs", "deficit", "relative_deficit",
                "equality_flag", "hypothesis", "integrals", "quadrature_meta"):
        assert key in doc
    assert doc["theorem_id"] == "Minkowski"
    assert doc["quadrature_meta"]["level"] == 24
    assert af_report(hemisphere, RULE24).to_dict()["theorem_id"] == "AF"
    assert schur_report(r4_scenario(), QuadratureRule(8)).to_dict()["theorem_id"] == "AlmostSchur"


def test_relative_deficit_definition(hemisphere):
    report = minkowski_report(perturbed_hemisphere(0.05), RULE24)
    expected = report.deficit / max(abs(report.lhs), abs(report.rhs))
    assert np.isclose(report.relative_deficit, expected, rtol=1e-14)


def test_equality_flag_uses_relative_tolerance():
    report = minkowski_report(perturbed_hemisphere(0.05), RULE24)
    assert not report.equality_flag
    loose = minkowski_report(perturbed_hemisphere(0.05), RULE24,
                             equality_tolerance=1.0)
    assert loose.equality_flag


def test_hypothesis_audit_fields(hemisphere):
    audit = hypothesis_audit(hemisphere, RULE24)
    d = audit.to_dict()
    for key in ("convexity_min", "substatic_min", "weight_min",
                "orthogonality", "on_support", "principal_direction_residual"):
        assert key in d
    assert d["convexity_min"] > 0.99
    assert d["weight_min"] == 1.0


# -- integral identity with boundary terms ---------------------------------------


@pytest.mark.parametrize("fname,bound", [("V", 1e-12), ("x1", 1e-5), ("x1^2", 1e-5)])
def test_reilly_residual_euclidean(hemisphere, fname, bound):
    rep = reilly_residual(hemisphere, fname, RULE24)
    assert abs(rep.residual) <= bound


def test_reilly_residual_hyperbolic():
    sc = canonical_scenario(SupportKind.EQUIDISTANT)
    for fname in ("V", "x1", "x1^2"):
        rep = reilly_residual(sc, fname, RULE24)
        assert abs(rep.residual) <= 1e-5
    assert abs(reilly_residual(sc, "V", RULE24).residual) <= 1e-12


def test_reilly_static_volume_term_vanishes(hemisphere):
    # the static tensor Lap(V) g - Hess V + (n-1) K V g is identically zero
    rep = reilly_residual(hemisphere, "x1^2", RULE24)
    assert abs(rep.rhs_volume_static) <= 1e-12


def test_reilly_rejects_unknown_function(hemisphere):
    with pytest.raises(NonSmoothTestFunction):
        reilly_residual(hemisphere, "sin(x)", RULE24)
    with pytest.raises(NonSmoothTestFunction):
        reilly_residual(hemisphere, "x9", RULE24)


def test_reilly_report_structure(hemisphere):
    doc = reilly_residual(hemisphere, "x1", RULE24).to_dict()
    assert set(doc["boundary"]) == {"cap", "support"}
    for piece in doc["boundary"].values():
        assert {"mixed", "gradient", "curvature"} <= set(piece)
