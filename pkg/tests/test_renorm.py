"""Renorming audits: the split norm, its sandwich bounds, and the
classical weighted norm."""

import math

import numpy as np
import pytest

from semigroup_lab import (
    CVec,
    Functional,
    classical_renorm_value,
    diagonal_generator_from_entries,
    dual_norm,
    equivalence_audit,
    lambda_lower_bounds,
    make_rank_one,
    norm,
    project,
    projection_contractivity_check,
    quasi_contractivity_audit,
    renorm_time_grid,
    report_from_dict,
    report_to_dict,
    dumps_canonical,
    spectral_bound,
    split_norm,
    witness_projection,
)
from semigroup_lab.errors import SpectralBoundViolated

RATIO_SLACK = 1e-10


def coordinate_projection():
    f = Functional([1.0, 0.0], 2.0)
    return make_rank_one(f, CVec([1.0, 0.0], 2.0))


def test_split_norm_coordinate_example():
    proj = coordinate_projection()
    assert split_norm(proj, CVec([3.0, 4.0], 2.0)) == pytest.approx(7.0, abs=1e-12)
    # on the range the two pieces collapse to one
    assert split_norm(proj, CVec([2.0, 0.0], 2.0)) == pytest.approx(2.0, abs=1e-12)


def test_equivalence_band_holds():
    proj = coordinate_projection()
    lo, hi, violations = equivalence_audit(proj, seed=5, samples=500)
    assert not violations
    assert lo >= 1.0 - RATIO_SLACK
    assert hi <= 2.0 * 1.0 + 1.0 + RATIO_SLACK  # projection norm is 1 here


def test_equivalence_reports_band_violations():
    proj = coordinate_projection()
    # an impossible lower band makes every sample a violation row
    _, _, violations = equivalence_audit(proj, seed=5, samples=20, slack=-2.0)
    assert len(violations) == 20
    index, ratio, low, high = violations[0]
    assert index == 0
    assert ratio >= 1.0
    assert (low, high) == (1.0, 3.0)


def test_projection_contractivity():
    rng = np.random.default_rng(51)
    f = Functional(rng.standard_normal(4) + 1j * rng.standard_normal(4), 2.0)
    x = CVec(rng.standard_normal(4) + 1j * rng.standard_normal(4), 2.0)
    proj = make_rank_one(f, x)
    worst, violations = projection_contractivity_check(proj, seed=5, samples=500)
    assert not violations
    assert worst <= 1.0 + RATIO_SLACK
    # equality is attained on the range
    z = project(proj, CVec(rng.standard_normal(4), 2.0))
    assert split_norm(proj, project(proj, z)) == pytest.approx(
        split_norm(proj, z), rel=1e-12
    )


def test_lambda_bounds_recompute(k5_certificate):
    cert = k5_certificate
    lambdas = lambda_lower_bounds(cert)
    assert len(lambdas) == len(cert.stages)
    assert all(b > a for a, b in zip(lambdas, lambdas[1:]))
    scale = math.log(
        dual_norm(cert.functional_obj()) * norm(CVec(cert.witness, cert.p))
    )
    for lam, lv in zip(lambdas, cert.witness_log_values):
        assert lam == pytest.approx(lv.real - scale, abs=1e-12)


def test_witness_projection_matches_certificate(k5_certificate):
    proj = witness_projection(k5_certificate)
    y = CVec(k5_certificate.witness, k5_certificate.p)
    out = project(proj, y)
    np.testing.assert_allclose(out.coords, y.coords, rtol=1e-9)


def test_spectral_bound_values():
    a = diagonal_generator_from_entries([-1.0, 3j])
    assert spectral_bound(a) == 0.0
    b = diagonal_generator_from_entries([-2.0, -0.5 + 4j])
    assert spectral_bound(b) == -0.5


def test_time_grid_shape():
    a = diagonal_generator_from_entries([-1.0, 3j])
    grid = renorm_time_grid(a, omega=0.5, points=33)
    assert grid[0] == 0.0
    assert grid.size == 33
    assert grid[-1] == pytest.approx(50.0 / 0.5, rel=1e-12)
    assert np.all(np.diff(grid) > 0.0)
    with pytest.raises(SpectralBoundViolated):
        renorm_time_grid(a, omega=0.0)


def test_classical_value_sits_at_zero_for_dissipative():
    a = diagonal_generator_from_entries([3j, -0.5 + 9j])
    z = CVec([1.0, 2.0], 2.0)
    value, argmax = classical_renorm_value(a, 0.5, z)
    assert argmax == 0.0
    assert value == pytest.approx(norm(z), rel=1e-12)


def test_classical_audit_passes():
    a = diagonal_generator_from_entries([3j, -0.25 + 9j, -0.5 + 27j])
    report = quasi_contractivity_audit(
        "classical", a=a, omega=0.5, seed=3, vector_samples=100, time_samples=4
    )
    assert report.kind == "classical"
    assert report.passed
    assert not report.violations
    assert report.summary["worst_excess"] <= 0.0
    assert report.parameters["omega"] == 0.5
    assert report.parameters["time_samples_requested"] == 4


def test_classical_audit_flags_insufficient_weight():
    a = diagonal_generator_from_entries([0.5 + 1j, 2j])
    with pytest.raises(SpectralBoundViolated):
        quasi_contractivity_audit("classical", a=a, omega=0.3, vector_samples=10)


def test_split_audit_reports_lambdas(k5_certificate):
    report = quasi_contractivity_audit(
        "split", cert=k5_certificate, seed=9, vector_samples=500
    )
    assert report.kind == "split"
    assert report.passed
    assert report.lambdas == lambda_lower_bounds(k5_certificate)
    assert report.summary["min_ratio"] >= 1.0 - RATIO_SLACK
    assert report.summary["lambda_gap"] == pytest.approx(
        report.lambdas[-1] - report.lambdas[0], abs=1e-12
    )


def test_report_roundtrip(k5_certificate):
    report = quasi_contractivity_audit(
        "split", cert=k5_certificate, seed=9, vector_samples=50
    )
    payload = report_to_dict(report)
    back = report_from_dict(payload)
    assert dumps_canonical(report_to_dict(back)) == dumps_canonical(payload)
