"""Witness ladders: direction search, stability radii, certificates."""

import dataclasses
import math

import numpy as np
import pytest

from semigroup_lab import (
    CVec,
    Functional,
    GrowthLaw,
    apply_generator,
    build_certificate,
    cert_from_dict,
    cert_to_dict,
    choose_step_count,
    design_blowup_law,
    diagonal_generator,
    diagonal_generator_from_entries,
    dense_generator,
    dual_norm,
    dumps_canonical,
    find_direction,
    law_entries,
    load_config,
    norm,
    pairing,
    rotate_nonneg,
    seed_vector,
    stability_radius,
    validate_stability,
    verify_certificate,
)
from semigroup_lab.errors import (
    InvalidCertificate,
    ScheduleExhausted,
    TruncationInsufficient,
    UnderflowRadius,
    WitnessBuildError,
    ZeroPairing,
)
from semigroup_lab.witness import _step_lipschitz, product_log_value

PAIRING_TOL = 1e-10
RECOMPUTE_TOL = 1e-9

# held fixed with test_trotter: smallest dyadic step count reaching 0.1
# for the two-coordinate model, found by scanning the closed form
STEPS_FOR_TENTH = 16


def two_point():
    a = diagonal_generator_from_entries([0.0, 2.0])
    f = Functional([0.5, 0.5], 2.0)
    x = CVec([1.0, 1.0], 2.0)
    return a, f, x


def test_find_direction_prefers_smallest_coordinate():
    a = diagonal_generator_from_entries([0.0, 1j, 2j, 4j])
    f = Functional([1.0, 1.0, 1.0, 1.0], 2.0)
    v = find_direction(a, f, target=1.5, radius=1.0)
    support = np.flatnonzero(v.coords)
    assert list(support) == [2]
    assert norm(v) == pytest.approx(1.0, abs=1e-12)
    assert abs(pairing(f, apply_generator(a, v))) >= 1.5


def test_find_direction_reports_truncation():
    a = diagonal_generator_from_entries([0.0, 1j, 2j, 4j])
    f = Functional([1.0, 1.0, 1.0, 1.0], 2.0)
    with pytest.raises(TruncationInsufficient) as info:
        find_direction(a, f, target=10.0, radius=1.0, stage=3)
    err = info.value
    assert err.needed_target == 10.0
    assert err.radius == 1.0
    assert err.best_available == pytest.approx(4.0, abs=1e-12)
    assert err.stage == 3


def test_find_direction_dense_attains_dual_norm():
    rng = np.random.default_rng(41)
    m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    a = dense_generator(m)
    f = Functional(rng.standard_normal(4) + 1j * rng.standard_normal(4), 2.0)
    composed = dual_norm(Functional(m.T @ f.coords, 2.0))
    radius = 0.25
    v = find_direction(a, f, target=0.9 * radius * composed, radius=radius)
    gain = abs(pairing(f, apply_generator(a, v)))
    assert norm(v) == pytest.approx(radius, rel=1e-12)
    assert gain == pytest.approx(radius * composed, rel=1e-10)


def test_rotate_nonneg_aligns_generator_pairing():
    rng = np.random.default_rng(42)
    a = diagonal_generator_from_entries([1j, -2.0 + 1j, 3j])
    f = Functional(rng.standard_normal(3) + 1j * rng.standard_normal(3), 2.0)
    v = CVec(rng.standard_normal(3) + 1j * rng.standard_normal(3), 2.0)
    w = rotate_nonneg(a, f, v)
    drift = pairing(f, apply_generator(a, w))
    assert drift.real >= 0.0
    assert abs(drift.imag) <= 1e-12 * abs(drift)
    assert norm(w) == pytest.approx(norm(v), rel=1e-12)


def test_rotate_nonneg_rejects_zero_pairing():
    a = diagonal_generator_from_entries([0.0, 0.0])
    f = Functional([1.0, 1.0], 2.0)
    with pytest.raises(ZeroPairing):
        rotate_nonneg(a, f, CVec([1.0, 1.0], 2.0))


def test_seed_vector_gauges_pairing_to_one():
    cfg = load_config("blowup_k5")
    a, f = cfg.generator(), cfg.functional()
    x0 = seed_vector(a, f, cfg.vector(f))
    assert pairing(f, x0) == pytest.approx(1.0, abs=1e-12)
    drift = pairing(f, apply_generator(a, x0))
    assert drift.real >= 0.0


def test_choose_step_count_frozen_example():
    a, f, x = two_point()
    n, err, log_value = choose_step_count(a, f, x, eps=0.1)
    assert n == STEPS_FOR_TENTH
    # |value - e| from the closed form, via the math module alone
    expected = abs(((1.0 + math.exp(2.0 / 16)) / 2.0) ** 16 - math.e)
    assert err == pytest.approx(expected, rel=1e-10)
    assert math.exp(log_value.real) == pytest.approx(
        ((1.0 + math.exp(2.0 / 16)) / 2.0) ** 16, rel=1e-12
    )


def test_choose_step_count_exhaustion():
    a, f, x = two_point()
    with pytest.raises(ScheduleExhausted) as info:
        choose_step_count(a, f, x, eps=1e-6, j_max=3)
    assert info.value.j_max == 3
    assert info.value.best_error > 1e-6


def test_stability_radius_certifies_its_bound():
    a, f, x = two_point()
    n, eps = 16, 0.01
    delta = stability_radius(a, f, x, n, eps, anchor_norm=norm(x))
    lip = _step_lipschitz(a, f, n)
    step_abs = (1.0 + math.exp(2.0 / n)) / 2.0
    moved = n * (step_abs + lip * delta) ** (n - 1) * lip * delta
    assert moved <= eps
    assert delta <= 1.0 / (n * lip)
    assert delta <= norm(x) / 2.0


def test_stability_radius_underflow():
    a, f, x = two_point()
    with pytest.raises(UnderflowRadius):
        stability_radius(a, f, x, 2**40, 1e-295, anchor_norm=norm(x))


def test_validate_stability_stays_within_budget():
    a, f, x = two_point()
    eps = 0.05
    n, _, _ = choose_step_count(a, f, x, eps)
    delta = stability_radius(a, f, x, n, eps, anchor_norm=norm(x))
    worst = validate_stability(
        a, f, x, n, delta, np.random.default_rng(0), samples=50
    )
    assert worst <= 2.0 * eps


def test_product_log_value_matches_scalar_route():
    from semigroup_lab import scalar_trotter_value

    a, f, x = two_point()
    rec = scalar_trotter_value(a, f, x, 1.0, 256)
    assert product_log_value(a, f, x, 256) == rec.log_value


def test_build_certificate_stage_goal_zero():
    a = diagonal_generator_from_entries([0.05j, 10j, 10j, 10j])
    f = Functional([0.01, 0.005, 0.0025, 0.00125], 2.0)
    z = CVec([100.0, 0.0, 0.0, 0.0], 2.0)
    cert = build_certificate(a, f, z, eps=0.1, stage_goal=0)
    assert cert.stage_count == 0
    assert len(cert.stages) == 1
    assert cert.stages[0].index == 0
    verify_certificate(cert, strict_goal=0)


def test_build_certificate_rejects_bad_eps():
    a, f, x = two_point()
    with pytest.raises(ValueError):
        build_certificate(a, f, x, eps=0.7, stage_goal=1)


def test_seed_needs_reachable_nudge_target():
    # diag(0, 2) caps the seed search ball gain below the 4|f(Az)| target
    a, f, x = two_point()
    with pytest.raises(WitnessBuildError) as info:
        build_certificate(a, f, x, eps=0.1, stage_goal=0)
    assert isinstance(info.value.cause, TruncationInsufficient)
    assert info.value.partial is None


def test_k5_ladder_invariants(k5_certificate):
    cert = k5_certificate
    assert cert.stage_count == 5
    assert len(cert.stages) == 6
    y = CVec(cert.witness, cert.p)
    f = cert.functional_obj()
    assert pairing(f, y) == pytest.approx(1.0, abs=PAIRING_TOL)
    for stage in cert.stages:
        assert stage.generator_pairing.real >= stage.index
        assert stage.steps & (stage.steps - 1) == 0  # a power of two
        gap = norm(CVec(y.coords - stage.vector, cert.p))
        assert gap <= stage.stability_radius


def test_verify_detects_tampered_steps(k5_certificate):
    cert = k5_certificate
    stages = list(cert.stages)
    stages[2] = dataclasses.replace(stages[2], steps=stages[2].steps * 2)
    bad = dataclasses.replace(cert, stages=tuple(stages))
    with pytest.raises(InvalidCertificate) as info:
        verify_certificate(bad)
    assert info.value.failures
    assert any("stage 2" in line for line in info.value.failures)


def test_verify_detects_tampered_witness(k5_certificate):
    cert = k5_certificate
    bumped = cert.witness.copy()
    bumped[0] += 1e-3
    bad = dataclasses.replace(cert, witness=bumped)
    with pytest.raises(InvalidCertificate):
        verify_certificate(bad)


def test_bounded_build_fails_with_diagnosis():
    cfg = load_config("bounded_contrapositive")
    f = cfg.functional()
    with pytest.raises(WitnessBuildError) as info:
        build_certificate(
            cfg.generator(),
            f,
            cfg.vector(f),
            eps=0.1,
            stage_goal=10,
            j_max=cfg.witness_params().j_max,
            seed=cfg.seed,
        )
    failure = info.value
    assert isinstance(failure.cause, TruncationInsufficient)
    assert failure.cause.best_available > 0.0
    assert failure.cause.radius > 0.0
    assert failure.partial is not None
    assert failure.partial.stage_count < 10
    verify_certificate(failure.partial)


def test_designer_fills_rungs_and_replays():
    f = Functional([0.01, 0.005, 0.0025, 0.00125], 2.0)
    z = CVec([100.0, 0.0, 0.0, 0.0], 2.0)
    law = design_blowup_law(f, z, eps=0.1, stage_goal=2, seed=7)
    again = design_blowup_law(f, z, eps=0.1, stage_goal=2, seed=7)
    assert law.values == again.values
    entries = law_entries(law, 4)
    assert np.all(np.diff(np.abs(entries)) >= 0.0)
    a = diagonal_generator(law, 4)
    first = build_certificate(a, f, z, eps=0.1, stage_goal=2, j_max=160, seed=7)
    second = build_certificate(a, f, z, eps=0.1, stage_goal=2, j_max=160, seed=7)
    assert np.array_equal(first.witness, second.witness)
    verify_certificate(first, strict_goal=2)


def test_designer_requires_seed_on_first_coordinate():
    f = Functional([0.01, 0.005, 0.0025], 2.0)
    with pytest.raises(ValueError):
        design_blowup_law(f, CVec([0.0, 1.0, 0.0], 2.0), eps=0.1, stage_goal=1)


def test_certificate_roundtrip_is_exact(k5_certificate):
    cert = k5_certificate
    payload = cert_to_dict(cert)
    back = cert_from_dict(payload)
    assert dumps_canonical(cert_to_dict(back)) == dumps_canonical(payload)
    verify_certificate(back, strict_goal=5)
