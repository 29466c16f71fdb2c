"""Inductive construction of blow-up witnesses for alternating products.

A witness certificate records a ladder of vectors x_0, x_1, ... whose
product pairings grow by a factor of e per stage, together with the
step counts that realize each stage, certified stability radii around
each vector, and the evaluation of every stage at the final vector y.
The final vector therefore witnesses every stage at once: the n_k-step
product at y has modulus at least e^k - 2*eps for all k.

All product values are handled in log space through the drift carrier
from :mod:`semigroup_lab.trotter`, so stages whose step counts are far
beyond 2^53 lose nothing to rounding.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegeneratePair,
    ScheduleExhausted,
    TruncationInsufficient,
    UnderflowRadius,
    WitnessBuildError,
    ZeroPairing,
)
from .spaces import (
    CVec,
    Functional,
    Generator,
    GrowthLaw,
    apply_generator,
    clog1p,
    diagonal_generator_from_entries,
    dual_norm,
    law_entries,
    norm,
    pairing,
    semigroup_defect,
)
from .trotter import limit_gap_error, step_derivative

DEFAULT_J_MAX = 40
UNDERFLOW_FLOOR = 1e-300
ZERO_PAIRING_FLOOR = 1e-14

# Slack demanded of the stage pairings before rounding is blamed.
_PAIRING_SLACK = 1e-10


@dataclass(frozen=True, eq=False)
class WitnessStage:
    """One rung of the ladder.

    ``vector`` is x_k with f(x_k) = 1, ``generator_pairing`` is f(A x_k)
    whose real part is at least the stage index, ``steps`` the chosen
    product step count, and ``stability_radius`` the certified radius
    within which the product value moves by at most eps.  The bump
    fields describe how the stage was reached (search radius, pairing
    target, and the 1-based coordinate of the direction used); the seed
    stage records its own search there too.
    """

    index: int
    vector: np.ndarray
    generator_pairing: complex
    steps: int
    limit_error: float
    stability_radius: float
    log_value: complex
    bump_radius: float | None = None
    search_target: float | None = None
    direction_index: int | None = None


@dataclass(frozen=True, eq=False)
class WitnessCertificate:
    """A complete (or aborted) witness construction.

    ``witness`` equals the last stage vector; ``witness_log_values`` and
    ``witness_errors`` evaluate every stage's product at that single
    vector.  ``law`` describes the diagonal generator; dense builds
    store the matrix instead.
    """

    eps: float
    p: float
    functional: np.ndarray
    initial: np.ndarray
    stages: tuple[WitnessStage, ...]
    witness: np.ndarray
    witness_log_values: tuple[complex, ...]
    witness_errors: tuple[float, ...]
    j_max: int
    build_seed: int
    law: GrowthLaw | None = None
    dense_matrix: np.ndarray | None = None

    @property
    def stage_count(self) -> int:
        return len(self.stages) - 1

    @property
    def dim(self) -> int:
        return self.witness.size

    def generator(self) -> Generator:
        if self.dense_matrix is not None:
            return Generator(kind="dense", matrix=self.dense_matrix)
        if self.law is None:
            raise ValueError("certificate carries no generator description")
        return Generator(kind="diagonal", entries=law_entries(self.law, self.dim), law=self.law)

    def functional_obj(self) -> Functional:
        return Functional(self.functional, self.p)


def product_log_value(a: Generator, f: Functional, x: CVec, n: int) -> complex:
    """log of the unit-time n-step scalar product value, via the drift carrier."""
    offset = step_derivative(a, f, x, 1.0, n) / float(n)
    if offset == -1.0:
        return complex(-math.inf, 0.0)
    return float(n) * clog1p(offset)


def find_direction(
    a: Generator, f: Functional, target: float, radius: float, stage: int = 0
) -> CVec:
    """A vector of the given norm whose generator pairing reaches target.

    Diagonal generators are searched along coordinate directions (the
    smallest coordinate that works wins, keeping witness supports
    short); dense generators use the extremal direction of the composed
    functional v -> f(A v).  When nothing in the ball reaches the
    target, TruncationInsufficient reports how close the ball gets.
    """
    if target <= 0.0 or radius <= 0.0:
        raise ValueError("direction search needs positive target and radius")
    if a.kind == "diagonal":
        gains = radius * np.abs(a.entries) * np.abs(f.coords)
        hits = np.flatnonzero(gains >= target)
        if hits.size == 0:
            raise TruncationInsufficient(
                needed_target=target,
                best_available=float(np.max(gains)),
                radius=radius,
                stage=stage,
            )
        m = int(hits[0])
        coords = np.zeros(a.dim, dtype=np.complex128)
        coords[m] = radius
        return CVec(coords, f.p)
    composed = a.matrix.T @ f.coords
    reach = radius * dual_norm(Functional(composed, f.p))
    if reach < target:
        raise TruncationInsufficient(
            needed_target=target, best_available=float(reach), radius=radius, stage=stage
        )
    if f.p == 2.0:
        direction = np.conj(composed) / np.linalg.norm(composed)
    elif f.p == math.inf:
        moduli = np.abs(composed)
        direction = np.where(moduli > 0.0, np.conj(composed) / np.where(moduli > 0.0, moduli, 1.0), 1.0)
    else:
        m = int(np.argmax(np.abs(composed)))
        direction = np.zeros(a.dim, dtype=np.complex128)
        direction[m] = np.conj(composed[m]) / abs(composed[m])
    return CVec(radius * direction, f.p)


def rotate_nonneg(a: Generator, f: Functional, v: CVec) -> CVec:
    """Rotate v by a unimodular scalar so f(A v) is nonnegative real."""
    gain = pairing(f, apply_generator(a, v))
    if abs(gain) < ZERO_PAIRING_FLOOR:
        raise ZeroPairing(f"cannot orient a direction with |f(Av)| = {abs(gain):.3g}")
    return CVec(cmath.exp(-1j * cmath.phase(gain)) * v.coords, v.p)


def _seed_with_meta(a: Generator, f: Functional, z: CVec):
    gauge = pairing(f, z)
    if abs(gauge) < 1e-12:
        raise DegeneratePair(f"seed pairing {abs(gauge):.3g} is negligible")
    base = CVec(z.coords / gauge, z.p)
    radius = 1.0 / (2.0 * dual_norm(f))
    target = 4.0 * abs(pairing(f, apply_generator(a, base)))
    raw = find_direction(a, f, target, radius, stage=0)
    oriented = rotate_nonneg(a, f, raw)
    denom = 1.0 + pairing(f, oriented)
    if abs(denom) < 0.5:
        raise ArithmeticError(f"seed denominator {abs(denom):.6g} fell below 1/2")
    coords = (base.coords + oriented.coords) / denom
    meta = {
        "radius": radius,
        "target": target,
        "direction_index": int(np.argmax(np.abs(raw.coords))) + 1,
    }
    return CVec(coords, z.p), meta


def seed_vector(a: Generator, f: Functional, z: CVec) -> CVec:
    """The stage-0 vector: z regauged and nudged so Re f(A x_0) >= 0.

    The nudge direction is found inside the ball of radius 1/(2|f|)
    with pairing target 4 |f(A z)|, then rotated to align its pairing
    with the positive real axis.
    """
    x0, _ = _seed_with_meta(a, f, z)
    return x0


def choose_step_count(
    a: Generator,
    f: Functional,
    x: CVec,
    eps: float,
    j_max: int = DEFAULT_J_MAX,
) -> tuple[int, float, complex]:
    """The smallest dyadic step count whose product value lands within eps.

    Scans n = 2^j upward and returns (n, error, log_value) for the first
    n with |value - exp(f(Ax))| < eps, the error measured in log space.
    Raises ScheduleExhausted when the scan runs out.
    """
    if not 0.0 < eps:
        raise ValueError("eps must be positive")
    limit_log = pairing(f, apply_generator(a, x))
    best = math.inf
    for j in range(0, j_max + 1):
        n = 2**j
        log_value = product_log_value(a, f, x, n)
        err = limit_gap_error(limit_log, log_value)
        if err < eps:
            return n, err, log_value
        best = min(best, err)
    raise ScheduleExhausted(j_max=j_max, best_error=best, target=eps)


def _step_lipschitz(a: Generator, f: Functional, n: int) -> float:
    """The Lipschitz constant of x -> f(exp(A/n) x): the composed dual norm."""
    h = 1.0 / float(n)
    if a.kind == "diagonal":
        composed = f.coords * np.exp(h * a.entries)
    else:
        defect = semigroup_defect(a, h)
        composed = f.coords + defect.T @ f.coords
    return dual_norm(Functional(composed, f.p))


def stability_radius(
    a: Generator,
    f: Functional,
    x: CVec,
    n: int,
    eps: float,
    anchor_norm: float,
    stage: int = 0,
) -> float:
    """A radius delta such that the n-step product value moves by < eps
    anywhere in the delta-ball around x (within the f(.) = 1 slice).

    Certified through the step-perturbation bound
    ``n * (|c| + L*delta)^(n-1) * L * delta <= eps`` with c the step
    value at x and L the per-step Lipschitz constant; the bound is
    rechecked in log space and the radius halved until it holds.
    The radius is additionally capped at 1/(n L), at min(1, 1/(2L)) and
    at half the anchor norm so the ladder stays in a bounded region.
    """
    L = _step_lipschitz(a, f, n)
    offset = step_derivative(a, f, x, 1.0, n) / float(n)
    log_step_abs = clog1p(offset).real
    step_abs = math.exp(log_step_abs)
    power_log = (n - 1) * log_step_abs
    leading = 0.0 if power_log > 690.0 else eps / (math.e * n * L * math.exp(power_log))
    cap = min(1.0, 1.0 / (2.0 * L))
    delta = min(leading, 1.0 / (n * L), cap, anchor_norm / 2.0)
    log_eps = math.log(eps)
    while delta >= UNDERFLOW_FLOOR:
        lhs = math.log(n) + (n - 1) * math.log(step_abs + L * delta) + math.log(L * delta)
        if lhs <= log_eps:
            return delta
        delta /= 2.0
    raise UnderflowRadius(radius=delta, stage=stage)


def validate_stability(
    a: Generator,
    f: Functional,
    x: CVec,
    n: int,
    delta: float,
    rng: np.random.Generator,
    samples: int = 100,
) -> float:
    """Worst sampled deviation |value(h) - exp(f(Ax))| on the delta-slice.

    Samples random kernel directions of f, steps to the boundary of the
    ball, and evaluates the product value there.  The certified radius
    promises the result stays below 2*eps when the step count came from
    ``choose_step_count`` at accuracy eps.
    """
    limit_log = pairing(f, apply_generator(a, x))
    anchor = np.conj(f.coords)
    anchor_gain = complex(np.dot(f.coords, anchor))
    worst = 0.0
    for _ in range(samples):
        raw = rng.standard_normal(x.dim) + 1j * rng.standard_normal(x.dim)
        lam = complex(np.dot(f.coords, raw)) / anchor_gain
        kernel = raw - lam * anchor
        size = norm(CVec(kernel, x.p))
        if size == 0.0:
            continue
        shifted = CVec(x.coords + (delta / size) * kernel, x.p)
        log_value = product_log_value(a, f, shifted, n)
        worst = max(worst, limit_gap_error(limit_log, log_value))
    return worst


def extend(
    a: Generator,
    f: Functional,
    stages: list[WitnessStage],
    eps: float,
    anchor_norm: float,
    j_max: int,
    rng: np.random.Generator,
    margin: float = 0.3,
    validation_samples: int = 100,
) -> WitnessStage:
    """Build the next stage of the ladder from the stages so far.

    The step size is limited by the chain min_j delta_j / 2^(k-j) so the
    whole tail of the ladder stays inside every earlier stability ball.
    The bump direction is searched at half the bump radius with a
    pairing target large enough that the new stage satisfies
    Re f(A x_new) >= index even after the regauging denominator; that
    inequality is still checked after the fact.
    """
    if not stages:
        raise ValueError("extend needs at least the seed stage")
    new_index = len(stages)
    phi_norm = dual_norm(f)
    chain = min(st.stability_radius / 2.0 ** (new_index - st.index) for st in stages)
    prev = stages[-1]
    prev_norm = norm(CVec(prev.vector, f.p))
    gamma = min(chain / (2.0 * (prev_norm * phi_norm + 1.0)), 1.0 / (2.0 * phi_norm))
    eta = phi_norm * gamma
    drift = prev.generator_pairing
    target = (new_index - drift.real + eta * abs(drift) + margin) / (1.0 - eta)
    if target <= 0.0:
        target = margin
    raw = find_direction(a, f, target, gamma / 2.0, stage=new_index)
    bump = rotate_nonneg(a, f, raw)
    denom = 1.0 + pairing(f, bump)
    coords = (prev.vector + bump.coords) / denom
    vector = CVec(coords, f.p)
    step = norm(CVec(coords - prev.vector, f.p))
    if step > chain:
        raise ArithmeticError(
            f"stage {new_index} moved {step:.3g}, past the chain bound {chain:.3g}"
        )
    new_drift = pairing(f, apply_generator(a, vector))
    if new_drift.real < float(new_index):
        raise ArithmeticError(
            f"stage {new_index} reached Re f(Ax) = {new_drift.real:.6g} < {new_index}"
        )
    steps, err, log_value = choose_step_count(a, f, vector, eps, j_max=j_max)
    delta = stability_radius(a, f, vector, steps, eps, anchor_norm, stage=new_index)
    worst = validate_stability(a, f, vector, steps, delta, rng, samples=validation_samples)
    if worst >= 2.0 * eps:
        raise ArithmeticError(
            f"stage {new_index} sampled deviation {worst:.3g} breaks the 2*eps bound"
        )
    return WitnessStage(
        index=new_index,
        vector=coords,
        generator_pairing=new_drift,
        steps=steps,
        limit_error=err,
        stability_radius=delta,
        log_value=log_value,
        bump_radius=gamma / 2.0,
        search_target=target,
        direction_index=int(np.argmax(np.abs(raw.coords))) + 1,
    )


def _assemble(
    a: Generator,
    f: Functional,
    z: CVec,
    eps: float,
    stages: list[WitnessStage],
    j_max: int,
    build_seed: int,
) -> WitnessCertificate:
    witness = stages[-1].vector
    y = CVec(witness, f.p)
    log_values = []
    errors = []
    for st in stages:
        lv = product_log_value(a, f, y, st.steps)
        log_values.append(lv)
        errors.append(limit_gap_error(st.generator_pairing, lv))
    law = a.law if a.kind == "diagonal" else None
    if a.kind == "diagonal" and law is None and np.all(np.diff(np.abs(a.entries)) >= 0.0):
        # raw-entry generators that satisfy the modulus contract get a
        # table law so the certificate can rebuild its generator during
        # verification; half-filled design tables stay law-free
        law = GrowthLaw("table", values=tuple(complex(e) for e in a.entries))
    return WitnessCertificate(
        eps=eps,
        p=f.p,
        functional=f.coords.copy(),
        initial=z.coords.copy(),
        stages=tuple(stages),
        witness=witness.copy(),
        witness_log_values=tuple(log_values),
        witness_errors=tuple(errors),
        j_max=j_max,
        build_seed=build_seed,
        law=law,
        dense_matrix=None if a.kind == "diagonal" else np.asarray(a.matrix),
    )


def build_certificate(
    a: Generator,
    f: Functional,
    z: CVec,
    eps: float,
    stage_goal: int,
    j_max: int = DEFAULT_J_MAX,
    seed: int = 0,
    margin: float = 0.3,
    validation_samples: int = 100,
) -> WitnessCertificate:
    """Run the full ladder to ``stage_goal`` and certify it.

    On any failure the partial ladder built so far is wrapped in a
    WitnessBuildError whose ``partial`` field is a certificate for the
    completed stages and whose ``cause`` is the underlying exception.
    """
    if not 0.0 < eps < 0.5:
        raise ValueError(f"eps must lie in (0, 1/2), got {eps}")
    if stage_goal < 0:
        raise ValueError("stage goal must be nonnegative")
    rng = np.random.default_rng(seed)
    stages: list[WitnessStage] = []
    try:
        x0, meta = _seed_with_meta(a, f, z)
        drift = pairing(f, apply_generator(a, x0))
        if drift.real < 0.0:
            raise ArithmeticError(f"seed stage has Re f(Ax) = {drift.real:.6g} < 0")
        anchor_norm = norm(x0)
        steps, err, log_value = choose_step_count(a, f, x0, eps, j_max=j_max)
        delta = stability_radius(a, f, x0, steps, eps, anchor_norm, stage=0)
        worst = validate_stability(a, f, x0, steps, delta, rng, samples=validation_samples)
        if worst >= 2.0 * eps:
            raise ArithmeticError(
                f"seed stage sampled deviation {worst:.3g} breaks the 2*eps bound"
            )
        stages.append(
            WitnessStage(
                index=0,
                vector=x0.coords.copy(),
                generator_pairing=drift,
                steps=steps,
                limit_error=err,
                stability_radius=delta,
                log_value=log_value,
                bump_radius=meta["radius"],
                search_target=meta["target"],
                direction_index=meta["direction_index"],
            )
        )
        for _ in range(stage_goal):
            stages.append(
                extend(
                    a,
                    f,
                    stages,
                    eps,
                    anchor_norm,
                    j_max,
                    rng,
                    margin=margin,
                    validation_samples=validation_samples,
                )
            )
    except Exception as exc:
        partial = (
            _assemble(a, f, z, eps, stages, j_max, seed) if stages else None
        )
        raise WitnessBuildError(partial=partial, cause=exc) from exc
    return _assemble(a, f, z, eps, stages, j_max, seed)


def verify_certificate(cert: WitnessCertificate, strict_goal: int | None = None) -> None:
    """Recheck every invariant of a certificate from its stored data.

    Raises InvalidCertificate listing all failed checks; returns None
    when everything holds.  ``strict_goal`` additionally demands a
    minimum stage count.
    """
    from .errors import InvalidCertificate

    failures: list[str] = []
    if not 0.0 < cert.eps < 0.5:
        failures.append(f"eps {cert.eps} outside (0, 1/2)")
    try:
        a = cert.generator()
    except Exception as exc:
        raise InvalidCertificate(failures + [f"generator rebuild failed: {exc}"])
    f = cert.functional_obj()
    if strict_goal is not None and cert.stage_count < strict_goal:
        failures.append(f"only {cert.stage_count} stages, needed {strict_goal}")
    if cert.witness.size != cert.functional.size:
        failures.append("witness and functional dimensions differ")
    if not np.array_equal(cert.witness, cert.stages[-1].vector):
        failures.append("witness vector differs from the last stage vector")
    two_eps = 2.0 * cert.eps
    prev_index = -1
    for st in cert.stages:
        tag = f"stage {st.index}"
        if st.index != prev_index + 1:
            failures.append(f"{tag}: index out of order")
        prev_index = st.index
        x = CVec(st.vector, cert.p)
        gauge = pairing(f, x)
        if abs(gauge - 1.0) > _PAIRING_SLACK:
            failures.append(f"{tag}: pairing {gauge:.3g} strays from 1")
        drift = pairing(f, apply_generator(a, x))
        if abs(drift - st.generator_pairing) > 1e-9 * (1.0 + abs(drift)):
            failures.append(f"{tag}: stored generator pairing does not recompute")
        if st.generator_pairing.real < float(st.index):
            failures.append(
                f"{tag}: Re f(Ax) = {st.generator_pairing.real:.6g} < {st.index}"
            )
        if st.steps < 1 or st.steps & (st.steps - 1):
            failures.append(f"{tag}: step count {st.steps} is not a power of two")
        elif st.steps > 2**cert.j_max:
            failures.append(f"{tag}: step count exceeds the declared schedule")
        lv = product_log_value(a, f, x, st.steps)
        if abs(lv - st.log_value) > 1e-9 * (1.0 + abs(lv)):
            failures.append(f"{tag}: stored log value does not recompute")
        err = limit_gap_error(st.generator_pairing, lv)
        if not err < cert.eps:
            failures.append(f"{tag}: limit error {err:.3g} is not below eps")
        if st.stability_radius < UNDERFLOW_FLOOR:
            failures.append(f"{tag}: stability radius underflowed")
        else:
            L = _step_lipschitz(a, f, st.steps)
            offset = step_derivative(a, f, x, 1.0, st.steps) / float(st.steps)
            step_abs = math.exp(clog1p(offset).real)
            lhs = (
                math.log(st.steps)
                + (st.steps - 1) * math.log(step_abs + L * st.stability_radius)
                + math.log(L * st.stability_radius)
            )
            if lhs > math.log(cert.eps) + 1e-9:
                failures.append(f"{tag}: stability radius fails its certificate")
        gap = norm(CVec(cert.witness - st.vector, cert.p))
        if gap > st.stability_radius * (1.0 + 1e-12):
            failures.append(
                f"{tag}: witness sits {gap:.3g} away, outside radius "
                f"{st.stability_radius:.3g}"
            )
    if len(cert.witness_log_values) != len(cert.stages):
        failures.append("witness evaluations do not cover every stage")
    else:
        y = CVec(cert.witness, cert.p)
        for st, lv_stored, err_stored in zip(
            cert.stages, cert.witness_log_values, cert.witness_errors
        ):
            tag = f"stage {st.index} at witness"
            lv = product_log_value(a, f, y, st.steps)
            if abs(lv - lv_stored) > 1e-9 * (1.0 + abs(lv)):
                failures.append(f"{tag}: stored log value does not recompute")
            err = limit_gap_error(st.generator_pairing, lv)
            if not err < two_eps:
                failures.append(f"{tag}: deviation {err:.3g} is not below 2*eps")
            if abs(err - err_stored) > 1e-9 * (1.0 + err):
                failures.append(f"{tag}: stored deviation does not recompute")
            floor = math.log(math.exp(st.index) - two_eps)
            if lv.real < floor - 1e-12:
                failures.append(
                    f"{tag}: log-modulus {lv.real:.6g} under the blow-up floor {floor:.6g}"
                )
    if failures:
        raise InvalidCertificate(failures)


def design_blowup_law(
    f: Functional,
    z: CVec,
    eps: float,
    stage_goal: int,
    first_rung: float = 0.05,
    pad: float = 1.02,
    j_max: int = 160,
    seed: int = 0,
    margin: float = 0.3,
) -> GrowthLaw:
    """Tune a tabulated imaginary law that carries the ladder to the goal.

    Starts from a single small rung on the seed coordinate and replays
    the build; every TruncationInsufficient names the pairing target and
    search radius the build got stuck at, and the next free coordinate
    receives a rung just large enough (padded by ``pad``) to clear it.
    The build is deterministic, and a finished table replays the exact
    same ladder because unfilled rungs never influence earlier stages.

    The functional's dimension fixes the budget: one rung for the seed
    coordinate, one for the seed nudge, one per stage.  A dimension
    mismatch in either direction is an error.
    """
    dim = f.dim
    if z.dim != dim:
        raise ValueError("seed vector and functional dimensions differ")
    support = np.flatnonzero(z.coords)
    if support.size != 1 or support[0] != 0:
        raise ValueError("the law designer expects a seed on the first coordinate")
    entries = np.zeros(dim, dtype=np.complex128)
    entries[0] = 1j * first_rung
    for _ in range(dim + 1):
        gen = diagonal_generator_from_entries(entries)
        try:
            build_certificate(
                gen, f, z, eps, stage_goal, j_max=j_max, seed=seed, margin=margin
            )
        except WitnessBuildError as failure:
            cause = failure.cause
            if not isinstance(cause, TruncationInsufficient):
                raise
            free = np.flatnonzero(entries == 0.0)
            if free.size == 0:
                raise ValueError(
                    "growth table is full; the functional dimension is too small "
                    f"for {stage_goal} stages"
                ) from failure
            slot = int(free[0])
            weight = abs(f.coords[slot])
            if weight == 0.0:
                raise ValueError(
                    f"functional vanishes on coordinate {slot + 1}; no rung can help"
                ) from failure
            entries[slot] = 1j * (cause.needed_target * pad / (cause.radius * weight))
            continue
        if np.any(entries == 0.0):
            raise ValueError(
                "growth table finished with unused rungs; shrink the functional "
                f"to dimension {int(np.count_nonzero(entries))}"
            )
        law = GrowthLaw(kind="table", values=tuple(complex(v) for v in entries))
        law_entries(law, dim)
        return law
    raise ValueError("law design did not converge; the stage goal may be unreachable")
