"""Renorming audits: split norms, classical weighted norms, growth exponents.

Two renorming routes are audited.  The split norm measures a vector
through a bounded projection, ``|P z| + |z - P z|``; it is equivalent to
the base norm within [1, 2|P| + 1] and the projection is a contraction
for it.  The classical weighted norm ``sup_t exp(-w t) |exp(tA) z|``
makes a semigroup with spectral bound below w quasi-contractive.  The
lambda table extracted from a witness certificate gives per-stage lower
bounds on any quasi-contractivity exponent a renorming could achieve,
which is the quantitative obstruction the certificates exist to show.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SpectralBoundViolated
from .projections import Projection, RankOneProjection, make_rank_one, project, projection_norm
from .spaces import (
    CVec,
    Functional,
    Generator,
    dual_norm,
    norm,
    semigroup_apply,
)
from .witness import WitnessCertificate

DEFAULT_GRID_POINTS = 257
DEFAULT_SLACK = 1e-10
DEFAULT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class RenormReport:
    """Outcome of a renorming audit, self-describing enough to re-run.

    ``violations`` holds one row per offending sample (empty on a pass);
    ``summary`` carries the named scalar outcomes of the audit kind.
    ``source`` optionally embeds the inputs (generator description or
    certificate payload) so a report file can be re-run and re-checked
    with nothing but the file itself.
    """

    kind: str
    seed: int
    vector_samples: int
    time_samples: int
    parameters: dict
    summary: dict
    lambdas: tuple[float, ...]
    violations: tuple[tuple, ...]
    passed: bool
    source: dict = field(default_factory=dict)


def split_norm(proj: Projection, z: CVec) -> float:
    """|P z| + |z - P z|: the norm adapted to the projection's splitting."""
    image = project(proj, z)
    return norm(image) + norm(CVec(z.coords - image.coords, z.p))


def _draw(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    return rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))


def equivalence_audit(
    proj: Projection,
    seed: int = 0,
    samples: int = 1000,
    slack: float = DEFAULT_SLACK,
) -> tuple[float, float, list[tuple]]:
    """Sample the ratio split_norm/norm and check it stays in [1, 2|P|+1].

    Returns (min_ratio, max_ratio, violations); a violation row is
    (sample index, ratio, low bound, high bound).
    """
    rng = np.random.default_rng(seed)
    p = proj.functional.p if isinstance(proj, RankOneProjection) else proj.p
    high = 2.0 * projection_norm(proj) + 1.0
    lo, hi = math.inf, 0.0
    violations: list[tuple] = []
    for i, row in enumerate(_draw(rng, samples, proj.dim)):
        z = CVec(row, p)
        ratio = split_norm(proj, z) / norm(z)
        lo = min(lo, ratio)
        hi = max(hi, ratio)
        if ratio < 1.0 - slack or ratio > high + slack:
            violations.append((i, ratio, 1.0, high))
    return lo, hi, violations


def projection_contractivity_check(
    proj: Projection,
    seed: int = 0,
    samples: int = 1000,
    slack: float = DEFAULT_SLACK,
) -> tuple[float, list[tuple]]:
    """Check split_norm(P z) <= split_norm(z) on random samples.

    Returns (max ratio, violations); equality is attained on the range
    of P, so the max should sit at 1 up to rounding.
    """
    rng = np.random.default_rng(seed)
    p = proj.functional.p if isinstance(proj, RankOneProjection) else proj.p
    worst = 0.0
    violations: list[tuple] = []
    for i, row in enumerate(_draw(rng, samples, proj.dim)):
        z = CVec(row, p)
        denom = split_norm(proj, z)
        if denom == 0.0:
            continue
        ratio = split_norm(proj, project(proj, z)) / denom
        worst = max(worst, ratio)
        if ratio > 1.0 + slack:
            violations.append((i, ratio, 1.0))
    return worst, violations


def witness_projection(cert: WitnessCertificate) -> RankOneProjection:
    """The rank-one projection onto the certificate's witness vector."""
    return make_rank_one(cert.functional_obj(), CVec(cert.witness, cert.p))


def lambda_lower_bounds(cert: WitnessCertificate) -> tuple[float, ...]:
    """Per-stage lower bounds on any quasi-contractivity exponent.

    Stage k's product moves the witness y to a vector of norm at least
    |value_k(y)| / |f|; against |y| that forces a growth exponent of at
    least log(|value_k(y)| / (|f| |y|)) at time 1, however the space is
    renormed (equivalent norms shift the bound by an additive constant
    independent of k, which the gap between stages swallows).
    """
    scale = math.log(dual_norm(cert.functional_obj()) * norm(CVec(cert.witness, cert.p)))
    return tuple(lv.real - scale for lv in cert.witness_log_values)


def spectral_bound(a: Generator) -> float:
    """max Re of the generator's spectrum."""
    if a.kind == "diagonal":
        return float(np.max(a.entries.real))
    return float(np.max(np.linalg.eigvals(a.matrix).real))


def renorm_time_grid(
    a: Generator, omega: float, points: int = DEFAULT_GRID_POINTS
) -> np.ndarray:
    """A geometric time grid {0} u [T*1e-6, T] for the weighted-norm sup.

    The horizon T = 50 / (omega - spectral bound) is far enough out that
    the weighted orbit has decayed below any tolerance in use.  Raises
    SpectralBoundViolated when omega does not dominate the bound.
    """
    bound = spectral_bound(a)
    if omega <= bound:
        raise SpectralBoundViolated(
            f"weight {omega:.6g} does not exceed the spectral bound {bound:.6g}"
        )
    if points < 2:
        raise ValueError("grid needs at least two points")
    horizon = 50.0 / (omega - bound)
    tail = np.geomspace(horizon * 1e-6, horizon, points - 1)
    return np.concatenate(([0.0], tail))


def classical_renorm_value(
    a: Generator,
    omega: float,
    z: CVec,
    grid: np.ndarray | None = None,
) -> tuple[float, float]:
    """sup over the grid of exp(-omega t) |exp(tA) z|, with its argmax.

    For a generator with nonpositive spectral bound the sup sits at
    t = 0 and the weighted norm coincides with the base norm; the grid
    evaluation confirms rather than assumes that.
    """
    if grid is None:
        grid = renorm_time_grid(a, omega)
    best, best_t = -math.inf, 0.0
    for t in grid:
        value = math.exp(-omega * float(t)) * norm(semigroup_apply(a, float(t), z))
        if value > best:
            best, best_t = value, float(t)
    return best, best_t


def _classical_audit(
    a: Generator,
    omega: float,
    p: float,
    seed: int,
    vector_samples: int,
    time_samples: int,
    grid_points: int,
    tol: float,
) -> RenormReport:
    grid = renorm_time_grid(a, omega, grid_points)
    rng = np.random.default_rng(seed)
    dim = a.dim
    draws = _draw(rng, vector_samples, dim)
    shift_idx = np.unique(
        np.round(np.linspace(0, grid.size - 1, time_samples)).astype(int)
    )
    shifts = grid[shift_idx]
    violations: list[tuple] = []
    worst_excess = -math.inf
    if a.kind == "diagonal" and p == 2.0:
        # Vectorized moduli-squared route: orbit norms become a matmul.
        decay = np.exp(2.0 * np.outer(grid, a.entries.real))
        weights = np.exp(-2.0 * omega * grid)
        sq = np.abs(draws) ** 2
        base = np.sqrt(np.max((sq @ decay.T) * weights, axis=1))
        for s in shifts:
            shifted_sq = sq * np.exp(2.0 * float(s) * a.entries.real)
            lhs = np.sqrt(np.max((shifted_sq @ decay.T) * weights, axis=1))
            rhs = math.exp(omega * float(s)) * base
            excess = lhs - rhs
            worst_excess = max(worst_excess, float(np.max(excess)))
            for i in np.flatnonzero(excess > tol):
                violations.append((int(i), float(s), float(lhs[i]), float(rhs[i])))
    else:
        for i, row in enumerate(draws):
            z = CVec(row, p)
            base, _ = classical_renorm_value(a, omega, z, grid)
            for s in shifts:
                shifted = semigroup_apply(a, float(s), z)
                lhs, _ = classical_renorm_value(a, omega, shifted, grid)
                rhs = math.exp(omega * float(s)) * base
                worst_excess = max(worst_excess, lhs - rhs)
                if lhs - rhs > tol:
                    violations.append((i, float(s), lhs, rhs))
    passed = not violations
    return RenormReport(
        kind="classical",
        seed=seed,
        vector_samples=vector_samples,
        time_samples=int(shifts.size),
        parameters={
            "omega": omega,
            "p": p,
            "dim": dim,
            "grid_points": grid_points,
            "time_samples_requested": time_samples,
            "tol": tol,
            "spectral_bound": spectral_bound(a),
        },
        summary={"worst_excess": worst_excess, "horizon": float(grid[-1])},
        lambdas=(),
        violations=tuple(violations),
        passed=passed,
    )


def _split_audit(
    cert: WitnessCertificate,
    seed: int,
    vector_samples: int,
    slack: float,
) -> RenormReport:
    proj = witness_projection(cert)
    lo, hi, eq_violations = equivalence_audit(
        proj, seed=seed, samples=vector_samples, slack=slack
    )
    worst, ctr_violations = projection_contractivity_check(
        proj, seed=seed + 1, samples=vector_samples, slack=slack
    )
    lambdas = lambda_lower_bounds(cert)
    increasing = all(b > a for a, b in zip(lambdas, lambdas[1:]))
    high = 2.0 * projection_norm(proj) + 1.0
    violations = [("equivalence", *row) for row in eq_violations]
    violations += [("contractivity", *row) for row in ctr_violations]
    if not increasing:
        violations.append(("lambda_order",) + lambdas)
    passed = not violations
    return RenormReport(
        kind="split",
        seed=seed,
        vector_samples=vector_samples,
        time_samples=0,
        parameters={
            "p": cert.p,
            "dim": cert.dim,
            "eps": cert.eps,
            "slack": slack,
            "projection_norm": projection_norm(proj),
        },
        summary={
            "min_ratio": lo,
            "max_ratio": hi,
            "ratio_bound": high,
            "contractivity_max": worst,
            "lambda_gap": lambdas[-1] - lambdas[0] if len(lambdas) > 1 else 0.0,
        },
        lambdas=lambdas,
        violations=tuple(violations),
        passed=passed,
    )


def quasi_contractivity_audit(
    kind: str,
    cert: WitnessCertificate | None = None,
    a: Generator | None = None,
    omega: float | None = None,
    p: float = 2.0,
    seed: int = 0,
    vector_samples: int = 1000,
    time_samples: int = 8,
    grid_points: int = DEFAULT_GRID_POINTS,
    slack: float = DEFAULT_SLACK,
    tol: float = DEFAULT_TOL,
) -> RenormReport:
    """Audit a renorming route and report violations, if any.

    kind "split" takes a witness certificate: it checks the split-norm
    sandwich and projection contractivity, and tabulates the lambda
    lower bounds that cap what any renorming could achieve.  kind
    "classical" takes a generator and weight: it checks the weighted
    norm's quasi-contractivity sample by sample on the time grid.
    """
    if kind == "split":
        if cert is None:
            raise ValueError("split audit needs a certificate")
        return _split_audit(cert, seed, vector_samples, slack)
    if kind == "classical":
        if a is None or omega is None:
            raise ValueError("classical audit needs a generator and a weight")
        return _classical_audit(
            a, omega, p, seed, vector_samples, time_samples, grid_points, tol
        )
    raise ValueError(f"unknown audit kind {kind!r}")
