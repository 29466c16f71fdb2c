"""Product-formula experiments: step pairings, scalar carriers, matrix products.

The scalar route tracks the pairing of a single product step and raises
it to the n-th power in log space, so step values that differ from 1 by
only 1e-40 still produce fully resolved powers.  The matrix route is the
literal alternating product, evaluated step by step.  The two never
share code; comparisons between them are the point of the module.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .errors import SemigroupOverflow
from .projections import Projection, RankOneProjection
from .spaces import (
    CVec,
    Functional,
    Generator,
    apply_generator,
    cexpm1,
    clog1p,
    pairing,
    semigroup_defect,
)

# Materialize product values only while the log-magnitude is safely
# inside the double range; beyond that the log-domain fields carry on.
MATERIALIZE_LOG_BOUND = 700.0

# Below this distance from 1 the per-step logarithm is single-valued and
# the log route is preferred; above it the power route takes over.
LOG_ROUTE_RADIUS = 0.5

_NORMALIZED_SLACK = 1e-9


@dataclass(frozen=True)
class TrotterRecord:
    """One row of a product-formula run at a fixed step count.

    ``value`` is None when the product magnitude cannot be represented;
    ``log_value`` is always present.  ``branch_ambiguous`` marks rows
    whose per-step logarithm left the principal disc, making the
    recorded log a branch choice rather than a continuation.
    """

    steps: int
    step_value: complex
    derivative: complex
    log_value: complex
    value: complex | None
    err_vs_limit: float
    path: str
    branch_ambiguous: bool


def limit_gap_error(limit_log: complex, log_value: complex) -> float:
    """|exp(log_value) - exp(limit_log)| evaluated without leaving log space.

    Uses the factorization exp(Re limit) * |exp(gap) - 1|, which stays
    finite and meaningful when either exponential alone would overflow;
    an overflowing comparison comes back as inf rather than an exception.
    """
    gap = log_value - limit_log
    if not math.isfinite(gap.real) and gap.real > 0.0:
        return math.inf
    if gap.real > 690.0:
        return math.inf
    try:
        scale = math.exp(limit_log.real)
    except OverflowError:
        return math.inf
    return scale * abs(cexpm1(gap))


def step_pairing(a: Generator, f: Functional, x: CVec, t: float, n: int) -> complex:
    """The pairing of one product step: f(exp((t/n) A) x)."""
    return pairing(f, x) + step_derivative(a, f, x, t, n) / float(n)


def step_derivative(a: Generator, f: Functional, x: CVec, t: float, n: int) -> complex:
    """n * f((exp((t/n) A) - I) x), the discrete drift of the step pairing.

    Computed through the orbit defect so nothing is lost to cancellation
    even when t/n is far below the resolution of 1 + t/n.
    """
    h = t / float(n)
    if a.kind == "diagonal":
        total = 0.0 + 0.0j
        for fm, xm, am in zip(f.coords, x.coords, a.entries):
            if fm == 0.0 or xm == 0.0:
                continue
            total += fm * xm * cexpm1(complex(h * am))
        return float(n) * total
    defect = semigroup_defect(a, h)
    return float(n) * complex(np.dot(f.coords, defect @ x.coords))


def _binary_power(base: complex, exponent: int) -> complex | None:
    result = 1.0 + 0.0j
    square = base
    e = exponent
    while e:
        if e & 1:
            result *= square
        e >>= 1
        if e:
            square *= square
        if not (math.isfinite(result.real) and math.isfinite(result.imag)):
            return None
        if e and not (math.isfinite(square.real) and math.isfinite(square.imag)):
            return None
    return result


def scalar_trotter_value(
    a: Generator, f: Functional, x: CVec, t: float, n: int
) -> TrotterRecord:
    """The full scalar record for the n-step product pairing.

    Requires the pairing f(x) = 1 (the scalar reduction only closes in
    that gauge).  The error against the limit exp(t f(A x)) is evaluated
    in log space so it stays meaningful when the value itself overflows.
    """
    gauge = pairing(f, x)
    if abs(gauge - 1.0) > _NORMALIZED_SLACK:
        raise ValueError(f"scalar route needs f(x) = 1, got {gauge:.6g}")
    if n < 1:
        raise ValueError("step count must be positive")
    deriv = step_derivative(a, f, x, t, n)
    offset = deriv / float(n)
    step_value = 1.0 + offset
    if abs(offset) <= LOG_ROUTE_RADIUS:
        path = "log"
        branch_ambiguous = False
        log_value = float(n) * clog1p(offset)
        value = cmath.exp(log_value) if abs(log_value.real) < MATERIALIZE_LOG_BOUND else None
    else:
        path = "pow"
        branch_ambiguous = True
        log_value = float(n) * cmath.log(step_value)
        if abs(log_value.real) < MATERIALIZE_LOG_BOUND:
            value = _binary_power(step_value, n)
        else:
            value = None
    drift = pairing(f, apply_generator(a, x))
    err = limit_gap_error(t * drift, log_value)
    return TrotterRecord(
        steps=n,
        step_value=step_value,
        derivative=deriv,
        log_value=log_value,
        value=value,
        err_vs_limit=err,
        path=path,
        branch_ambiguous=branch_ambiguous,
    )


def dense_trotter_apply(
    a: Generator, proj: Projection, x: CVec, t: float, n: int
) -> CVec:
    """The literal alternating product (exp((t/n) A) P)^n x.

    Evaluated left to right with one projection and one orbit step per
    factor; no algebraic shortcuts, so this is the honest comparison
    target for the scalar route and the limit oracle.
    """
    if n < 1:
        raise ValueError("step count must be positive")
    h = t / float(n)
    if a.kind == "diagonal":
        step_diag = np.exp(h * a.entries)

        def orbit(v: np.ndarray) -> np.ndarray:
            return step_diag * v

    else:
        defect = semigroup_defect(a, h)

        def orbit(v: np.ndarray) -> np.ndarray:
            return v + defect @ v

    if isinstance(proj, RankOneProjection):
        f_coords = proj.functional.coords
        range_coords = proj.vector.coords

        def apply_proj(v: np.ndarray) -> np.ndarray:
            return (f_coords @ v) * range_coords

    else:
        matrix = proj.matrix

        def apply_proj(v: np.ndarray) -> np.ndarray:
            return matrix @ v

    coords = x.coords
    check_every = max(1, n // 64)
    # overflow is caught by the finiteness checks, not by numpy warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n):
            coords = orbit(apply_proj(coords))
            if k % check_every == 0 and not np.all(np.isfinite(coords)):
                raise SemigroupOverflow(
                    f"alternating product overflowed at step {k + 1}"
                )
    if not np.all(np.isfinite(coords)):
        raise SemigroupOverflow(f"alternating product overflowed at step {n}")
    return CVec(coords, x.p)


def limit_check(
    a: Generator,
    f: Functional,
    x: CVec,
    t: float,
    schedule: Iterable[int],
) -> list[TrotterRecord]:
    """Scalar records along a step-count schedule, in the given order."""
    return [scalar_trotter_value(a, f, x, t, n) for n in schedule]


def _projection_matrix(proj: Projection) -> np.ndarray:
    if isinstance(proj, RankOneProjection):
        return np.outer(proj.vector.coords, proj.functional.coords)
    return np.asarray(proj.matrix)


def _generator_matrix(a: Generator) -> np.ndarray:
    if a.kind == "diagonal":
        return np.diag(a.entries)
    return np.asarray(a.matrix)


def bounded_limit_oracle(a: Generator, proj: Projection, t: float) -> np.ndarray:
    """The strong limit of the alternating products for bounded A.

    Returns the matrix exp(t P A P) P, evaluated through a library
    matrix exponential so it shares no code with the product routes.
    """
    p_mat = _projection_matrix(proj)
    compressed = p_mat @ _generator_matrix(a) @ p_mat
    return scipy.linalg.expm(t * compressed) @ p_mat


def dyadic_schedule(j_min: int, j_max: int) -> Sequence[int]:
    """Step counts 2^j for j_min <= j <= j_max."""
    if j_min < 0 or j_max < j_min:
        raise ValueError("need 0 <= j_min <= j_max")
    return [2**j for j in range(j_min, j_max + 1)]
