"""Finite sections of sequence spaces, coordinate generators, and orbits.

Vectors live in a truncated complex sequence space with an l^p norm
(p in {1, 2, inf}); functionals carry the same tag and are measured in
the conjugate exponent.  The pairing is bilinear, not sesquilinear:
``pairing(f, v) = sum_m f_m v_m``.

Generators come in two flavours.  Diagonal ones are built from a growth
law and act coordinatewise; dense ones are explicit matrices.  Orbits
``exp(t A) v`` are computed directly in the diagonal case and through a
scaling-and-squaring evaluation of ``exp(t A) - I`` in the dense case so
that small-time drifts are not lost to cancellation.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, SemigroupOverflow

# exp() overflows just above 709.78; leave a little headroom.
EXP_OVERFLOW = 709.0

_LAW_KINDS = ("poly", "imag_poly", "geom", "factorial", "imag_double_exp", "table")
_P_VALUES = (1.0, 2.0, math.inf)


def _coerce_coords(coords) -> np.ndarray:
    arr = np.asarray(coords, dtype=np.complex128)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("coordinates must form a nonempty 1-d array")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


def _check_p(p: float) -> float:
    p = float(p)
    if p not in _P_VALUES:
        raise ValueError(f"p must be one of 1, 2, inf (got {p!r})")
    return p


@dataclass(frozen=True, eq=False)
class CVec:
    """A point of the truncated sequence space, tagged with its norm index."""

    coords: np.ndarray
    p: float = 2.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "coords", _coerce_coords(self.coords))
        object.__setattr__(self, "p", _check_p(self.p))

    @property
    def dim(self) -> int:
        return self.coords.size


@dataclass(frozen=True, eq=False)
class Functional:
    """A coordinate functional on the space tagged ``p``.

    The tag names the predual space; the size of the functional is the
    l^q norm of its coefficients for the conjugate exponent q.
    """

    coords: np.ndarray
    p: float = 2.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "coords", _coerce_coords(self.coords))
        object.__setattr__(self, "p", _check_p(self.p))

    @property
    def dim(self) -> int:
        return self.coords.size


@dataclass(frozen=True)
class GrowthLaw:
    """A named family of diagonal generator entries.

    kind           entry at coordinate m (1-based)
    -------------  --------------------------------
    poly           -m**param
    imag_poly      1j * m**param
    geom           1j * param**m
    factorial      1j * m!
    imag_double_exp 1j * param**(2**m)
    table          values[m-1] verbatim

    Entry moduli must be nondecreasing in m; ``law_entries`` enforces
    this for every kind, including explicit tables.
    """

    kind: str
    param: float = 0.0
    values: tuple[complex, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.kind not in _LAW_KINDS:
            raise ValueError(f"unknown growth law kind {self.kind!r}")
        if self.kind == "table" and not self.values:
            raise ValueError("table law needs explicit values")
        object.__setattr__(self, "values", tuple(complex(v) for v in self.values))


def law_entries(law: GrowthLaw, dim: int) -> np.ndarray:
    """Materialize the first ``dim`` entries of a growth law."""
    if dim < 1:
        raise ValueError("dimension must be positive")
    m = np.arange(1, dim + 1, dtype=np.float64)
    if law.kind == "poly":
        entries = -(m**law.param) + 0j
    elif law.kind == "imag_poly":
        entries = 1j * m**law.param
    elif law.kind == "geom":
        entries = 1j * law.param**m
    elif law.kind == "factorial":
        entries = 1j * np.array([math.factorial(k) for k in range(1, dim + 1)], dtype=np.float64)
    elif law.kind == "imag_double_exp":
        exponents = 2.0 ** np.arange(1, dim + 1)
        logs = exponents * math.log(law.param)
        if np.max(logs) > EXP_OVERFLOW:
            raise SemigroupOverflow(
                f"imag_double_exp entry {dim} exceeds the floating range"
            )
        entries = 1j * np.exp(logs)
    elif law.kind == "table":
        if len(law.values) != dim:
            raise DimensionMismatch(
                f"table law holds {len(law.values)} entries, requested {dim}"
            )
        entries = np.asarray(law.values, dtype=np.complex128)
    else:  # pragma: no cover - guarded in GrowthLaw
        raise ValueError(f"unknown growth law kind {law.kind!r}")
    moduli = np.abs(entries)
    if np.any(np.diff(moduli) < 0.0):
        raise ValueError("growth law moduli must be nondecreasing")
    return np.asarray(entries, dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class Generator:
    """A diagonal or dense generator on the truncated space.

    Diagonal generators keep the law they came from (when they came from
    one) so configs can be reproduced from the record alone.
    """

    kind: str
    entries: np.ndarray | None = None
    matrix: np.ndarray | None = None
    law: GrowthLaw | None = None

    def __post_init__(self) -> None:
        if self.kind == "diagonal":
            if self.entries is None:
                raise ValueError("diagonal generator needs entries")
            object.__setattr__(self, "entries", _coerce_coords(self.entries))
            if self.law is not None:
                expected = law_entries(self.law, self.entries.size)
                if not np.array_equal(expected, self.entries):
                    raise ValueError("diagonal entries disagree with the declared law")
        elif self.kind == "dense":
            if self.matrix is None:
                raise ValueError("dense generator needs a matrix")
            mat = np.asarray(self.matrix, dtype=np.complex128)
            if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
                raise ValueError("dense generator matrix must be square")
            mat = mat.copy()
            mat.setflags(write=False)
            object.__setattr__(self, "matrix", mat)
        else:
            raise ValueError(f"unknown generator kind {self.kind!r}")

    @property
    def dim(self) -> int:
        if self.kind == "diagonal":
            return self.entries.size
        return self.matrix.shape[0]


def diagonal_generator(law: GrowthLaw, dim: int) -> Generator:
    return Generator(kind="diagonal", entries=law_entries(law, dim), law=law)


def diagonal_generator_from_entries(entries) -> Generator:
    """A diagonal generator with explicit entries and no named law."""
    return Generator(kind="diagonal", entries=np.asarray(entries, dtype=np.complex128))


def dense_generator(matrix) -> Generator:
    return Generator(kind="dense", matrix=matrix)


def _conjugate_exponent(p: float) -> float:
    if p == 1.0:
        return math.inf
    if p == math.inf:
        return 1.0
    return p / (p - 1.0)


def _lp(coords: np.ndarray, p: float) -> float:
    if p == math.inf:
        return float(np.max(np.abs(coords)))
    if p == 1.0:
        return float(np.sum(np.abs(coords)))
    return float(np.linalg.norm(coords))


def norm(v: CVec) -> float:
    """The l^p norm of a vector under its own tag."""
    return _lp(v.coords, v.p)


def dual_norm(f: Functional) -> float:
    """The size of a functional: the l^q norm for the conjugate exponent."""
    return _lp(f.coords, _conjugate_exponent(f.p))


def _check_dims(a: int, b: int, what: str) -> None:
    if a != b:
        raise DimensionMismatch(f"{what}: dimensions {a} and {b} differ")


def pairing(f: Functional, v: CVec) -> complex:
    """The bilinear pairing sum_m f_m v_m (no conjugation)."""
    _check_dims(f.dim, v.dim, "pairing")
    return complex(np.dot(f.coords, v.coords))


def apply_generator(a: Generator, v: CVec) -> CVec:
    _check_dims(a.dim, v.dim, "apply_generator")
    if a.kind == "diagonal":
        return CVec(a.entries * v.coords, v.p)
    return CVec(a.matrix @ v.coords, v.p)


def cexpm1(z: complex) -> complex:
    """exp(z) - 1 for complex z without cancellation near zero.

    The real part uses expm1 plus the versine identity
    ``cos(y) - 1 = -2 sin(y/2)^2`` so both pieces stay accurate for
    small arguments.
    """
    x, y = z.real, z.imag
    re = math.expm1(x) * math.cos(y) - 2.0 * math.sin(y / 2.0) ** 2
    im = math.exp(x) * math.sin(y)
    return complex(re, im)


def clog1p(z: complex) -> complex:
    """log(1 + z) on the principal branch, accurate for small |z|.

    Falls back to the direct logarithm once |z| is large enough that the
    alternating series stops paying for itself.
    """
    if abs(z) > 0.5:
        return cmath.log(1.0 + z)
    term = complex(z)
    total = complex(z)
    for k in range(2, 64):
        term *= -z
        total += term / k
        if abs(term) <= 1e-18 * max(abs(total), 1e-300):
            break
    return total


def _dense_defect(matrix: np.ndarray) -> np.ndarray:
    """exp(M) - I by scaling and squaring on the defect itself.

    The Taylor core runs at spectral-norm radius <= 1/2; squaring uses
    ``exp(2C) - I = (exp(C) - I)^2 + 2 (exp(C) - I)`` which never forms
    exp(M) and so keeps small defects fully resolved.
    """
    scale = float(np.linalg.norm(matrix, 2))
    if scale > 690.0:
        raise SemigroupOverflow(f"dense orbit with |tA| = {scale:.3g} overflows")
    squarings = 0 if scale <= 0.5 else int(math.ceil(math.log2(scale / 0.5)))
    core = matrix / (2.0**squarings)
    dim = matrix.shape[0]
    power = np.eye(dim, dtype=np.complex128)
    defect = np.zeros_like(core)
    for k in range(1, 24):
        power = power @ core / k
        defect = defect + power
        if np.linalg.norm(power, 2) <= 1e-18 * max(np.linalg.norm(defect, 2), 1e-300):
            break
    for _ in range(squarings):
        defect = defect @ defect + 2.0 * defect
    return defect


def semigroup_defect(a: Generator, t: float):
    """The drift ``exp(t A) - I`` of the orbit map at time t.

    Returns a vector of diagonal drifts for a diagonal generator and a
    full matrix for a dense one.
    """
    if a.kind == "diagonal":
        scaled = t * a.entries
        if np.max(scaled.real) > EXP_OVERFLOW:
            raise SemigroupOverflow(f"diagonal orbit at t = {t:.3g} overflows")
        return np.array([cexpm1(complex(z)) for z in scaled], dtype=np.complex128)
    return _dense_defect(t * a.matrix)


def semigroup_apply(a: Generator, t: float, v: CVec) -> CVec:
    """Evaluate ``exp(t A) v``."""
    _check_dims(a.dim, v.dim, "semigroup_apply")
    if a.kind == "diagonal":
        scaled = t * a.entries
        if np.max(scaled.real) > EXP_OVERFLOW:
            raise SemigroupOverflow(f"diagonal orbit at t = {t:.3g} overflows")
        return CVec(np.exp(scaled) * v.coords, v.p)
    defect = semigroup_defect(a, t)
    return CVec(v.coords + defect @ v.coords, v.p)


def adjoint_defect(a: Generator, f: Functional) -> float:
    """The size of the composed functional v -> f(A v).

    For diagonal generators with an unbounded law this grows without
    bound as the truncation dimension increases; the growth curve is the
    evidence that the functional escapes the adjoint's domain.
    """
    _check_dims(a.dim, f.dim, "adjoint_defect")
    if a.kind == "diagonal":
        composed = a.entries * f.coords
    else:
        composed = a.matrix.T @ f.coords
    return dual_norm(Functional(composed, f.p))
