"""Exception types shared across the package.

Every failure mode that callers are expected to branch on gets its own
class here; anything else is a plain ValueError at the raise site.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


class SemigroupLabError(Exception):
    """Base class for package-specific failures."""


class DimensionMismatch(SemigroupLabError):
    """Operands live in coordinate spaces of different dimension."""


class DegeneratePair(SemigroupLabError):
    """A rank-one projection was requested from a nearly orthogonal pair."""


class ZeroPairing(SemigroupLabError):
    """A rotation target pairing is numerically indistinguishable from zero."""


class SemigroupOverflow(SemigroupLabError):
    """A semigroup orbit or product value left the representable range."""


@dataclass
class TruncationInsufficient(SemigroupLabError):
    """No direction inside the search ball reaches the requested pairing size.

    ``best_available`` is the largest pairing magnitude any admissible
    direction can produce, so callers can report how far short the
    search fell.  ``radius`` is the ball radius that was searched.
    """

    needed_target: float
    best_available: float
    radius: float
    stage: int = 0

    def __str__(self) -> str:
        return (
            f"direction search at stage {self.stage} needed pairing >= "
            f"{self.needed_target:.6g} but the search ball of radius "
            f"{self.radius:.6g} tops out at {self.best_available:.6g}"
        )


@dataclass
class ScheduleExhausted(SemigroupLabError):
    """No step count in the dyadic schedule met the accuracy target."""

    j_max: int
    best_error: float
    target: float

    def __str__(self) -> str:
        return (
            f"no step count 2^j with j <= {self.j_max} reached error "
            f"{self.target:.3g} (best {self.best_error:.3g})"
        )


@dataclass
class UnderflowRadius(SemigroupLabError):
    """A certified stability radius fell below the subnormal floor."""

    radius: float
    stage: int

    def __str__(self) -> str:
        return f"stability radius {self.radius:.3g} at stage {self.stage} underflows"


class SpectralBoundViolated(SemigroupLabError):
    """A renorming weight does not dominate the spectral bound."""


@dataclass
class InvalidCertificate(SemigroupLabError):
    """A certificate or report failed re-verification.

    ``failures`` lists every check that did not hold, in the order the
    verifier ran them.
    """

    failures: list[str] = field(default_factory=list)

    def __str__(self) -> str:
        if not self.failures:
            return "certificate invalid (no detail recorded)"
        head = self.failures[0]
        if len(self.failures) == 1:
            return f"certificate invalid: {head}"
        return f"certificate invalid: {head} (+{len(self.failures) - 1} more)"


class ConfigError(SemigroupLabError):
    """An experiment configuration file is malformed or inconsistent."""


@dataclass
class WitnessBuildError(SemigroupLabError):
    """Certificate construction aborted part way through.

    ``partial`` carries the certificate for the stages that did complete
    and ``cause`` the underlying exception.
    """

    partial: Any
    cause: Exception

    def __str__(self) -> str:
        done = len(self.partial.stages) if self.partial is not None else 0
        return f"witness build stopped after {done} stage(s): {self.cause}"
