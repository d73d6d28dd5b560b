"""Exact evaluation of the cone-separation scalarizer phi(y).

For a polytope H inside a cone K with the origin strictly separated from
H + K, the functional

    phi(y) = inf { t : y in t*H - K }

is finite or +infinity, never -infinity.  Two routes compute it:

* `evaluate` obtains the exact infimum from two linear programs.  On the
  branch t >= 0 the substitution mu_i = t * lambda_i turns the bilinear
  constraint into ``y = sum mu_i h_i - k`` with objective ``min sum mu``;
  on the branch t < 0 the substitution mu_i = -t * lambda_i yields
  ``-y = sum mu_i h_i + k`` with objective ``max sum mu``.  H sitting
  inside K makes the feasible scale set an upward-closed interval, so
  the smaller achievable value across branches is the infimum.
* `evaluate_bisection` never looks at the branch decomposition: it
  brackets the threshold by doubling and bisects fixed-scale membership
  queries down to a requested width.  Its correctness rests only on the
  monotonicity of feasibility in the scale, which makes it a genuinely
  independent cross-check for `evaluate`.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .geometry import (
    ConeGen,
    DimensionMismatchError,
    InvalidConfigurationError,
    Polytope,
    cone_contains,
    scaled_H_minus_K_contains,
    zero_notin_H_plus_K,
)
from .lp_core import EXACT, Backend, LinearProgram, solve
from .rational import Number, Vec, frac, frac_vec, vec_sub

__all__ = [
    "InternalConsistencyError",
    "BracketExhaustedError",
    "ExtendedReal",
    "SeparationFunctional",
    "BisectionResult",
    "evaluate",
    "evaluate_bisection",
    "xi",
    "attainment_check",
]


class InternalConsistencyError(RuntimeError):
    """A result contradicts a validated invariant; indicates a bug."""


class BracketExhaustedError(RuntimeError):
    """Bisection could not bracket the value within the configured bound."""


@functools.total_ordering
@dataclass(frozen=True)
class ExtendedReal:
    """A finite rational or +infinity.  -infinity is unrepresentable:
    the functional producing these values is built only over configurations
    where it cannot occur."""

    value: Optional[Fraction] = None  # None encodes +infinity

    @classmethod
    def finite(cls, v: Number) -> "ExtendedReal":
        return cls(frac(v))

    @classmethod
    def plus_infinity(cls) -> "ExtendedReal":
        return cls(None)

    @property
    def is_finite(self) -> bool:
        return self.value is not None

    def __lt__(self, other: "ExtendedReal") -> bool:
        if not isinstance(other, ExtendedReal):
            return NotImplemented
        if self.value is None:
            return False
        if other.value is None:
            return True
        return self.value < other.value

    def __str__(self) -> str:
        return "+inf" if self.value is None else str(self.value)


@dataclass(frozen=True)
class SeparationFunctional:
    """The pair (H, K) with evaluation tolerances.

    Construction validates the configuration the evaluators require:
    every vertex of H lies in K but not in -K, and the origin is
    certified to avoid H + K.  Violations raise
    `InvalidConfigurationError` immediately rather than producing
    meaningless values later.
    """

    H: Polytope
    K: ConeGen
    t_max: Fraction = Fraction(2**20)
    tol: Fraction = Fraction(1, 10**9)

    def __post_init__(self) -> None:
        object.__setattr__(self, "t_max", frac(self.t_max))
        object.__setattr__(self, "tol", frac(self.tol))
        if self.H.dim != self.K.dim:
            raise DimensionMismatchError("H and K dimensions differ")
        if self.t_max <= 0 or self.tol <= 0:
            raise InvalidConfigurationError("t_max and tol must be positive")
        for v in self.H.vertices:
            if not cone_contains(self.K, v):
                raise InvalidConfigurationError(
                    f"H vertex {tuple(map(str, v))} lies outside the cone"
                )
            if cone_contains(self.K, tuple(-c for c in v)):
                raise InvalidConfigurationError(
                    f"H vertex {tuple(map(str, v))} lies in -K"
                )
        if not zero_notin_H_plus_K(self.H, self.K):
            raise InvalidConfigurationError("origin belongs to H + K")

    def __hash__(self) -> int:
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.H, self.K, self.t_max, self.tol))
            object.__setattr__(self, "_hash", h)
        return h


def _branch_lp(
    F: SeparationFunctional, target: Vec, k_sign: int, sense: str
) -> LinearProgram:
    p, m = len(F.H.vertices), len(F.K.generators)
    rows = []
    for r in range(F.H.dim):
        row = [F.H.vertices[i][r] for i in range(p)]
        row += [k_sign * F.K.generators[j][r] for j in range(m)]
        rows.append(row)
    objective = [Fraction(1)] * p + [Fraction(0)] * m
    return LinearProgram.optimize(objective, sense, rows, target, [True] * (p + m))


def evaluate(
    F: SeparationFunctional, y: Sequence[Number], backend: Backend = EXACT
) -> ExtendedReal:
    """phi(y) = inf { t : y in t*H - K }, exactly via two LPs."""
    yv = frac_vec(y)
    if len(yv) != F.H.dim:
        raise DimensionMismatchError(
            f"query has length {len(yv)}, expected {F.H.dim}"
        )
    # t < 0 branch: -y = sum mu h + k, maximize sum mu; value is -max.
    neg = solve(_branch_lp(F, tuple(-c for c in yv), +1, "max"), backend)
    if neg.status == "unbounded":
        raise InternalConsistencyError(
            "negative branch unbounded despite origin-separation invariant"
        )
    # t >= 0 branch: y = sum mu h - k, minimize sum mu.
    pos = solve(_branch_lp(F, yv, -1, "min"), backend)
    if neg.is_feasible and neg.value > 0:
        if not pos.is_feasible:
            raise InternalConsistencyError(
                "scale feasibility failed to be upward closed"
            )
        return ExtendedReal.finite(-neg.value)
    if pos.is_feasible:
        return ExtendedReal.finite(pos.value)
    if neg.is_feasible:
        raise InternalConsistencyError(
            "negative branch feasible at zero while t >= 0 branch is not"
        )
    return ExtendedReal.plus_infinity()


@dataclass(frozen=True)
class BisectionResult:
    """Bracketed value plus a flag for an unconfirmed +infinity verdict.

    `unconfirmed_at_t_max` distinguishes "no feasible scale up to the
    bracket bound" from a certified empty scale set, which bisection
    alone can never establish.
    """

    value: ExtendedReal
    unconfirmed_at_t_max: bool = False


def evaluate_bisection(
    F: SeparationFunctional, y: Sequence[Number], backend: Backend = EXACT
) -> BisectionResult:
    """Bracket-and-bisect phi(y) to within F.tol.

    Doubles outward from +-1 to find a feasible upper scale and an
    infeasible lower scale, then bisects.  Returns the feasible endpoint
    of the final bracket, which sits within tol above the infimum.
    """
    yv = frac_vec(y)
    if len(yv) != F.H.dim:
        raise DimensionMismatchError(
            f"query has length {len(yv)}, expected {F.H.dim}"
        )

    def feasible(t: Fraction) -> bool:
        return scaled_H_minus_K_contains(F.H, F.K, yv, t, backend)

    hi = Fraction(1)
    while not feasible(hi):
        hi *= 2
        if hi > F.t_max:
            return BisectionResult(
                ExtendedReal.plus_infinity(), unconfirmed_at_t_max=True
            )
    lo = Fraction(-1)
    while feasible(lo):
        lo *= 2
        if -lo > F.t_max:
            raise BracketExhaustedError(
                f"still feasible at scale {lo}; no lower bracket within t_max"
            )
    while hi - lo > F.tol:
        mid = (hi + lo) / 2
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return BisectionResult(ExtendedReal.finite(hi))


def xi(
    F: SeparationFunctional,
    y: Sequence[Number],
    y0: Sequence[Number],
    backend: Backend = EXACT,
) -> ExtendedReal:
    """Shifted evaluation phi(y - y0), the descent potential."""
    return evaluate(F, vec_sub(frac_vec(y), frac_vec(y0)), backend)


def attainment_check(
    F: SeparationFunctional, y: Sequence[Number], backend: Backend = EXACT
) -> bool:
    """Does y itself belong to phi(y)*H - K?

    With compact H and closed K the infimum is always attained, so a
    False here is a bug detector rather than a legitimate outcome.
    """
    val = evaluate(F, y, backend)
    if not val.is_finite:
        raise ValueError("attainment is only defined for finite values")
    return scaled_H_minus_K_contains(F.H, F.K, y, val.value, backend)
