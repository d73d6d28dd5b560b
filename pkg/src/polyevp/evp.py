"""Variational descent with set-valued objectives on finite metric spaces.

A problem bundles a finite metric space (X, d), a table f mapping each
point to a finite set of vectors, an ordering cone K, a perturbation
polytope H inside K, a start point x0, and a positive eps.  The binary
relation

    x' <= x   iff   f(x) within f(x') + scale * d(x, x') * H + K

is reflexive and transitive (the perturbation family satisfies the
triangle property because H + K is convex), and the lower section S(x)
collects the points below x.  On a finite space every completeness and
closedness hypothesis of the underlying variational principle holds
automatically, so the principle's conclusions become finitely checkable:

(a) the returned point xbar lies in S(x0), and
(b) nothing else lies strictly below xbar.

The solver realizes the constructive argument directly: pick an image
y0 of x0 that escapes every eps-shifted image set (the lower-boundedness
hypothesis), score points by the cone-separation potential
xi(y) = phi(y - y0), and repeatedly move to the argmin of the current
lower section.  Each move strictly drops the score by at least
scale * step distance, so the walk terminates in at most |X| steps.

Three scale modes cover the standard statements: ``plain`` uses scale 1;
``scaled(eps, lam)`` uses eps/lam and additionally guarantees
d(x0, xbar) <= lam; ``efficiency(gamma)`` restricts to a feasible subset
S, uses scale gamma, requires the start point to be approximately
efficient in the shifted-set sense, and additionally guarantees
d(x0, xbar) <= eps/gamma plus a coradiant escape property of the
perturbation direction.
"""

from __future__ import annotations

import functools
import itertools
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .geometry import (
    ConeGen,
    DimensionMismatchError,
    InvalidConfigurationError,
    Polytope,
    scaled_H_plus_K_contains,
    validate_cone,
    zero_notin_H_plus_K,
)
from .lp_core import EXACT, Backend
from .rational import Number, Vec, frac, frac_vec, vec_sub
from .scalarization import (
    ExtendedReal,
    InternalConsistencyError,
    SeparationFunctional,
    evaluate,
)

__all__ = [
    "HypothesisViolatedError",
    "ScaleMismatchWarning",
    "FiniteMetricSpace",
    "SetValuedMapTable",
    "PlainMode",
    "ScaledMode",
    "EfficiencyMode",
    "EVPProblem",
    "EVPCertificate",
    "VerificationReport",
    "CoradiantGapResult",
    "dominates",
    "lower_section",
    "condition_ii_witness",
    "solve",
    "verify_certificate",
    "ae_efficient",
    "coradiant_escape_check",
    "clear_dominance_cache",
]


class HypothesisViolatedError(RuntimeError):
    """The start point admits no escaping image at the requested eps.

    ``blocking`` maps each candidate image of x0 to the (point, image)
    pair that reaches it, which is exactly the data needed to see why
    the lower-boundedness hypothesis fails.
    """

    def __init__(self, message: str, blocking: dict):
        super().__init__(message)
        self.blocking = blocking


class ScaleMismatchWarning(UserWarning):
    """Scaled mode carries an eps differing from the hypothesis eps."""


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Finitely many labelled points with an exact metric matrix."""

    labels: tuple[str, ...]
    dist: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        labels = tuple(str(l) for l in self.labels)
        object.__setattr__(self, "labels", labels)
        if len(set(labels)) != len(labels):
            raise InvalidConfigurationError("duplicate labels in metric space")
        if not labels:
            raise InvalidConfigurationError("metric space needs at least one point")
        d = tuple(frac_vec(row) for row in self.dist)
        object.__setattr__(self, "dist", d)
        n = len(labels)
        if len(d) != n or any(len(row) != n for row in d):
            raise InvalidConfigurationError("distance matrix shape does not match labels")
        for i in range(n):
            if d[i][i] != 0:
                raise InvalidConfigurationError(f"nonzero self-distance at {labels[i]!r}")
            for j in range(n):
                if d[i][j] != d[j][i]:
                    raise InvalidConfigurationError(
                        f"asymmetric distances between {labels[i]!r} and {labels[j]!r}"
                    )
                if i != j and d[i][j] <= 0:
                    raise InvalidConfigurationError(
                        f"distinct points {labels[i]!r}, {labels[j]!r} at distance {d[i][j]}"
                    )
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if d[i][k] > d[i][j] + d[j][k]:
                        raise InvalidConfigurationError(
                            "triangle inequality fails on "
                            f"({labels[i]!r}, {labels[j]!r}, {labels[k]!r})"
                        )

    def _index_of(self, label: str) -> int:
        idx = self.__dict__.get("_index")
        if idx is None:
            idx = {l: i for i, l in enumerate(self.labels)}
            object.__setattr__(self, "_index", idx)
        try:
            return idx[label]
        except KeyError:
            raise ValueError(f"unknown label {label!r}") from None

    def d(self, a: str, b: str) -> Fraction:
        return self.dist[self._index_of(a)][self._index_of(b)]

    def __hash__(self) -> int:
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.labels, self.dist))
            object.__setattr__(self, "_hash", h)
        return h


@dataclass(frozen=True)
class SetValuedMapTable:
    """Each point's finite nonempty image list, all in one dimension."""

    entries: tuple[tuple[str, tuple[Vec, ...]], ...]

    def __post_init__(self) -> None:
        norm = []
        dim = None
        for label, images in self.entries:
            imgs = tuple(frac_vec(v) for v in images)
            if not imgs:
                raise InvalidConfigurationError(
                    f"empty image set at {label!r}: every point needs a value"
                )
            for v in imgs:
                if dim is None:
                    dim = len(v)
                elif len(v) != dim:
                    raise DimensionMismatchError(
                        f"image of {label!r} has length {len(v)}, expected {dim}"
                    )
            norm.append((str(label), imgs))
        object.__setattr__(self, "entries", tuple(norm))

    @classmethod
    def from_dict(cls, mapping: Mapping[str, Iterable]) -> "SetValuedMapTable":
        return cls(tuple((k, tuple(tuple(v) for v in vs)) for k, vs in mapping.items()))

    @property
    def dim(self) -> int:
        return len(self.entries[0][1][0])

    def images(self, label: str) -> tuple[Vec, ...]:
        table = self.__dict__.get("_table")
        if table is None:
            table = dict(self.entries)
            object.__setattr__(self, "_table", table)
        try:
            return table[label]
        except KeyError:
            raise ValueError(f"no image entry for label {label!r}") from None

    def __hash__(self) -> int:
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash(self.entries)
            object.__setattr__(self, "_hash", h)
        return h


@dataclass(frozen=True)
class PlainMode:
    name: str = "plain"


@dataclass(frozen=True)
class ScaledMode:
    epsilon: Fraction
    lam: Fraction
    name: str = "scaled"

    def __post_init__(self) -> None:
        object.__setattr__(self, "epsilon", frac(self.epsilon))
        object.__setattr__(self, "lam", frac(self.lam))
        if self.epsilon <= 0 or self.lam <= 0:
            raise InvalidConfigurationError("scaled mode needs positive epsilon and lambda")


@dataclass(frozen=True)
class EfficiencyMode:
    gamma: Fraction
    name: str = "efficiency"

    def __post_init__(self) -> None:
        object.__setattr__(self, "gamma", frac(self.gamma))
        if self.gamma <= 0:
            raise InvalidConfigurationError("efficiency mode needs positive gamma")


Mode = PlainMode | ScaledMode | EfficiencyMode


@dataclass(frozen=True)
class EVPProblem:
    """Immutable problem instance; validated on construction."""

    space: FiniteMetricSpace
    f: SetValuedMapTable
    K: ConeGen
    H: Polytope
    x0: str
    epsilon: Fraction
    mode: Mode = PlainMode()
    feasible: Optional[tuple[str, ...]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "epsilon", frac(self.epsilon))
        if self.epsilon <= 0:
            raise InvalidConfigurationError("epsilon must be positive")
        if self.feasible is None:
            object.__setattr__(self, "feasible", tuple(self.space.labels))
        else:
            object.__setattr__(self, "feasible", tuple(str(l) for l in self.feasible))
        label_set = set(self.space.labels)
        for l in self.feasible:
            if l not in label_set:
                raise InvalidConfigurationError(f"feasible point {l!r} is not in the space")
        if not self.feasible:
            raise InvalidConfigurationError("feasible set must not be empty")
        if self.x0 not in self.feasible:
            raise InvalidConfigurationError(f"start point {self.x0!r} is not feasible")
        for l in self.space.labels:
            self.f.images(l)  # raises if missing
        if self.f.dim != self.K.dim or self.f.dim != self.H.dim:
            raise DimensionMismatchError("map, cone, and polytope dimensions differ")
        # Same configuration the scalarizer needs; fail fast here with the
        # problem-level context.
        SeparationFunctional(self.H, self.K)
        if isinstance(self.mode, EfficiencyMode):
            if not validate_cone(self.K).pointed:
                raise InvalidConfigurationError(
                    "efficiency mode needs a pointed ordering cone"
                )
        if isinstance(self.mode, ScaledMode) and self.mode.epsilon != self.epsilon:
            warnings.warn(
                "scaled mode eps differs from the hypothesis eps; the distance "
                "bound (c) is only guaranteed when they agree",
                ScaleMismatchWarning,
                stacklevel=2,
            )

    @property
    def scale(self) -> Fraction:
        if isinstance(self.mode, ScaledMode):
            return self.mode.epsilon / self.mode.lam
        if isinstance(self.mode, EfficiencyMode):
            return self.mode.gamma
        return Fraction(1)

    def images(self, label: str) -> tuple[Vec, ...]:
        return self.f.images(label)

    def __hash__(self) -> int:
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash(
                (self.space, self.f, self.K, self.H, self.x0, self.epsilon,
                 self.mode, self.feasible)
            )
            object.__setattr__(self, "_hash", h)
        return h


# ---------------------------------------------------------------------------
# the pre-order
# ---------------------------------------------------------------------------


def dominates(p: EVPProblem, xprime: str, x: str, backend: Backend = EXACT) -> bool:
    """Is xprime below x, i.e. f(x) within f(xprime) + scale*d*H + K?

    Each image of f(x) must be reachable from some image of f(xprime);
    one feasibility LP per candidate pair, with the whole answer memoized
    per (problem, pair, backend).
    """
    p.space._index_of(xprime)
    p.space._index_of(x)
    return _dominates_cached(p, xprime, x, backend)


@functools.lru_cache(maxsize=200_000)
def _dominates_cached(p: EVPProblem, xprime: str, x: str, backend: Backend) -> bool:
    t = p.scale * p.space.d(x, xprime)
    targets = p.images(x)
    sources = p.images(xprime)
    for y in targets:
        if not any(
            scaled_H_plus_K_contains(p.H, p.K, vec_sub(y, ysrc), t, backend)
            for ysrc in sources
        ):
            return False
    return True


def clear_dominance_cache() -> None:
    _dominates_cached.cache_clear()


def lower_section(p: EVPProblem, x: str, backend: Backend = EXACT) -> tuple[str, ...]:
    """All feasible points below x, in label order; always contains x."""
    p.space._index_of(x)
    return tuple(l for l in p.feasible if dominates(p, l, x, backend))


# ---------------------------------------------------------------------------
# hypothesis check and efficiency notion
# ---------------------------------------------------------------------------


def _first_blocking_pair(
    p: EVPProblem,
    y0: Vec,
    scope: Sequence[str],
    eps: Fraction,
    backend: Backend,
) -> Optional[tuple[str, Vec]]:
    for x in scope:
        for y in p.images(x):
            if scaled_H_plus_K_contains(p.H, p.K, vec_sub(y0, y), eps, backend):
                return (x, y)
    return None


def _condition_scope(p: EVPProblem, backend: Backend) -> tuple[str, ...]:
    if isinstance(p.mode, EfficiencyMode):
        return p.feasible
    return lower_section(p, p.x0, backend)


def condition_ii_witness(p: EVPProblem, backend: Backend = EXACT) -> Optional[Vec]:
    """First image of x0 escaping every eps-shifted image set, if any.

    The scope is the lower section of x0, except in efficiency mode
    where the approximate-efficiency hypothesis quantifies over the
    whole feasible set.
    """
    scope = _condition_scope(p, backend)
    for y0 in p.images(p.x0):
        if _first_blocking_pair(p, y0, scope, p.epsilon, backend) is None:
            return y0
    return None


def ae_efficient(
    p: EVPProblem, x: str, eps: Number, backend: Backend = EXACT
) -> Optional[Vec]:
    """Shifted-set approximate efficiency of x over the feasible set.

    Returns an image y0 of x such that no feasible image falls inside
    y0 - eps*H - K, or None when every candidate image is undercut.
    """
    e = frac(eps)
    if e <= 0:
        raise ValueError("eps must be positive")
    if x not in p.feasible:
        raise ValueError(f"{x!r} is not a feasible point")
    for y0 in p.images(x):
        if _first_blocking_pair(p, y0, p.feasible, e, backend) is None:
            return y0
    return None


# ---------------------------------------------------------------------------
# solver
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EVPCertificate:
    """Solver output with enough data to re-verify every claim.

    ``chain`` walks from x0 to xbar through the pre-order;
    ``xi_trace`` holds the potential minimum at each chain point and is
    strictly decreasing, by at least scale * step distance per move.
    """

    xbar: str
    y0: Vec
    chain: tuple[str, ...]
    xi_trace: tuple[Fraction, ...]


def solve(p: EVPProblem, backend: Backend = EXACT) -> EVPCertificate:
    """Run the descent and return a certificate for its endpoint."""
    witness = None
    blocking: dict = {}
    scope = _condition_scope(p, backend)
    for y0 in p.images(p.x0):
        pair = _first_blocking_pair(p, y0, scope, p.epsilon, backend)
        if pair is None:
            witness = y0
            break
        blocking[y0] = pair
    if witness is None:
        lines = [
            f"image {tuple(map(str, y0))} of {p.x0!r} is reached from "
            f"{x!r} via {tuple(map(str, y))}"
            for y0, (x, y) in blocking.items()
        ]
        raise HypothesisViolatedError(
            "lower-boundedness hypothesis fails at eps="
            f"{p.epsilon}: " + "; ".join(lines),
            blocking,
        )

    sf = SeparationFunctional(p.H, p.K)
    exact = backend.kind == "exact"
    score_cache: dict[str, ExtendedReal] = {}

    def score(label: str) -> ExtendedReal:
        val = score_cache.get(label)
        if val is None:
            val = min(
                evaluate(sf, vec_sub(y, witness), backend) for y in p.images(label)
            )
            score_cache[label] = val
        return val

    start_section = lower_section(p, p.x0, backend)
    section_min = min(score(l) for l in start_section)
    if exact:
        if not section_min.is_finite or not (-p.epsilon <= section_min.value <= 0):
            raise InternalConsistencyError(
                f"potential minimum {section_min} over the start section violates "
                f"the [-eps, 0] bound"
            )

    order = {l: i for i, l in enumerate(p.space.labels)}
    chain = [p.x0]
    trace = [score(p.x0)]
    current = p.x0
    for _ in range(len(p.space.labels) + 1):
        section = lower_section(p, current, backend)
        if section == (current,):
            break
        best = min(section, key=lambda l: (score(l), order[l]))
        if best == current:
            raise InternalConsistencyError(
                f"{current!r} is its own section argmin but the section has "
                f"{len(section)} points"
            )
        step = p.scale * p.space.d(current, best)
        if exact:
            before, after = score(current), score(best)
            if not after.is_finite or (
                before.is_finite and before.value - after.value < step
            ):
                raise InternalConsistencyError(
                    f"descent step {current!r} -> {best!r} dropped the potential "
                    f"by less than scale * distance"
                )
        chain.append(best)
        trace.append(score(best))
        current = best
    else:
        raise InternalConsistencyError("descent failed to terminate within |X| moves")

    values = []
    for v in trace:
        if not v.is_finite:
            raise InternalConsistencyError("chain point scored +inf")
        values.append(v.value)
    return EVPCertificate(
        xbar=current, y0=witness, chain=tuple(chain), xi_trace=tuple(values)
    )


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoradiantGapResult:
    """Outcome of the perturbation-direction escape search.

    ``holds`` means some direction h in the perturbation polytope gives
    a step d*h outside the (eps/gamma)-scaled coradiant set H + K while
    trivially staying in its generated cone.  The search runs over the
    vertices and then a refinement grid of convex combinations;
    ``search_exhausted`` distinguishes "not found up to this depth" from
    a refutation, which the search cannot provide.
    """

    holds: bool
    search_exhausted: bool
    points_checked: int
    witness: Optional[Vec] = None

    def __bool__(self) -> bool:
        return self.holds


def _convex_grid(vertices: tuple[Vec, ...], depth: int) -> Iterable[Vec]:
    for v in vertices:
        yield v
    p = len(vertices)
    if p == 1 or depth < 2:
        return
    seen = set(vertices)
    for comp in itertools.product(range(depth + 1), repeat=p - 1):
        s = sum(comp)
        if s > depth:
            continue
        weights = (depth - s,) + comp
        h = tuple(
            sum(Fraction(w, depth) * vertices[i][r] for i, w in enumerate(weights))
            for r in range(len(vertices[0]))
        )
        if h not in seen:
            seen.add(h)
            yield h


def coradiant_escape_check(
    p: EVPProblem,
    xbar: str,
    eps: Optional[Number] = None,
    gamma: Optional[Number] = None,
    grid_depth: int = 4,
    backend: Backend = EXACT,
) -> CoradiantGapResult:
    """Search for d(x0, xbar)*h outside the (eps/gamma)-scaled H + K.

    Membership of d*h in the generated cone of H + K is automatic for
    every h in H, so only the exclusion needs an LP.  When xbar is the
    start point the step is zero and the question degenerates to the
    origin avoiding the scaled H + K, which the problem invariant
    already certifies.
    """
    e = frac(eps) if eps is not None else p.epsilon
    if gamma is not None:
        g = frac(gamma)
    elif isinstance(p.mode, EfficiencyMode):
        g = p.mode.gamma
    else:
        g = Fraction(1)
    if g <= 0:
        raise ValueError("gamma must be positive")
    ratio = e / g
    dist = p.space.d(p.x0, xbar)
    if dist == 0:
        return CoradiantGapResult(
            holds=zero_notin_H_plus_K(p.H, p.K),
            search_exhausted=False,
            points_checked=0,
        )
    checked = 0
    for h in _convex_grid(p.H.vertices, grid_depth):
        checked += 1
        target = tuple(dist * c for c in h)
        if not scaled_H_plus_K_contains(p.H, p.K, target, ratio, backend):
            return CoradiantGapResult(
                holds=True, search_exhausted=False, points_checked=checked, witness=h
            )
    return CoradiantGapResult(holds=False, search_exhausted=True, points_checked=checked)


@dataclass(frozen=True)
class VerificationReport:
    """Independent brute-force re-check of a certificate.

    ``a``: xbar lies below x0.  ``b``: no other feasible point lies below
    xbar.  ``c`` (scale modes only): the walk stayed within the promised
    radius.  ``coradiant_gap`` (efficiency mode): the escape search
    succeeded.  The chain, trace, and hypothesis-witness checks guard the
    certificate's own bookkeeping.
    """

    a: bool
    b: bool
    c: Optional[bool]
    coradiant_gap: Optional[bool]
    chain_valid: bool
    trace_consistent: bool
    witness_valid: bool
    failures: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.failures


def verify_certificate(
    p: EVPProblem, cert: EVPCertificate, backend: Backend = EXACT
) -> VerificationReport:
    """Re-check every conclusion from scratch; never raises on failure."""
    failures: list[str] = []

    a = dominates(p, cert.xbar, p.x0, backend)
    if not a:
        failures.append("(a)")

    b = all(
        not dominates(p, x, cert.xbar, backend)
        for x in p.feasible
        if x != cert.xbar
    )
    if not b:
        failures.append("(b)")

    c: Optional[bool] = None
    if isinstance(p.mode, ScaledMode):
        c = p.space.d(p.x0, cert.xbar) <= p.mode.lam
    elif isinstance(p.mode, EfficiencyMode):
        c = p.space.d(p.x0, cert.xbar) <= p.epsilon / p.mode.gamma
    if c is False:
        failures.append("(c)")

    gap: Optional[bool] = None
    if isinstance(p.mode, EfficiencyMode):
        gap = coradiant_escape_check(p, cert.xbar, backend=backend).holds
        if not gap:
            failures.append("(coradiant gap)")

    chain_valid = (
        len(cert.chain) >= 1
        and cert.chain[0] == p.x0
        and cert.chain[-1] == cert.xbar
        and all(l in p.feasible for l in cert.chain)
        and all(z1 != z2 for z1, z2 in zip(cert.chain, cert.chain[1:]))
        and all(
            dominates(p, z2, z1, backend)
            for z1, z2 in zip(cert.chain, cert.chain[1:])
        )
    )
    if not chain_valid:
        failures.append("(chain)")

    witness_valid = tuple(cert.y0) in set(p.images(p.x0)) and (
        _first_blocking_pair(
            p, frac_vec(cert.y0), _condition_scope(p, backend), p.epsilon, backend
        )
        is None
    )
    if not witness_valid:
        failures.append("(witness)")

    trace_consistent = len(cert.xi_trace) == len(cert.chain)
    if trace_consistent and chain_valid and witness_valid:
        sf = SeparationFunctional(p.H, p.K)
        exact = backend.kind == "exact"
        for label, claimed in zip(cert.chain, cert.xi_trace):
            actual = min(
                evaluate(sf, vec_sub(y, frac_vec(cert.y0)), backend)
                for y in p.images(label)
            )
            if not actual.is_finite:
                trace_consistent = False
                break
            if exact:
                if actual.value != claimed:
                    trace_consistent = False
                    break
            elif abs(float(actual.value) - float(claimed)) > 1e-6:
                trace_consistent = False
                break
        if trace_consistent:
            for (z1, v1), (z2, v2) in zip(
                zip(cert.chain, cert.xi_trace), zip(cert.chain[1:], cert.xi_trace[1:])
            ):
                if frac(v1) - frac(v2) < p.scale * p.space.d(z1, z2):
                    trace_consistent = False
                    break
    if not trace_consistent:
        failures.append("(trace)")

    return VerificationReport(
        a=a,
        b=b,
        c=c,
        coradiant_gap=gap,
        chain_valid=chain_valid,
        trace_consistent=trace_consistent,
        witness_valid=witness_valid,
        failures=tuple(failures),
    )
