"""Lower-boundedness ladder for ray-represented ranges.

Four progressively weaker properties of a range M against an ordering
cone K (and a perturbation polytope H inside K):

1. cone lower bounded: M sits inside b + K for a single point b;
2. quasi lower bounded: M sits inside B + K for some bounded set B;
3. dual-witness bounded: some functional k* that is nonnegative on K and
   uniformly positive on H has finite infimum over M;
4. shifted-set bounded: some translate y0 - eps*H - K misses M entirely.

Each level implies the next, and none of the implications reverses.

For piecewise (vertices + rays) data the reductions are:
* level 2 holds iff every ray lies in K.  Rays inside K recede into
  B + K for B the hull of all piece vertices; conversely a ray r
  outside the closed cone K escapes every B + K, because separating r
  from K gives a functional negative on r, nonnegative on K, hence
  unbounded below along the ray but bounded below on B + K.
* level 1 additionally needs one LP placing every piece vertex above a
  common point b.
* level 3 is a single LP over functionals; level 4 is existential over
  an unbounded candidate space, so the check is honest: it confirms a
  candidate or reports unknown, never "impossible".
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .geometry import (
    ConeGen,
    DimensionMismatchError,
    Polytope,
    VPolyhedralUnion,
    cone_contains,
    union_disjoint_from,
    zero_notin_H_plus_K,
)
from .lp_core import EXACT, Backend, LinearProgram, solve
from .rational import Number, Vec, dot, frac, frac_vec

__all__ = [
    "BoundednessReport",
    "HLowerResult",
    "is_K_lower_bounded",
    "is_quasi_K_lower_bounded",
    "find_kstar",
    "separating_epsilon_for",
    "is_H_lower_bounded",
    "classify",
]


def is_quasi_K_lower_bounded(
    M: VPolyhedralUnion, K: ConeGen, backend: Backend = EXACT
) -> bool:
    """True iff every recession ray of every piece lies in the cone."""
    if M.dim != K.dim:
        raise DimensionMismatchError("union and cone dimensions differ")
    return all(cone_contains(K, r, backend) for r in M.all_rays())


def is_K_lower_bounded(
    M: VPolyhedralUnion, K: ConeGen, backend: Backend = EXACT
) -> tuple[bool, Optional[Vec]]:
    """Decide M within b + K, returning the witness b when one exists."""
    if M.dim != K.dim:
        raise DimensionMismatchError("union and cone dimensions differ")
    if not is_quasi_K_lower_bounded(M, K, backend):
        return False, None
    verts = M.all_vertices()
    n, m = M.dim, len(K.generators)
    # variables: b (free, n) then one generator-weight block per vertex
    nvars = n + m * len(verts)
    rows = []
    rhs = []
    for vi, v in enumerate(verts):
        for r in range(n):
            row = [Fraction(0)] * nvars
            row[r] = Fraction(1)
            base = n + m * vi
            for j in range(m):
                row[base + j] = K.generators[j][r]
            rows.append(row)
            rhs.append(v[r])
    nonneg = [False] * n + [True] * (m * len(verts))
    res = solve(LinearProgram.feasibility(rows, rhs, nonneg), backend)
    if not res.is_feasible:
        return False, None
    return True, tuple(res.witness[:n])


def find_kstar(
    M: VPolyhedralUnion,
    K: ConeGen,
    H: Optional[Polytope] = None,
    backend: Backend = EXACT,
) -> Optional[Vec]:
    """Search for a dual witness of lower boundedness.

    With H: find l with l.g >= 0 on generators, l.h >= 1 on H vertices
    (the uniform-positivity threshold is normalized to one; any positive
    threshold rescales), and l.r >= 0 on every ray of M, so the infimum
    of l over M is a finite vertex minimum.  Returns the witness of
    least l1-norm, or None when the program is infeasible.

    Without H: any nonzero l in the dual cone with l.r >= 0 on the rays
    qualifies; found by maximizing each coordinate over a box.
    """
    if M.dim != K.dim:
        raise DimensionMismatchError("union and cone dimensions differ")
    n = M.dim
    rays = M.all_rays()

    if H is not None:
        if H.dim != n:
            raise DimensionMismatchError("polytope dimension differs")
        constraints = [(g, Fraction(0)) for g in K.generators]
        constraints += [(h, Fraction(1)) for h in H.vertices]
        constraints += [(r, Fraction(0)) for r in rays]
        k = len(constraints)
        # variables: a, b (l = a - b, both >= 0, n each), slacks (k)
        nvars = 2 * n + k
        rows = []
        rhs = []
        for ci, (w, bound) in enumerate(constraints):
            row = [Fraction(0)] * nvars
            for r in range(n):
                row[r] = w[r]
                row[n + r] = -w[r]
            row[2 * n + ci] = Fraction(-1)
            rows.append(row)
            rhs.append(bound)
        objective = [Fraction(1)] * (2 * n) + [Fraction(0)] * k
        lp = LinearProgram.optimize(
            objective, "min", rows, rhs, [True] * nvars
        )
        res = solve(lp, backend)
        if not res.is_feasible:
            return None
        return tuple(res.witness[r] - res.witness[n + r] for r in range(n))

    # No positivity block: detect a nonzero element of the constraint cone
    # by maximizing +-l_i over the cone intersected with the unit box.
    constraints = [(g, Fraction(0)) for g in K.generators]
    constraints += [(r, Fraction(0)) for r in rays]
    for i in range(n):
        for sign in (1, -1):
            witness = _max_coordinate_in_dual(constraints, n, i, sign, backend)
            if witness is not None:
                return witness
    return None


def _max_coordinate_in_dual(
    constraints: list[tuple[Vec, Fraction]],
    n: int,
    coord: int,
    sign: int,
    backend: Backend,
) -> Optional[Vec]:
    # maximize sign * l_coord  s.t.  l . w >= 0 for all w,  -1 <= l <= 1.
    k = len(constraints)
    # variables: a, b (l = a - b), slacks for constraints, slacks for box
    nvars = 2 * n + k + 2 * n
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for ci, (w, bound) in enumerate(constraints):
        row = [Fraction(0)] * nvars
        for r in range(n):
            row[r] = w[r]
            row[n + r] = -w[r]
        row[2 * n + ci] = Fraction(-1)
        rows.append(row)
        rhs.append(bound)
    for r in range(n):  # l_r + s = 1 and -l_r + s' = 1
        row = [Fraction(0)] * nvars
        row[r] = Fraction(1)
        row[n + r] = Fraction(-1)
        row[2 * n + k + r] = Fraction(1)
        rows.append(row)
        rhs.append(Fraction(1))
        row = [Fraction(0)] * nvars
        row[r] = Fraction(-1)
        row[n + r] = Fraction(1)
        row[2 * n + k + n + r] = Fraction(1)
        rows.append(row)
        rhs.append(Fraction(1))
    objective = [Fraction(0)] * nvars
    objective[coord] = Fraction(sign)
    objective[n + coord] = Fraction(-sign)
    lp = LinearProgram.optimize(objective, "max", rows, rhs, [True] * nvars)
    res = solve(lp, backend)
    if res.is_feasible and res.value > 0:
        return tuple(res.witness[r] - res.witness[n + r] for r in range(n))
    return None


def separating_epsilon_for(
    M: VPolyhedralUnion, kstar: Sequence[Number], y: Sequence[Number]
) -> Fraction:
    """Smallest guaranteed escape scale derived from a dual witness.

    For k* nonnegative on rays and >= 1 on H, any point of
    y - eps*H - K scores at most k*.y - eps under k*, while M scores at
    least its vertex minimum.  Any eps strictly above the gap therefore
    separates; returned value adds one to stay clear of the boundary.
    """
    ks = frac_vec(kstar)
    yv = frac_vec(y)
    inf_m = min(dot(ks, v) for v in M.all_vertices())
    gap = dot(ks, yv) - inf_m
    return max(gap, Fraction(0)) + 1


@dataclass(frozen=True)
class HLowerResult:
    """Outcome of the candidate search for shifted-set boundedness.

    ``status`` is True (confirmed, with witness) or None (unknown: every
    candidate intersected).  False is deliberately never produced; the
    property is existential over an unbounded space and this module does
    not pretend to refute it.
    """

    status: Optional[bool]
    witness: Optional[tuple[Vec, Fraction]]
    attempts: tuple[tuple[Vec, Fraction, bool], ...]


def is_H_lower_bounded(
    M: VPolyhedralUnion,
    K: ConeGen,
    H: Polytope,
    candidates: Sequence[tuple[Sequence[Number], Number]],
    backend: Backend = EXACT,
) -> HLowerResult:
    """Try each (y0, eps) candidate until one translate misses M."""
    if not candidates:
        raise ValueError("candidate list must not be empty")
    attempts = []
    witness = None
    for y0, eps in candidates:
        e = frac(eps)
        if e <= 0:
            raise ValueError("every candidate eps must be positive")
        ok = union_disjoint_from(M, y0, e, H, K, backend)
        attempts.append((frac_vec(y0), e, ok))
        if ok and witness is None:
            witness = (frac_vec(y0), e)
            break
    if witness is not None:
        return HLowerResult(True, witness, tuple(attempts))
    return HLowerResult(None, None, tuple(attempts))


@dataclass(frozen=True)
class BoundednessReport:
    """All four ladder levels plus a consistency flag.

    ``ladder_consistent`` asserts the implication chain on the computed
    flags, treating the unknown shifted-set outcome as non-falsifying.
    """

    k_lower: bool
    k_lower_witness: Optional[Vec]
    quasi_k_lower: bool
    kstar_h_lower: bool
    kstar_witness: Optional[Vec]
    h_lower: Optional[bool]
    h_lower_witness: Optional[tuple[Vec, Fraction]]
    ladder_consistent: bool


def classify(
    M: VPolyhedralUnion,
    K: ConeGen,
    H: Polytope,
    candidates: Sequence[tuple[Sequence[Number], Number]],
    backend: Backend = EXACT,
) -> BoundednessReport:
    """Run all four checks and assemble the ladder report."""
    if not zero_notin_H_plus_K(H, K):
        raise ValueError(
            "dual-witness classification requires the origin outside H + K"
        )
    k_lower, b = is_K_lower_bounded(M, K, backend)
    quasi = is_quasi_K_lower_bounded(M, K, backend)
    kstar = find_kstar(M, K, H, backend)
    h_res = is_H_lower_bounded(M, K, H, candidates, backend)
    consistent = True
    if k_lower and not quasi:
        consistent = False
    if quasi and kstar is None:
        consistent = False
    if kstar is not None and h_res.status is False:  # pragma: no cover
        consistent = False
    return BoundednessReport(
        k_lower=k_lower,
        k_lower_witness=b,
        quasi_k_lower=quasi,
        kstar_h_lower=kstar is not None,
        kstar_witness=kstar,
        h_lower=h_res.status,
        h_lower_witness=h_res.witness,
        ladder_consistent=consistent,
    )
