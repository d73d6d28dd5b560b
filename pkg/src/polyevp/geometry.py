"""Polyhedral representations and the membership oracles built on them.

Three value types cover every set this package manipulates:

* ``ConeGen``: a finitely generated convex cone, kept in generator form.
  All the set relations used downstream reduce to LP feasibility against
  the generators, so no halfspace conversion is ever needed.
* ``Polytope``: a vertex-represented convex compact set.  Oracles work on
  the vertex list directly; no hull computation is performed.
* ``VPolyhedralUnion``: a finite union of (vertices + rays) pieces, for
  ranges of set-valued maps that may be unbounded.

A note on closures: sums of polytopes and finitely generated cones are
closed, so the distinction between a set, its topological closure, and
its directional (vector) closure collapses for everything representable
here.  Predicate names therefore talk about the sets themselves.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .lp_core import EXACT, Backend, LinearProgram, solve
from .rational import Number, Vec, dot, frac, frac_vec

__all__ = [
    "DimensionMismatchError",
    "InvalidConfigurationError",
    "ConeGen",
    "ConeValidation",
    "Polytope",
    "VPolyhedralUnion",
    "validate_cone",
    "cone_contains",
    "dual_cone_contains",
    "scaled_H_minus_K_contains",
    "scaled_H_plus_K_contains",
    "zero_notin_H_plus_K",
    "triangle_property_check",
    "union_disjoint_from",
]


class DimensionMismatchError(ValueError):
    """A vector's length does not match the ambient dimension."""


class InvalidConfigurationError(ValueError):
    """Inputs violate a structural requirement (e.g. H not inside K)."""


def _check_dim(dim: int, v: Sequence, what: str) -> None:
    if len(v) != dim:
        raise DimensionMismatchError(
            f"{what} has length {len(v)}, expected dimension {dim}"
        )


@dataclass(frozen=True)
class ConeGen:
    """Convex cone of all nonnegative combinations of ``generators``."""

    dim: int
    generators: tuple[Vec, ...]

    def __post_init__(self) -> None:
        gens = tuple(frac_vec(g) for g in self.generators)
        object.__setattr__(self, "generators", gens)
        for g in gens:
            _check_dim(self.dim, g, "cone generator")
            if all(c == 0 for c in g):
                raise InvalidConfigurationError("zero vector is not a valid generator")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[Number]], dim: int) -> "ConeGen":
        return cls(dim=dim, generators=tuple(tuple(r) for r in rows))

    def __hash__(self) -> int:
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.dim, self.generators))
            object.__setattr__(self, "_hash", h)
        return h


@dataclass(frozen=True)
class ConeValidation:
    """Recorded structural facts about a cone (informational, not enforced)."""

    pointed: bool
    nontrivial: bool
    full_space: bool


@dataclass(frozen=True)
class Polytope:
    """Convex hull of a finite nonempty vertex list."""

    dim: int
    vertices: tuple[Vec, ...]

    def __post_init__(self) -> None:
        verts = tuple(frac_vec(v) for v in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if not verts:
            raise InvalidConfigurationError("a polytope needs at least one vertex")
        for v in verts:
            _check_dim(self.dim, v, "polytope vertex")

    def __hash__(self) -> int:
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.dim, self.vertices))
            object.__setattr__(self, "_hash", h)
        return h


@dataclass(frozen=True)
class VPolyhedralUnion:
    """Union of pieces conv(vertices) + cone(rays), one tuple pair each."""

    dim: int
    pieces: tuple[tuple[tuple[Vec, ...], tuple[Vec, ...]], ...]

    def __post_init__(self) -> None:
        norm = []
        if not self.pieces:
            raise InvalidConfigurationError("the union needs at least one piece")
        for verts, rays in self.pieces:
            verts = tuple(frac_vec(v) for v in verts)
            rays = tuple(frac_vec(r) for r in rays)
            if not verts:
                raise InvalidConfigurationError("each piece needs at least one vertex")
            for v in verts:
                _check_dim(self.dim, v, "piece vertex")
            for r in rays:
                _check_dim(self.dim, r, "piece ray")
            norm.append((verts, rays))
        object.__setattr__(self, "pieces", tuple(norm))

    def __hash__(self) -> int:
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.dim, self.pieces))
            object.__setattr__(self, "_hash", h)
        return h

    def all_rays(self) -> list[Vec]:
        return [r for _, rays in self.pieces for r in rays]

    def all_vertices(self) -> list[Vec]:
        return [v for verts, _ in self.pieces for v in verts]


# ---------------------------------------------------------------------------
# membership oracles
# ---------------------------------------------------------------------------


def cone_contains(K: ConeGen, y: Sequence[Number], backend: Backend = EXACT) -> bool:
    """Is y a nonnegative combination of the generators?"""
    yv = frac_vec(y)
    _check_dim(K.dim, yv, "query point")
    m = len(K.generators)
    rows = [[K.generators[j][r] for j in range(m)] for r in range(K.dim)]
    lp = LinearProgram.feasibility(rows, yv, [True] * m)
    return solve(lp, backend).is_feasible


def dual_cone_contains(K: ConeGen, l: Sequence[Number]) -> bool:
    """Is the linear functional l nonnegative on the whole cone?

    Equivalent to l . g >= 0 for every generator g, so no LP is needed.
    """
    lv = frac_vec(l)
    _check_dim(K.dim, lv, "functional")
    return all(dot(lv, g) >= 0 for g in K.generators)


def validate_cone(K: ConeGen, backend: Backend = EXACT) -> ConeValidation:
    """Record pointedness and nontriviality of the cone.

    Pointed means K meets -K only at the origin; with generator data that
    fails exactly when some -g lies back in the cone.  Full space is
    detected by membership of plus/minus every coordinate direction.
    """
    pointed = all(
        not cone_contains(K, tuple(-c for c in g), backend) for g in K.generators
    )
    unit = [Fraction(0)] * K.dim
    full = True
    for i in range(K.dim):
        unit[i] = Fraction(1)
        if not cone_contains(K, tuple(unit), backend):
            full = False
        else:
            unit[i] = Fraction(-1)
            if not cone_contains(K, tuple(unit), backend):
                full = False
        unit[i] = Fraction(0)
        if not full:
            break
    nontrivial = bool(K.generators) and not full
    return ConeValidation(pointed=pointed, nontrivial=nontrivial, full_space=full)


def scaled_H_minus_K_contains(
    H: Polytope,
    K: ConeGen,
    y: Sequence[Number],
    t: Number,
    backend: Backend = EXACT,
) -> bool:
    """Does y lie in t*H - K for the fixed scale t?"""
    yv = frac_vec(y)
    tq = frac(t)
    _check_dim(H.dim, yv, "query point")
    if H.dim != K.dim:
        raise DimensionMismatchError("polytope and cone dimensions differ")
    p, m = len(H.vertices), len(K.generators)
    rows = []
    for r in range(H.dim):
        row = [tq * H.vertices[i][r] for i in range(p)]
        row += [-K.generators[j][r] for j in range(m)]
        rows.append(row)
    rows.append([Fraction(1)] * p + [Fraction(0)] * m)
    rhs = list(yv) + [Fraction(1)]
    lp = LinearProgram.feasibility(rows, rhs, [True] * (p + m))
    return solve(lp, backend).is_feasible


def scaled_H_plus_K_contains(
    H: Polytope,
    K: ConeGen,
    y: Sequence[Number],
    t: Number,
    backend: Backend = EXACT,
) -> bool:
    """Does y lie in t*H + K for the fixed scale t >= 0?"""
    yv = frac_vec(y)
    tq = frac(t)
    _check_dim(H.dim, yv, "query point")
    if H.dim != K.dim:
        raise DimensionMismatchError("polytope and cone dimensions differ")
    p, m = len(H.vertices), len(K.generators)
    rows = []
    for r in range(H.dim):
        row = [tq * H.vertices[i][r] for i in range(p)]
        row += [K.generators[j][r] for j in range(m)]
        rows.append(row)
    rows.append([Fraction(1)] * p + [Fraction(0)] * m)
    rhs = list(yv) + [Fraction(1)]
    lp = LinearProgram.feasibility(rows, rhs, [True] * (p + m))
    return solve(lp, backend).is_feasible


def zero_notin_H_plus_K(H: Polytope, K: ConeGen) -> bool:
    """Certify that the origin avoids H + K (always decided exactly).

    H + K is closed here, so this single LP settles the strict separation
    condition every downstream construction relies on.
    """
    if H.dim != K.dim:
        raise DimensionMismatchError("polytope and cone dimensions differ")
    p, m = len(H.vertices), len(K.generators)
    rows = []
    for r in range(H.dim):
        row = [H.vertices[i][r] for i in range(p)]
        row += [K.generators[j][r] for j in range(m)]
        rows.append(row)
    rows.append([Fraction(1)] * p + [Fraction(0)] * m)
    rhs = [Fraction(0)] * H.dim + [Fraction(1)]
    lp = LinearProgram.feasibility(rows, rhs, [True] * (p + m))
    return not solve(lp, EXACT).is_feasible


def triangle_property_check(
    H: Polytope,
    K: ConeGen,
    d1: Number,
    d2: Number,
    backend: Backend = EXACT,
) -> bool:
    """Certify d1*H + d2*H within (d1+d2)*H + K via vertex pairs.

    Convexity makes the vertex-pair checks sufficient for the whole sum.
    """
    a, b = frac(d1), frac(d2)
    if a < 0 or b < 0:
        raise ValueError("scales must be nonnegative")
    for hi in H.vertices:
        for hj in H.vertices:
            target = tuple(a * x + b * y for x, y in zip(hi, hj))
            if not scaled_H_plus_K_contains(H, K, target, a + b, backend):
                return False
    return True


def union_disjoint_from(
    M: VPolyhedralUnion,
    y0: Sequence[Number],
    eps: Number,
    H: Polytope,
    K: ConeGen,
    backend: Backend = EXACT,
) -> bool:
    """Is the union disjoint from the shifted lower set y0 - eps*H - K?

    One feasibility LP per piece; disjointness holds iff every piece's
    intersection program is infeasible.
    """
    e = frac(eps)
    if e <= 0:
        raise ValueError("eps must be positive")
    y0v = frac_vec(y0)
    _check_dim(M.dim, y0v, "anchor point")
    if not (M.dim == H.dim == K.dim):
        raise DimensionMismatchError("union, polytope, and cone dimensions differ")
    p, m = len(H.vertices), len(K.generators)
    for verts, rays in M.pieces:
        nv, nr = len(verts), len(rays)
        rows = []
        for r in range(M.dim):
            row = [verts[i][r] for i in range(nv)]
            row += [rays[j][r] for j in range(nr)]
            row += [e * H.vertices[i][r] for i in range(p)]
            row += [K.generators[j][r] for j in range(m)]
            rows.append(row)
        # two convexity rows: piece weights and H weights each sum to one
        rows.append(
            [Fraction(1)] * nv + [Fraction(0)] * (nr + p + m)
        )
        rows.append(
            [Fraction(0)] * (nv + nr) + [Fraction(1)] * p + [Fraction(0)] * m
        )
        rhs = list(y0v) + [Fraction(1), Fraction(1)]
        lp = LinearProgram.feasibility(rows, rhs, [True] * (nv + nr + p + m))
        if solve(lp, backend).is_feasible:
            return False
    return True
