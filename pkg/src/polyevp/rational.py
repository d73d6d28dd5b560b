"""Exact rational helpers shared across the package.

All geometric data is stored as `fractions.Fraction` so feasibility
questions have certified yes/no answers.  Floats are converted through
their shortest decimal representation, which matches what a user wrote
in an input file rather than the binary expansion of the float.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence, Union

Number = Union[int, float, str, Fraction]
Vec = tuple[Fraction, ...]


def frac(x: Number) -> Fraction:
    """Coerce ints, Fractions, floats, and 'p/q' or decimal strings."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        return Fraction(repr(x))
    raise TypeError(f"cannot interpret {x!r} as a rational number")


def frac_vec(xs: Iterable[Number]) -> Vec:
    return tuple(frac(x) for x in xs)


def frac_matrix(rows: Iterable[Iterable[Number]]) -> tuple[Vec, ...]:
    return tuple(frac_vec(r) for r in rows)


def dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    if len(a) != len(b):
        raise ValueError(f"dot of length {len(a)} with length {len(b)}")
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def vec_sub(a: Sequence[Fraction], b: Sequence[Fraction]) -> Vec:
    if len(a) != len(b):
        raise ValueError(f"vector lengths differ: {len(a)} vs {len(b)}")
    return tuple(x - y for x, y in zip(a, b))


def vec_add(a: Sequence[Fraction], b: Sequence[Fraction]) -> Vec:
    if len(a) != len(b):
        raise ValueError(f"vector lengths differ: {len(a)} vs {len(b)}")
    return tuple(x + y for x, y in zip(a, b))


def vec_scale(c: Fraction, a: Sequence[Fraction]) -> Vec:
    return tuple(c * x for x in a)


def fmt(q: Fraction) -> str:
    """Render exactly: '5' for integers, '3/2' otherwise."""
    return str(q)


def to_jsonable(q: Fraction) -> Union[int, str]:
    """JSON form that round-trips exactly through `frac`."""
    if q.denominator == 1:
        return int(q)
    return str(q)
