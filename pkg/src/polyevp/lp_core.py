"""Deterministic linear feasibility/optimization oracle.

Programs are stated as equality rows over variables that are either
nonnegative or free, with an optional linear objective.  Two backends
solve them:

* ``EXACT`` runs a two-phase simplex with Bland's rule on integer-scaled
  tableau rows, so every feasible/infeasible/unbounded verdict is
  certified by the arithmetic and the method provably terminates.
* ``float_backend(tol)`` runs the same pivoting discipline in floating
  point.  Verdicts that were decided by a quantity within ``tol`` of a
  constraint boundary are flagged ``marginal`` in the result, meaning
  the status could flip under perturbation of that size.

The tableau is dense and small on purpose: every caller in this package
produces programs with at most a few dozen variables, and correctness
is worth far more here than asymptotics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .rational import Vec, dot, frac, frac_vec

__all__ = [
    "Backend",
    "EXACT",
    "FLOAT",
    "float_backend",
    "LPFormatError",
    "LinearProgram",
    "LPResult",
    "solve",
    "check_witness",
]


class LPFormatError(ValueError):
    """Raised when a program's dimensions or fields are inconsistent."""


@dataclass(frozen=True)
class Backend:
    """Arithmetic selection for `solve`.

    ``kind`` is "exact" or "float"; ``tol`` is the float backend's
    boundary tolerance and is ignored by the exact backend.
    """

    kind: str
    tol: float = 1e-9

    def __post_init__(self) -> None:
        if self.kind not in ("exact", "float"):
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.kind == "float" and not 0 < self.tol < 1:
            raise ValueError("float backend tolerance must be in (0, 1)")


EXACT = Backend("exact")
FLOAT = Backend("float", 1e-9)


def float_backend(tol: float = 1e-9) -> Backend:
    return Backend("float", tol)


@dataclass(frozen=True)
class LinearProgram:
    """Equality-constrained program: rows @ x == rhs, x[j] >= 0 where flagged.

    ``sense`` is "min", "max", or "feasibility".  Feasibility-only
    programs carry no objective (equivalently an all-zero one).
    """

    n_vars: int
    rows: tuple[Vec, ...]
    rhs: Vec
    nonneg: tuple[bool, ...]
    objective: Optional[Vec] = None
    sense: str = "feasibility"

    def __post_init__(self) -> None:
        if self.n_vars < 0:
            raise LPFormatError("negative variable count")
        if len(self.rhs) != len(self.rows):
            raise LPFormatError(
                f"{len(self.rows)} rows but {len(self.rhs)} right-hand sides"
            )
        for i, row in enumerate(self.rows):
            if len(row) != self.n_vars:
                raise LPFormatError(
                    f"row {i} has width {len(row)}, expected {self.n_vars}"
                )
        if len(self.nonneg) != self.n_vars:
            raise LPFormatError(
                f"{len(self.nonneg)} nonnegativity flags for {self.n_vars} variables"
            )
        if self.sense not in ("min", "max", "feasibility"):
            raise LPFormatError(f"unknown sense {self.sense!r}")
        if self.sense == "feasibility":
            if self.objective is not None and any(c != 0 for c in self.objective):
                raise LPFormatError("feasibility-only program with nonzero objective")
        else:
            if self.objective is None:
                raise LPFormatError(f"sense {self.sense!r} requires an objective")
            if len(self.objective) != self.n_vars:
                raise LPFormatError("objective width does not match variable count")

    @classmethod
    def feasibility(cls, rows, rhs, nonneg) -> "LinearProgram":
        rows = tuple(frac_vec(r) for r in rows)
        return cls(
            n_vars=len(nonneg),
            rows=rows,
            rhs=frac_vec(rhs),
            nonneg=tuple(bool(b) for b in nonneg),
        )

    @classmethod
    def optimize(cls, objective, sense, rows, rhs, nonneg) -> "LinearProgram":
        rows = tuple(frac_vec(r) for r in rows)
        return cls(
            n_vars=len(nonneg),
            rows=rows,
            rhs=frac_vec(rhs),
            nonneg=tuple(bool(b) for b in nonneg),
            objective=frac_vec(objective),
            sense=sense,
        )


@dataclass(frozen=True)
class LPResult:
    """Solver outcome.

    ``status`` is "feasible", "infeasible", or "unbounded".  For feasible
    results ``witness`` satisfies every row (exactly under the exact
    backend) and ``value`` is the objective value (0 for feasibility-only
    programs).  ``marginal`` is a float-backend diagnostic: the decision
    rested on a quantity within tolerance of a constraint boundary.
    """

    status: str
    value: object = None
    witness: Optional[tuple] = None
    marginal: bool = False

    @property
    def is_feasible(self) -> bool:
        return self.status == "feasible"


def solve(lp: LinearProgram, backend: Backend = EXACT) -> LPResult:
    """Solve ``lp`` with the chosen backend."""
    if backend.kind == "exact":
        return _solve_exact(lp)
    return _solve_float(lp, backend.tol)


def check_witness(lp: LinearProgram, witness: Sequence, tol: float = 0.0) -> bool:
    """Re-check a witness against every constraint (tol=0 means exactly)."""
    if len(witness) != lp.n_vars:
        return False
    xs = list(witness)
    for j, nn in enumerate(lp.nonneg):
        if nn and xs[j] < -tol:
            return False
    for row, b in zip(lp.rows, lp.rhs):
        resid = sum(a * x for a, x in zip(row, xs)) - b
        if abs(resid) > tol:
            return False
    return True


# ---------------------------------------------------------------------------
# exact backend: integer-scaled tableau, Bland's rule
# ---------------------------------------------------------------------------
#
# Rows are kept as integer vectors (coefficients + rhs in the last slot).
# A pivot on (p, q) replaces row r by row_r * |T[p][q]| - row_p * (T[r][q]
# * sign(T[p][q])), which keeps everything integral; each row is then
# divided by its gcd to keep the integers small.  Basis columns keep a
# single positive entry, so the basic value of row i is rhs_i / T[i][B_i]
# and ratio tests compare integer cross-products.


def _row_gcd_reduce(row: list[int]) -> None:
    g = 0
    for e in row:
        g = math.gcd(g, e)
        if g == 1:
            return
    if g > 1:
        for k in range(len(row)):
            row[k] //= g


class _ExactTableau:
    def __init__(self, rows: list[list[int]], basis: list[int], n_struct: int):
        self.rows = rows          # m rows, each of length n_total + 1 (rhs last)
        self.basis = basis        # basis[i] = column index basic in row i
        self.n_struct = n_struct  # structural columns precede artificials
        self.obj: list[int] = []

    def set_objective(self, costs: list[Fraction]) -> None:
        # Reduced-cost row = costs - combination of basic rows, held integral
        # and scaled by a positive factor (signs are all that matter).
        den = 1
        for c in costs:
            den = den * c.denominator // math.gcd(den, c.denominator)
        obj = [int(c * den) for c in costs] + [0]
        for i, row in enumerate(self.rows):
            f = obj[self.basis[i]]
            if f:
                piv = row[self.basis[i]]
                obj = [o * piv - f * r for o, r in zip(obj, row)]
                _row_gcd_reduce(obj)
        self.obj = obj

    def pivot(self, p: int, q: int) -> None:
        rows = self.rows
        prow = rows[p]
        if prow[q] < 0:
            prow = [-e for e in prow]
            rows[p] = prow
        piv = prow[q]
        for i in range(len(rows)):
            if i == p:
                continue
            row = rows[i]
            f = row[q]
            if f:
                rows[i] = [a * piv - f * b for a, b in zip(row, prow)]
                _row_gcd_reduce(rows[i])
        f = self.obj[q]
        if f:
            self.obj = [a * piv - f * b for a, b in zip(self.obj, prow)]
            _row_gcd_reduce(self.obj)
        _row_gcd_reduce(prow)
        self.basis[p] = q

    def basic_value(self, i: int) -> Fraction:
        return Fraction(self.rows[i][-1], self.rows[i][self.basis[i]])

    def run_bland(self, allowed: range) -> str:
        """Minimize until optimal ('optimal') or an unbounded ray ('unbounded')."""
        rows = self.rows
        while True:
            q = -1
            for j in allowed:
                if self.obj[j] < 0:
                    q = j
                    break
            if q < 0:
                return "optimal"
            best = -1
            for i in range(len(rows)):
                a = rows[i][q]
                if a <= 0:
                    continue
                if best < 0:
                    best = i
                    continue
                # rhs_i / a_iq  vs  rhs_best / a_best,q  via cross products
                lhs = rows[i][-1] * rows[best][q]
                rhs = rows[best][-1] * rows[i][q]
                if lhs < rhs or (lhs == rhs and self.basis[i] < self.basis[best]):
                    best = i
            if best < 0:
                return "unbounded"
            self.pivot(best, q)


def _integerize(values: Sequence[Fraction]) -> list[int]:
    den = 1
    for v in values:
        den = den * v.denominator // math.gcd(den, v.denominator)
    return [int(v * den) for v in values]


def _solve_exact(lp: LinearProgram) -> LPResult:
    # Split free variables into positive/negative parts.
    cols: list[tuple[int, int]] = []
    for j, nn in enumerate(lp.nonneg):
        cols.append((j, 1))
        if not nn:
            cols.append((j, -1))
    n_struct = len(cols)
    m = len(lp.rows)

    rows: list[list[int]] = []
    for r in range(m):
        ent = [lp.rows[r][j] * s for (j, s) in cols]
        ent.append(lp.rhs[r])
        ient = _integerize(ent)
        if ient[-1] < 0:
            ient = [-e for e in ient]
        rows.append(ient)

    # Append artificial identity columns.
    full_rows = []
    for i, row in enumerate(rows):
        art = [0] * m
        art[i] = 1
        full_rows.append(row[:-1] + art + [row[-1]])
    basis = [n_struct + i for i in range(m)]
    tab = _ExactTableau(full_rows, basis, n_struct)

    if m:
        phase1 = [Fraction(0)] * n_struct + [Fraction(1)] * m
        tab.set_objective(phase1)
        tab.run_bland(range(n_struct + m))
        infeas = sum(
            (tab.basic_value(i) for i in range(m) if tab.basis[i] >= n_struct),
            Fraction(0),
        )
        if infeas > 0:
            return LPResult(status="infeasible")
        _drive_out_artificials(tab)

    objective = lp.objective
    if lp.sense != "feasibility":
        sign = 1 if lp.sense == "min" else -1
        width = (len(tab.rows[0]) - 1) if tab.rows else n_struct
        costs = [sign * objective[j] * s for (j, s) in cols]
        costs += [Fraction(0)] * (width - n_struct)
        tab.set_objective(costs)
        status = tab.run_bland(range(n_struct))
        if status == "unbounded":
            return LPResult(status="unbounded")

    witness = _extract_witness(tab, cols, lp.n_vars)
    value = Fraction(0)
    if lp.sense != "feasibility":
        value = dot(objective, witness)
    return LPResult(status="feasible", value=value, witness=tuple(witness))


def _drive_out_artificials(tab: _ExactTableau) -> None:
    # Basic artificials sit at value zero after a successful phase 1; pivot
    # them onto structural columns, or drop redundant rows.
    i = 0
    while i < len(tab.rows):
        if tab.basis[i] < tab.n_struct:
            i += 1
            continue
        q = next((j for j in range(tab.n_struct) if tab.rows[i][j] != 0), -1)
        if q >= 0:
            tab.pivot(i, q)
            i += 1
        else:
            del tab.rows[i]
            del tab.basis[i]


def _extract_witness(
    tab: _ExactTableau, cols: list[tuple[int, int]], n_vars: int
) -> list[Fraction]:
    x = [Fraction(0)] * n_vars
    for i in range(len(tab.rows)):
        b = tab.basis[i]
        if b < tab.n_struct:
            j, s = cols[b]
            x[j] += s * tab.basic_value(i)
    return x


# ---------------------------------------------------------------------------
# float backend: classic normalized tableau, Bland's rule, tol comparisons
# ---------------------------------------------------------------------------


class _FloatTableau:
    def __init__(self, rows, basis, n_struct, tol):
        self.rows = rows
        self.basis = basis
        self.n_struct = n_struct
        self.tol = tol
        self.noise = tol * 1e-6
        self.obj: list[float] = []
        self.marginal = False

    def _note(self, v: float) -> None:
        if self.noise < abs(v) <= self.tol:
            self.marginal = True

    def set_objective(self, costs: list[float]) -> None:
        obj = list(costs) + [0.0]
        for i, row in enumerate(self.rows):
            f = obj[self.basis[i]]
            if f:
                obj = [o - f * r for o, r in zip(obj, row)]
        self.obj = obj

    def pivot(self, p: int, q: int) -> None:
        prow = self.rows[p]
        piv = prow[q]
        self.rows[p] = [e / piv for e in prow]
        prow = self.rows[p]
        for i in range(len(self.rows)):
            if i == p:
                continue
            f = self.rows[i][q]
            if f:
                self.rows[i] = [a - f * b for a, b in zip(self.rows[i], prow)]
        f = self.obj[q]
        if f:
            self.obj = [a - f * b for a, b in zip(self.obj, prow)]
        self.basis[p] = q

    def run_bland(self, allowed: range, max_iter: int = 50_000) -> str:
        for _ in range(max_iter):
            q = -1
            for j in allowed:
                rc = self.obj[j]
                self._note(rc)
                if rc < -self.tol:
                    q = j
                    break
            if q < 0:
                return "optimal"
            best = -1
            best_ratio = math.inf
            for i in range(len(self.rows)):
                a = self.rows[i][q]
                self._note(a)
                if a <= self.tol:
                    continue
                ratio = self.rows[i][-1] / a
                if ratio < best_ratio - self.noise or (
                    abs(ratio - best_ratio) <= self.noise
                    and best >= 0
                    and self.basis[i] < self.basis[best]
                ):
                    best = i
                    best_ratio = ratio
            if best < 0:
                return "unbounded"
            self.pivot(best, q)
        raise RuntimeError("simplex iteration limit exceeded (float backend)")


def _solve_float(lp: LinearProgram, tol: float) -> LPResult:
    cols: list[tuple[int, int]] = []
    for j, nn in enumerate(lp.nonneg):
        cols.append((j, 1))
        if not nn:
            cols.append((j, -1))
    n_struct = len(cols)
    m = len(lp.rows)

    rows: list[list[float]] = []
    for r in range(m):
        ent = [float(lp.rows[r][j]) * s for (j, s) in cols]
        b = float(lp.rhs[r])
        if b < 0:
            ent = [-e for e in ent]
            b = -b
        art = [0.0] * m
        art[r] = 1.0
        rows.append(ent + art + [b])
    basis = [n_struct + i for i in range(m)]
    tab = _FloatTableau(rows, basis, n_struct, tol)

    if m:
        tab.set_objective([0.0] * n_struct + [1.0] * m)
        tab.run_bland(range(n_struct + m))
        infeas = sum(
            tab.rows[i][-1] for i in range(m) if tab.basis[i] >= n_struct
        )
        tab._note(infeas)
        if infeas > tol:
            return LPResult(status="infeasible", marginal=tab.marginal)
        # Degenerate basic artificials are harmless for feasibility; pivot
        # them out where possible so phase 2 prices structural columns.
        i = 0
        while i < len(tab.rows):
            if tab.basis[i] >= tab.n_struct:
                q = next(
                    (j for j in range(n_struct) if abs(tab.rows[i][j]) > tol), -1
                )
                if q >= 0:
                    tab.pivot(i, q)
                else:
                    del tab.rows[i]
                    del tab.basis[i]
                    continue
            i += 1

    if lp.sense != "feasibility":
        sign = 1.0 if lp.sense == "min" else -1.0
        width = (len(tab.rows[0]) - 1) if tab.rows else n_struct
        costs = [sign * float(lp.objective[j]) * s for (j, s) in cols]
        costs += [0.0] * (width - n_struct)
        tab.set_objective(costs)
        status = tab.run_bland(range(n_struct))
        if status == "unbounded":
            return LPResult(status="unbounded", marginal=tab.marginal)

    x = [0.0] * lp.n_vars
    for i in range(len(tab.rows)):
        b = tab.basis[i]
        v = tab.rows[i][-1]
        tab._note(v)
        if b < tab.n_struct:
            j, s = cols[b]
            x[j] += s * v
    value = 0.0
    if lp.sense != "feasibility":
        value = sum(float(c) * xv for c, xv in zip(lp.objective, x))
    return LPResult(
        status="feasible", value=value, witness=tuple(x), marginal=tab.marginal
    )
