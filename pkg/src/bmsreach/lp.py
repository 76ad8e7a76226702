"""Exact rational linear feasibility with Farkas infeasibility certificates.

A single phase-1 simplex (Bland's rule, dense rational tableau) answers every
linear question in the toolkit: time-vector existence for constant-rate
instances, convex decomposition of rates, and safety-set boundedness.

Feasibility problems mix equality rows, ``coeffs . t <= rhs`` inequality rows,
and a set of variables constrained nonnegative (the rest are free).  An
infeasible problem yields a multiplier vector ``y`` over the rows, ordered
equalities first, with the canonical orientation:

* ``y`` is >= 0 on inequality rows,
* the combined coefficient  sum_eq y_i a_i - sum_ineq y_i a_i  is <= 0 on
  every nonnegative variable and exactly 0 on every free variable,
* the combined right-hand side  sum_eq y_i b_i - sum_ineq y_i b_i  is > 0.

For a conic system ``R t = v, t >= 0`` this is the familiar separating
functional with ``y'R <= 0`` and ``y'v > 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .rational import RVec, dot

Row = tuple[RVec, Fraction]

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass(frozen=True)
class FeasProblem:
    """eq rows ``a.t = b``, ineq rows ``a.t <= b``, nonneg variable indices."""

    n_vars: int
    eq: tuple[Row, ...] = ()
    ineq: tuple[Row, ...] = ()
    nonneg: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        for coeffs, _ in (*self.eq, *self.ineq):
            if len(coeffs) != self.n_vars:
                raise ValueError("row width does not match variable count")
        if any(j < 0 or j >= self.n_vars for j in self.nonneg):
            raise ValueError("nonneg index out of range")

    @property
    def rows(self) -> tuple[Row, ...]:
        return self.eq + self.ineq


@dataclass(frozen=True)
class Feasible:
    t: RVec


@dataclass(frozen=True)
class Infeasible:
    farkas: RVec


FeasResult = Feasible | Infeasible


def solve(p: FeasProblem) -> FeasResult:
    """Phase-1 simplex with Bland's anti-cycling rule; fully deterministic.

    Feasible answers are basic feasible solutions; infeasible answers carry
    the Farkas multipliers read off the optimal phase-1 duals.
    """
    n_eq, n_in = len(p.eq), len(p.ineq)
    n_rows = n_eq + n_in

    # Column layout: one column per nonneg variable, two (plus/minus) per
    # free variable, then one slack per inequality, then one artificial per
    # row.  col_of[j] holds the first column of variable j.
    col_of: list[int] = []
    split: list[bool] = []
    ncols = 0
    for j in range(p.n_vars):
        col_of.append(ncols)
        if j in p.nonneg:
            split.append(False)
            ncols += 1
        else:
            split.append(True)
            ncols += 2
    slack0 = ncols
    ncols += n_in
    art0 = ncols
    ncols += n_rows

    flip: list[Fraction] = []
    tableau: list[list[Fraction]] = []
    all_rows = list(p.rows)
    for i, (coeffs, rhs) in enumerate(all_rows):
        f = _ONE if rhs >= 0 else -_ONE
        flip.append(f)
        row = [_ZERO] * (ncols + 1)
        for j in range(p.n_vars):
            c = f * coeffs[j]
            row[col_of[j]] = c
            if split[j]:
                row[col_of[j] + 1] = -c
        if i >= n_eq:
            row[slack0 + (i - n_eq)] = f
        row[art0 + i] = _ONE
        row[ncols] = f * rhs
        tableau.append(row)

    basis = [art0 + i for i in range(n_rows)]

    # Reduced-cost row for min(sum of artificials): z = c - sum of basic rows.
    z = [_ZERO] * (ncols + 1)
    for c in range(art0, art0 + n_rows):
        z[c] = _ONE
    for row in tableau:
        for c in range(ncols + 1):
            z[c] -= row[c]

    while True:
        enter = next((c for c in range(ncols) if z[c] < 0), None)
        if enter is None:
            break
        leave = None
        best: Fraction | None = None
        for i in range(n_rows):
            a = tableau[i][enter]
            if a > 0:
                ratio = tableau[i][ncols] / a
                if best is None or ratio < best or (
                    ratio == best and leave is not None and basis[i] < basis[leave]
                ):
                    best = ratio
                    leave = i
        if leave is None:
            # Phase-1 objective is bounded below by 0; cannot happen.
            raise AssertionError("phase-1 simplex unbounded")
        _pivot(tableau, z, basis, leave, enter, ncols)

    if -z[ncols] > 0:
        # Infeasible: y_i = 1 - reduced cost of the i-th artificial column.
        farkas = []
        for i in range(n_rows):
            y_i = flip[i] * (_ONE - z[art0 + i])
            farkas.append(y_i if i < n_eq else -y_i)
        return Infeasible(tuple(farkas))

    values = [_ZERO] * ncols
    for i, b in enumerate(basis):
        values[b] = tableau[i][ncols]
    t = []
    for j in range(p.n_vars):
        c = col_of[j]
        t.append(values[c] - values[c + 1] if split[j] else values[c])
    return Feasible(tuple(t))


def _pivot(
    tableau: list[list[Fraction]],
    z: list[Fraction],
    basis: list[int],
    leave: int,
    enter: int,
    ncols: int,
) -> None:
    prow = tableau[leave]
    inv = _ONE / prow[enter]
    for c in range(ncols + 1):
        prow[c] *= inv
    for row in tableau:
        if row is prow or row[enter] == 0:
            continue
        f = row[enter]
        for c in range(ncols + 1):
            row[c] -= f * prow[c]
    if z[enter] != 0:
        f = z[enter]
        for c in range(ncols + 1):
            z[c] -= f * prow[c]
    basis[leave] = enter


def verify_solution(p: FeasProblem, t: RVec) -> bool:
    """Exact substitution check of a candidate solution."""
    if len(t) != p.n_vars:
        return False
    if any(t[j] < 0 for j in p.nonneg):
        return False
    if any(dot(coeffs, t) != rhs for coeffs, rhs in p.eq):
        return False
    return all(dot(coeffs, t) <= rhs for coeffs, rhs in p.ineq)


def verify_farkas(p: FeasProblem, y: RVec) -> bool:
    """Pure arithmetic check of an infeasibility certificate.

    Entries follow the row order of the problem (equalities first); see the
    module docstring for the sign conventions.
    """
    n_eq = len(p.eq)
    if len(y) != n_eq + len(p.ineq):
        return False
    if any(y_i < 0 for y_i in y[n_eq:]):
        return False
    combined_rhs = _ZERO
    combined = [_ZERO] * p.n_vars
    for i, (coeffs, rhs) in enumerate(p.rows):
        sign = _ONE if i < n_eq else -_ONE
        w = sign * y[i]
        if w == 0:
            continue
        combined_rhs += w * rhs
        for j in range(p.n_vars):
            combined[j] += w * coeffs[j]
    if combined_rhs <= 0:
        return False
    for j in range(p.n_vars):
        if j in p.nonneg:
            if combined[j] > 0:
                return False
        elif combined[j] != 0:
            return False
    return True
