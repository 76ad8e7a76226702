"""System and problem data types plus conservative geometric bounds.

A bounded-rate multi-mode system is given purely in V-representation: each
mode carries the (ordered) vertex list of its rate polytope.  Vertex and mode
indices are canonical and appear verbatim in certificates and traces, so
reordering a model invalidates its certificates by design.

Euclidean quantities are replaced by exact rational bounds that err on the
safe side: 1-norm upper bounds for rate magnitudes and 1-norm-scaled lower
bounds for boundary distances.  Comparisons against Euclidean distances
elsewhere use exact squared norms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from . import lp
from .rational import RVec, dot, norm1

# One chosen vertex index per mode.
CmsInstance = tuple[int, ...]


class MembershipError(ValueError):
    """Raised when a rate lies outside its mode's rate polytope."""


class GeometryError(ValueError):
    """Raised when a point required to be strictly interior is not."""


@dataclass(frozen=True)
class Mode:
    name: str
    vertices: tuple[RVec, ...]

    def __post_init__(self) -> None:
        if not self.vertices:
            raise ValueError(f"mode {self.name!r} has no vertices")
        dims = {len(v) for v in self.vertices}
        if len(dims) != 1:
            raise ValueError(f"mode {self.name!r} mixes vertex dimensions")


@dataclass(frozen=True)
class Bms:
    n: int
    modes: tuple[Mode, ...]

    def __post_init__(self) -> None:
        if not self.modes:
            raise ValueError("system has no modes")
        for m in self.modes:
            if len(m.vertices[0]) != self.n:
                raise ValueError(f"mode {m.name!r} has wrong dimension")

    def vertex(self, i: int, j: int) -> RVec:
        return self.modes[i].vertices[j]

    def chosen_rates(self, inst: CmsInstance) -> tuple[RVec, ...]:
        return tuple(m.vertices[j] for m, j in zip(self.modes, inst, strict=True))


@dataclass(frozen=True)
class HPolytope:
    """Finite intersection of half-spaces ``a . x <= b``."""

    rows: tuple[tuple[RVec, Fraction], ...]

    def slacks(self, x: RVec) -> tuple[Fraction, ...]:
        return tuple(b - dot(a, x) for a, b in self.rows)

    def strictly_contains(self, x: RVec) -> bool:
        return all(s > 0 for s in self.slacks(x))


@dataclass(frozen=True)
class ReachProblem:
    x0: RVec
    xt: RVec
    epsilon: Fraction
    safety: HPolytope


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_problem(bms: Bms, prob: ReachProblem) -> ValidationReport:
    """Report-style validation; an empty report means the problem is usable."""
    bad: list[str] = []
    if len(prob.x0) != bms.n:
        bad.append("x0 dimension mismatch")
    if len(prob.xt) != bms.n:
        bad.append("xt dimension mismatch")
    for a, _ in prob.safety.rows:
        if len(a) != bms.n:
            bad.append("safety row dimension mismatch")
            break
    if prob.epsilon <= 0:
        bad.append("epsilon not positive")
    if bad:
        return ValidationReport(tuple(bad))
    if not prob.safety.strictly_contains(prob.x0):
        bad.append("x0 not interior to safety set")
    if not prob.safety.strictly_contains(prob.xt):
        bad.append("xt not interior to safety set")
    for j, sign in itertools.product(range(bms.n), (1, -1)):
        if _has_recession_ray(prob.safety, bms.n, j, sign):
            bad.append(f"safety unbounded in {'+' if sign > 0 else '-'}x_{j}")
    return ValidationReport(tuple(bad))


def _has_recession_ray(poly: HPolytope, n: int, j: int, sign: int) -> bool:
    """Ray feasibility: is there d with A d <= 0 and d_j = sign?"""
    unit = tuple(
        Fraction(sign) if k == j else Fraction(0) for k in range(n)
    )
    p = lp.FeasProblem(
        n_vars=n,
        eq=((unit, Fraction(1)),),
        ineq=tuple((a, Fraction(0)) for a, _ in poly.rows),
    )
    return isinstance(lp.solve(p), lp.Feasible)


def enumerate_instances(bms: Bms) -> Iterator[CmsInstance]:
    """All extreme-rate instances in lexicographic order, mode 0 slowest."""
    ranges = [range(len(m.vertices)) for m in bms.modes]
    yield from itertools.product(*ranges)


def instance_count(bms: Bms) -> int:
    count = 1
    for m in bms.modes:
        count *= len(m.vertices)
    return count


def decompose_rate(mode: Mode, rate: RVec) -> tuple[Fraction, ...]:
    """Convex coefficients theta with sum(theta_j * vertex_j) == rate.

    Deterministic: first feasible basis under Bland's rule.  Raises
    MembershipError when the rate is outside the polytope.
    """
    n = len(mode.vertices[0])
    if len(rate) != n:
        raise ValueError("rate dimension mismatch")
    k = len(mode.vertices)
    eq = [
        (tuple(v[c] for v in mode.vertices), rate[c])
        for c in range(n)
    ]
    eq.append(((Fraction(1),) * k, Fraction(1)))
    p = lp.FeasProblem(
        n_vars=k, eq=tuple(eq), nonneg=frozenset(range(k))
    )
    res = lp.solve(p)
    if isinstance(res, lp.Infeasible):
        raise MembershipError(f"rate not in conv(vertices) of mode {mode.name!r}")
    return res.t


def conservative_distance(poly: HPolytope, x: RVec) -> Fraction:
    """Rational lower bound on the Euclidean distance of x to the boundary.

    Uses min over rows of slack / 1-norm; valid since the 2-norm of a row
    never exceeds its 1-norm.  Requires x strictly interior.
    """
    best: Fraction | None = None
    for a, b in poly.rows:
        slack = b - dot(a, x)
        if slack <= 0:
            raise GeometryError("point not strictly interior")
        scale = norm1(a)
        if scale == 0:
            continue
        d = slack / scale
        if best is None or d < best:
            best = d
    if best is None:
        raise GeometryError("polytope has no effective rows")
    return best


def max_rate_bound(bms: Bms) -> Fraction:
    """Rational upper bound on the Euclidean norm of every achievable rate.

    The 2-norm maximum over a polytope is attained at a vertex, and the
    1-norm dominates the 2-norm, so max over vertices of the 1-norm works.
    """
    return max(norm1(v) for m in bms.modes for v in m.vertices)
