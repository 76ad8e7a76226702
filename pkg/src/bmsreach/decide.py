"""Robust reachability decision with verifiable certificates.

A target is robustly reachable iff every extreme-rate instance admits a
nonnegative time vector solving

    x0(j) + sum_i R(i)(j) * t(i) = xt(j)    for every coordinate j.

The procedure enumerates instances exhaustively (co-NP membership made
literal).  A positive answer carries one time vector per instance; a negative
answer carries the first infeasible instance in lexicographic order together
with a separating hyperplane y (y . r <= 0 for each chosen rate r and
y . (xt - x0) > 0) extracted from the LP's Farkas multipliers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import lp
from .model import Bms, CmsInstance, ReachProblem, enumerate_instances, validate_problem
from .rational import RVec, dot, vsub

SigmaTable = dict[CmsInstance, RVec]


class InvalidProblemError(ValueError):
    def __init__(self, violations: tuple[str, ...]):
        super().__init__("; ".join(violations))
        self.violations = violations


@dataclass(frozen=True)
class Reachable:
    table: tuple[tuple[CmsInstance, RVec], ...]

    def sigma(self) -> SigmaTable:
        return dict(self.table)


@dataclass(frozen=True)
class Unreachable:
    witness: CmsInstance
    hyperplane: RVec


ReachCertificate = Reachable | Unreachable


def instance_problem(
    bms: Bms, inst: CmsInstance, x0: RVec, xt: RVec
) -> lp.FeasProblem:
    """The time-vector system of a constant-rate instance as an LP."""
    if len(x0) != bms.n or len(xt) != bms.n:
        raise ValueError("point dimension mismatch")
    rates = bms.chosen_rates(inst)
    k = len(rates)
    eq = tuple(
        (tuple(r[c] for r in rates), xt[c] - x0[c])
        for c in range(bms.n)
    )
    return lp.FeasProblem(n_vars=k, eq=eq, nonneg=frozenset(range(k)))


def cms_reach(
    bms: Bms, inst: CmsInstance, x0: RVec, xt: RVec
) -> RVec | None:
    """A nonnegative time vector reaching xt exactly, or None if impossible."""
    res = lp.solve(instance_problem(bms, inst, x0, xt))
    return res.t if isinstance(res, lp.Feasible) else None


def robust_reach(bms: Bms, prob: ReachProblem) -> ReachCertificate:
    """Decide robust reachability; certificates are independently checkable."""
    report = validate_problem(bms, prob)
    if not report.ok:
        raise InvalidProblemError(report.violations)
    table: list[tuple[CmsInstance, RVec]] = []
    for inst in enumerate_instances(bms):
        res = lp.solve(instance_problem(bms, inst, prob.x0, prob.xt))
        if isinstance(res, lp.Infeasible):
            return Unreachable(witness=inst, hyperplane=res.farkas)
        table.append((inst, res.t))
    return Reachable(tuple(table))


def verify_certificate(
    bms: Bms, prob: ReachProblem, cert: ReachCertificate
) -> bool:
    """Arithmetic-only re-check of a certificate against the model."""
    v = vsub(prob.xt, prob.x0)
    if isinstance(cert, Reachable):
        table = cert.sigma()
        expected = list(enumerate_instances(bms))
        if set(table) != set(expected) or len(cert.table) != len(expected):
            return False
        for inst, sigma in table.items():
            if not _sigma_ok(bms, inst, sigma, v):
                return False
        return True
    if not _valid_instance(bms, cert.witness):
        return False
    if len(cert.hyperplane) != bms.n:
        return False
    y = cert.hyperplane
    if dot(y, v) <= 0:
        return False
    return all(dot(y, r) <= 0 for r in bms.chosen_rates(cert.witness))


def _valid_instance(bms: Bms, inst: CmsInstance) -> bool:
    return len(inst) == len(bms.modes) and all(
        0 <= j < len(m.vertices) for m, j in zip(bms.modes, inst)
    )


def _sigma_ok(bms: Bms, inst: CmsInstance, sigma: RVec, v: RVec) -> bool:
    if not _valid_instance(bms, inst):
        return False
    if len(sigma) != len(bms.modes) or any(t < 0 for t in sigma):
        return False
    total = [Fraction(0)] * bms.n
    for t, r in zip(sigma, bms.chosen_rates(inst), strict=True):
        for c in range(bms.n):
            total[c] += t * r[c]
    return tuple(total) == v
