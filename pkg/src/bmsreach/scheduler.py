"""Dynamic scheduling strategy with exact projection bookkeeping.

The scheduler maintains the current point both explicitly and as a projection
(lambda, pi): a nonnegative component lambda along the reachability direction
v = xt - x0 plus small nonnegative contributions pi(i, j) along the j-th
vertex of mode i's rate polytope:

    x = x0 + lambda * v + sum_{i,j} pi(i, j) * R(i)(j)

Each round the scheduler finds a mode with zero total contribution (trading
vertex contributions for lambda-progress where necessary), proposes it for the
fixed duration tau, and records the environment's convex response.  The
identity above is re-established exactly after every operation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .model import (
    Bms,
    CmsInstance,
    ReachProblem,
    conservative_distance,
    enumerate_instances,
    max_rate_bound,
    validate_problem,
)
from .decide import SigmaTable, instance_problem
from . import lp
from .rational import RVec, sqnorm, vadd, vscale, vsub, zeros

_ZERO = Fraction(0)


class InitError(Exception):
    """Scheduler construction failed."""


class InvalidProblem(InitError):
    def __init__(self, violations: tuple[str, ...]):
        super().__init__("; ".join(violations))
        self.violations = violations


class NotRobustlyReachable(InitError):
    def __init__(self, witness: CmsInstance, hyperplane: RVec):
        super().__init__(f"infeasible instance {witness}")
        self.witness = witness
        self.hyperplane = hyperplane


class ContractViolation(Exception):
    """A caller broke a propose/observe protocol obligation."""


class DegenerateReduction(Exception):
    """reduce_comp called with no sigma-positive mode to consume."""


@dataclass(frozen=True)
class Projection:
    lam: Fraction = _ZERO
    pi: tuple[tuple[tuple[int, int], Fraction], ...] = ()

    def entries(self) -> dict[tuple[int, int], Fraction]:
        return dict(self.pi)

    def entry(self, i: int, j: int) -> Fraction:
        for key, value in self.pi:
            if key == (i, j):
                return value
        return _ZERO

    def mode_contribution(self, i: int) -> Fraction:
        return sum((v for (mi, _), v in self.pi if mi == i), _ZERO)

    def contributing_vertex(self, i: int) -> int | None:
        """Lowest-index vertex of mode i with positive contribution."""
        best = None
        for (mi, j), v in self.pi:
            if mi == i and v > 0 and (best is None or j < best):
                best = j
        return best


def _make_projection(lam: Fraction, entries: Mapping[tuple[int, int], Fraction]) -> Projection:
    pi = tuple(sorted((k, v) for k, v in entries.items() if v != 0))
    return Projection(lam=lam, pi=pi)


def reconstruct_point(P: Projection, x0: RVec, v: RVec, bms: Bms) -> RVec:
    x = vadd(x0, vscale(P.lam, v))
    for (i, j), w in P.pi:
        x = vadd(x, vscale(w, bms.vertex(i, j)))
    return x


def reduce_comp(P: Projection, inst: CmsInstance, sigma: RVec) -> Projection:
    """Trade vertex contributions of the instance for lambda-progress.

    Nullifies the contribution of the chosen vertex of the argmin mode k
    (ties to the lowest mode index) while keeping the represented point
    unchanged; no entry ever goes negative.
    """
    candidates = [i for i, s in enumerate(sigma) if s > 0]
    if not candidates:
        raise DegenerateReduction("sigma has no positive entry")
    k = min(candidates, key=lambda i: (P.entry(i, inst[i]) / sigma[i], i))
    c_k = P.entry(k, inst[k])
    entries = P.entries()
    lam = P.lam + c_k / sigma[k]
    for i, s in enumerate(sigma):
        key = (i, inst[i])
        entries[key] = entries.get(key, _ZERO) - c_k * s / sigma[k]
    out = _make_projection(lam, entries)
    if any(v < 0 for _, v in out.pi):
        raise AssertionError("reduction produced a negative contribution")
    return out


def next_mode(P: Projection, sigma: SigmaTable, bms: Bms) -> tuple[Projection, int]:
    """Find (reducing as needed) a mode with zero total contribution.

    Terminates within sum of vertex counts reductions: each reduce_comp
    zeroes one positive entry and never creates a new one.
    """
    while True:
        for i in range(len(bms.modes)):
            if P.mode_contribution(i) == 0:
                return P, i
        inst = tuple(P.contributing_vertex(i) for i in range(len(bms.modes)))
        P = reduce_comp(P, inst, sigma[inst])


def update_projection(
    P: Projection, mode: int, theta: Sequence[Fraction], tau: Fraction
) -> Projection:
    """Record the environment's convex response on a freshly pumped mode."""
    if P.mode_contribution(mode) != 0:
        raise ContractViolation(f"mode {mode} already contributes")
    entries = P.entries()
    for j, th in enumerate(theta):
        if th != 0:
            entries[(mode, j)] = th * tau
    return _make_projection(P.lam, entries)


@dataclass(frozen=True)
class SchedulerConfig:
    v: RVec
    epsilon: Fraction
    mhat: Fraction
    gamma1: Fraction
    gamma2: Fraction
    tau: Fraction
    sigma: SigmaTable = field(repr=False)


class Scheduler:
    """Single-threaded propose/observe session; built via ``init``."""

    def __init__(self, bms: Bms, prob: ReachProblem, config: SchedulerConfig):
        self.bms = bms
        self.prob = prob
        self.config = config
        self.x: RVec = prob.x0
        self.P = Projection()
        self.step_count = 0
        self._pending: int | None = None

    @property
    def done(self) -> bool:
        d = vsub(self.x, self.prob.xt)
        return sqnorm(d) <= self.config.epsilon**2

    def propose(self) -> tuple[int, Fraction] | None:
        """Next (mode, duration) to play, or None once inside the goal ball."""
        if self._pending is not None:
            raise ContractViolation("previous proposal not yet observed")
        if self.done:
            return None
        self.P, mode = next_mode(self.P, self.config.sigma, self.bms)
        self._pending = mode
        return mode, self.config.tau

    def observe(self, mode: int, theta: Sequence[Fraction]) -> None:
        """Apply the environment's convex response to the last proposal."""
        if self._pending is None or mode != self._pending:
            raise ContractViolation("observe does not match last proposal")
        vertices = self.bms.modes[mode].vertices
        if len(theta) != len(vertices):
            raise ContractViolation("theta arity mismatch")
        if any(th < 0 for th in theta) or sum(theta) != 1:
            raise ContractViolation("theta is not a convex combination")
        rate = zeros(self.bms.n)
        for th, vtx in zip(theta, vertices, strict=True):
            if th != 0:
                rate = vadd(rate, vscale(th, vtx))
        self.x = vadd(self.x, vscale(self.config.tau, rate))
        self.P = update_projection(self.P, mode, theta, self.config.tau)
        self.step_count += 1
        self._pending = None

    def reconstruct(self) -> RVec:
        return reconstruct_point(self.P, self.prob.x0, self.config.v, self.bms)


def init(bms: Bms, prob: ReachProblem) -> Scheduler:
    """Compute tau and the full sigma table; raises InitError on failure."""
    report = validate_problem(bms, prob)
    if not report.ok:
        raise InvalidProblem(report.violations)
    v = vsub(prob.xt, prob.x0)
    sigma: SigmaTable = {}
    for inst in enumerate_instances(bms):
        res = lp.solve(instance_problem(bms, inst, prob.x0, prob.xt))
        if isinstance(res, lp.Infeasible):
            raise NotRobustlyReachable(inst, res.farkas)
        sigma[inst] = res.t
    mhat = max_rate_bound(bms)
    gamma1 = conservative_distance(prob.safety, prob.x0)
    gamma2 = conservative_distance(prob.safety, prob.xt)
    if all(c == 0 for c in v):
        # Born done: the goal ball already contains the start.
        tau = prob.epsilon
    else:
        tau = min(prob.epsilon / 2, gamma1, gamma2) / (mhat * len(bms.modes))
    config = SchedulerConfig(
        v=v,
        epsilon=prob.epsilon,
        mhat=mhat,
        gamma1=gamma1,
        gamma2=gamma2,
        tau=tau,
        sigma=sigma,
    )
    return Scheduler(bms, prob, config)
