"""Applications of the reachability engine: schedulability, stability, and
piecewise-linear path following with geometrically shrinking tolerances.

Schedulability adds a clock variable with uniform rate 1 to every mode and
asks for reachability of "clock = 1" inside a tight box around the start:
staying schedulable for one time unit per round, with per-round tolerance
eps * 2^-i, composes into a non-Zeno hold strategy.  Path following decides
each segment inside a conservative rational corridor around it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .decide import (
    Reachable,
    ReachCertificate,
    Unreachable,
    robust_reach,
)
from .model import Bms, HPolytope, Mode, ReachProblem
from .rational import RVec, dot, norm1, norminf, vsub, zeros
from .sim import EnvStrategy, Trace, run_game

_ZERO = Fraction(0)
_ONE = Fraction(1)


class CorridorError(ValueError):
    """The conservative corridor construction cannot certify its guarantees."""


@dataclass(frozen=True)
class Path:
    waypoints: tuple[RVec, ...]

    def __post_init__(self) -> None:
        if len(self.waypoints) < 2:
            raise ValueError("a path needs at least two waypoints")
        dims = {len(w) for w in self.waypoints}
        if len(dims) != 1:
            raise ValueError("waypoints mix dimensions")
        for a, b in zip(self.waypoints, self.waypoints[1:]):
            if a == b:
                raise ValueError("consecutive waypoints must be distinct")


def sched_transform(bms: Bms, eps: Fraction) -> tuple[Bms, ReachProblem]:
    """Clock-augmented reachability problem deciding schedulability.

    Every vertex gains a final clock coordinate with rate 1; the safety box
    forces 2d|x_i| <= eps on the original coordinates.  The clock coordinate
    gets the bounding rows -1 <= c <= 2 so the safety set is a bounded
    polytope with the start strictly interior.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    d = bms.n
    modes = tuple(
        Mode(m.name, tuple((*v, _ONE) for v in m.vertices))
        for m in bms.modes
    )
    aug = Bms(n=d + 1, modes=modes)
    prob = _hold_problem(aug, zeros(d), eps)
    return aug, prob


def _hold_problem(aug: Bms, center: RVec, eps: Fraction) -> ReachProblem:
    """One hold round on the clock-augmented system, centered at ``center``."""
    d = aug.n - 1
    two_d = Fraction(2 * d)
    rows: list[tuple[RVec, Fraction]] = []
    for i in range(d):
        unit = tuple(two_d if c == i else _ZERO for c in range(d + 1))
        rows.append((unit, eps + two_d * center[i]))
        rows.append((tuple(-x for x in unit), eps - two_d * center[i]))
    clock = tuple(_ONE if c == d else _ZERO for c in range(d + 1))
    rows.append((clock, Fraction(2)))
    rows.append((tuple(-x for x in clock), _ONE))
    return ReachProblem(
        x0=(*center, _ZERO),
        xt=(*center, _ONE),
        epsilon=eps,
        safety=HPolytope(tuple(rows)),
    )


def decide_schedulable(bms: Bms) -> ReachCertificate:
    """Schedulability verdict via the clock augmentation.

    The internal tolerance 1/2 is arbitrary: the verdict depends only on
    time-vector feasibility, which ignores the safety set for interior
    endpoints.
    """
    aug, prob = sched_transform(bms, Fraction(1, 2))
    return robust_reach(aug, prob)


@dataclass(frozen=True)
class HoldRound:
    eps_i: Fraction
    problem: ReachProblem
    trace: Trace

    @property
    def clock_time(self) -> Fraction:
        """Clock coordinate consumed during this round."""
        if not self.trace.steps:
            return _ZERO
        return self.trace.steps[-1].x_after[-1] - self.problem.x0[-1]


@dataclass(frozen=True)
class HoldResult:
    rounds: tuple[HoldRound, ...]

    @property
    def reached_all(self) -> bool:
        return all(r.trace.outcome == "Reached" for r in self.rounds)


def run_hold(
    bms: Bms,
    x0: RVec,
    eps: Fraction,
    rounds: int,
    env: EnvStrategy,
    max_steps: int = 10**6,
) -> HoldResult:
    """Hold near x0 for ``rounds`` consecutive time units.

    Round i runs a clock-augmented game with tolerance eps * 2^-i,
    re-centered on the drift actually accumulated so far; the composed run
    stays within the eps-ball of x0.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    d = bms.n
    modes = tuple(
        Mode(m.name, tuple((*v, _ONE) for v in m.vertices))
        for m in bms.modes
    )
    aug = Bms(n=d + 1, modes=modes)
    center = x0
    done: list[HoldRound] = []
    for i in range(1, rounds + 1):
        eps_i = eps / 2**i
        prob = _hold_problem(aug, center, eps_i)
        trace = run_game(aug, prob, env, max_steps)
        done.append(HoldRound(eps_i=eps_i, problem=prob, trace=trace))
        if trace.outcome != "Reached":
            break
        final = trace.steps[-1].x_after if trace.steps else prob.x0
        center = final[:d]
    return HoldResult(tuple(done))


@dataclass(frozen=True)
class StabilityVerdict:
    stable: bool
    reach: ReachCertificate
    hold: ReachCertificate


def decide_stable(bms: Bms, prob: ReachProblem) -> StabilityVerdict:
    """Stable iff the target is reachable at eps/2 and the system can hold."""
    half = ReachProblem(
        x0=prob.x0, xt=prob.xt, epsilon=prob.epsilon / 2, safety=prob.safety
    )
    reach = robust_reach(bms, half)
    hold = decide_schedulable(bms)
    stable = isinstance(reach, Reachable) and isinstance(hold, Reachable)
    return StabilityVerdict(stable=stable, reach=reach, hold=hold)


def _complement_basis(d: RVec) -> list[RVec]:
    """Rational orthogonal basis of the complement of d (unnormalized
    Gram-Schmidt over the standard basis)."""
    n = len(d)
    basis: list[RVec] = [d]
    out: list[RVec] = []
    for i in range(n):
        v = [_ONE if c == i else _ZERO for c in range(n)]
        for b in basis:
            bb = dot(b, b)
            coef = dot(b, tuple(v)) / bb
            for c in range(n):
                v[c] -= coef * b[c]
        w = tuple(v)
        if any(x != 0 for x in w):
            basis.append(w)
            out.append(w)
        if len(out) == n - 1:
            break
    return out


def _int_sqrt_upper(k: int) -> int:
    """Smallest integer s with s*s >= k."""
    s = 0
    while s * s < k:
        s += 1
    return s


def build_corridor(
    p: RVec, q: RVec, eps: Fraction, safety: HPolytope
) -> HPolytope:
    """Convex tube of width <= eps around the segment p -> q.

    All bounds are conservative rationals (infinity-norm lower bounds on row
    norms, integer upper bound on sqrt(n-1)), so corridor membership provably
    implies squared distance to the segment at most eps^2.  The result is
    validated: it must contain the eps/2 ball around q and both endpoints
    strictly; otherwise CorridorError is raised rather than returning an
    unsound corridor.
    """
    if p == q:
        raise ValueError("segment endpoints must be distinct")
    if eps <= 0:
        raise ValueError("eps must be positive")
    n = len(p)
    d = vsub(q, p)
    rows: list[tuple[RVec, Fraction]] = []
    perp = _complement_basis(d)
    s = Fraction(max(_int_sqrt_upper(len(perp)), 1))
    for w in perp:
        bound = eps * norminf(w) / s
        rows.append((w, dot(w, p) + bound))
        rows.append((tuple(-x for x in w), -dot(w, p) + bound))
    margin = eps * norm1(d)
    rows.append((d, dot(d, p) + dot(d, d) + margin))
    rows.append((tuple(-x for x in d), -dot(d, p) + margin))
    rows.extend(safety.rows)
    corridor = HPolytope(tuple(rows))

    half = eps / 2
    for a, b in corridor.rows:
        if dot(a, q) + half * norm1(a) > b:
            raise CorridorError("eps/2 ball around the goal pokes out")
    if not corridor.strictly_contains(p):
        raise CorridorError("segment start not strictly inside")
    if not corridor.strictly_contains(q):
        raise CorridorError("segment end not strictly inside")
    return corridor


@dataclass(frozen=True)
class SegmentReport:
    index: int
    eps_i: Fraction
    certificate: ReachCertificate
    corridor_used: bool
    trace: Trace | None = None


@dataclass(frozen=True)
class PathReport:
    segments: tuple[SegmentReport, ...]
    followable: bool
    executed: bool
    final_point: RVec | None = None

    @property
    def cumulative_tolerances(self) -> tuple[Fraction, ...]:
        total = _ZERO
        out = []
        for seg in self.segments:
            total += seg.eps_i
            out.append(total)
        return tuple(out)


def follow_path(
    bms: Bms,
    path: Path,
    eps: Fraction,
    safety: HPolytope,
    env: EnvStrategy,
    max_steps: int = 10**6,
) -> PathReport:
    """Decide and (when followable) execute a piecewise-linear path.

    Segment i gets tolerance eps * 2^-i.  Decisions run on the nominal
    segments; execution starts each segment from the point actually achieved
    by the previous one, rebuilding the corridor from there.  Corridor
    construction failures fall back to the global safety set with a flag.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    pairs = list(zip(path.waypoints, path.waypoints[1:]))
    decisions: list[SegmentReport] = []
    followable = True
    for i, (a, b) in enumerate(pairs, start=1):
        eps_i = eps / 2**i
        seg_safety, used = _segment_safety(a, b, eps_i, safety)
        prob = ReachProblem(x0=a, xt=b, epsilon=eps_i, safety=seg_safety)
        cert = robust_reach(bms, prob)
        decisions.append(SegmentReport(
            index=i, eps_i=eps_i, certificate=cert, corridor_used=used
        ))
        if isinstance(cert, Unreachable):
            followable = False
    if not followable:
        return PathReport(tuple(decisions), followable=False, executed=False)

    executed: list[SegmentReport] = []
    current = path.waypoints[0]
    all_reached = True
    for seg, (_, b) in zip(decisions, pairs):
        seg_safety, used = _segment_safety(current, b, seg.eps_i, safety)
        prob = ReachProblem(
            x0=current, xt=b, epsilon=seg.eps_i, safety=seg_safety
        )
        trace = run_game(bms, prob, env, max_steps)
        executed.append(SegmentReport(
            index=seg.index,
            eps_i=seg.eps_i,
            certificate=seg.certificate,
            corridor_used=used,
            trace=trace,
        ))
        if trace.outcome != "Reached":
            all_reached = False
            break
        current = trace.steps[-1].x_after if trace.steps else prob.x0
    executed.extend(decisions[len(executed):])
    return PathReport(
        tuple(executed),
        followable=True,
        executed=all_reached,
        final_point=current if all_reached else None,
    )


def _segment_safety(
    p: RVec, q: RVec, eps: Fraction, safety: HPolytope
) -> tuple[HPolytope, bool]:
    """Corridor for the segment, or the global safety set on CorridorError."""
    try:
        return build_corridor(p, q, eps, safety), True
    except CorridorError:
        return safety, False
