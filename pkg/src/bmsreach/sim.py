"""Scheduler-vs-environment game loop, environment strategies, trace checks.

Environments answer each proposed mode with convex coefficients theta over
that mode's vertices; membership in the rate polytope is then structural and
the hot loop needs no decomposition LP.  Traces record every step exactly and
can be re-verified (and the scheduler re-played) after the fact.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Protocol, Sequence

from . import scheduler as sched
from .model import Bms, CmsInstance, Mode, ReachProblem
from .rational import RVec, sqnorm, vadd, vscale, vsub, zeros

REACHED = "Reached"
NOT_ROBUSTLY_REACHABLE = "NotRobustlyReachable"
STEP_LIMIT = "StepLimit"
CONTRACT_VIOLATION = "ContractViolation"

# Dyadic granularity of RandomMix draws; keeps coordinate denominators bounded.
_MIX_DENOM = 1 << 16


class EnvSession(Protocol):
    def choose(self, bms: Bms, prob: ReachProblem, mode: int, x: RVec,
               tau: Fraction) -> tuple[Fraction, ...]: ...


class EnvStrategy(Protocol):
    def session(self) -> EnvSession: ...


@dataclass(frozen=True)
class FixedInstance:
    """Always plays the instance's chosen vertex (theta = unit vector)."""

    inst: CmsInstance

    def session(self) -> "FixedInstance":
        return self

    def choose(self, bms: Bms, prob: ReachProblem, mode: int, x: RVec,
               tau: Fraction) -> tuple[Fraction, ...]:
        k = len(bms.modes[mode].vertices)
        j = self.inst[mode]
        return tuple(Fraction(1 if c == j else 0) for c in range(k))


@dataclass(frozen=True)
class RandomMix:
    """Per step draws dyadic convex coefficients from a seeded PRNG."""

    seed: int

    def session(self) -> "_RandomMixSession":
        return _RandomMixSession(random.Random(self.seed))


class _RandomMixSession:
    def __init__(self, rng: random.Random):
        self._rng = rng

    def choose(self, bms: Bms, prob: ReachProblem, mode: int, x: RVec,
               tau: Fraction) -> tuple[Fraction, ...]:
        k = len(bms.modes[mode].vertices)
        if k == 1:
            return (Fraction(1),)
        cuts = sorted(self._rng.randrange(_MIX_DENOM + 1) for _ in range(k - 1))
        bounds = [0, *cuts, _MIX_DENOM]
        return tuple(
            Fraction(bounds[c + 1] - bounds[c], _MIX_DENOM) for c in range(k)
        )


@dataclass(frozen=True)
class GreedyAdversary:
    """Plays the vertex that leaves the point farthest from the target."""

    def session(self) -> "GreedyAdversary":
        return self

    def choose(self, bms: Bms, prob: ReachProblem, mode: int, x: RVec,
               tau: Fraction) -> tuple[Fraction, ...]:
        j = greedy_adversary_move(bms, prob.xt, x, mode, tau)
        k = len(bms.modes[mode].vertices)
        return tuple(Fraction(1 if c == j else 0) for c in range(k))


class ReplayExhausted(Exception):
    pass


@dataclass(frozen=True)
class Replay:
    """Replays a recorded move list; mismatch or exhaustion ends the game."""

    moves: tuple[tuple[int, tuple[Fraction, ...]], ...]

    def session(self) -> "_ReplaySession":
        return _ReplaySession(self.moves)


class _ReplaySession:
    def __init__(self, moves: Sequence[tuple[int, tuple[Fraction, ...]]]):
        self._moves = list(moves)
        self._i = 0

    def choose(self, bms: Bms, prob: ReachProblem, mode: int, x: RVec,
               tau: Fraction) -> tuple[Fraction, ...]:
        if self._i >= len(self._moves):
            raise ReplayExhausted("replay has no more moves")
        rec_mode, theta = self._moves[self._i]
        self._i += 1
        if rec_mode != mode:
            raise ReplayExhausted(
                f"replay move {self._i} is for mode {rec_mode}, not {mode}"
            )
        return theta


def greedy_adversary_move(
    bms: Bms, xt: RVec, x: RVec, mode: int, tau: Fraction
) -> int:
    """Index of the locally most obstructive vertex (argmax of resulting
    squared distance to xt, ties to the lowest index)."""
    vertices = bms.modes[mode].vertices
    best_j = 0
    best_d = None
    for j, r in enumerate(vertices):
        d = sqnorm(vsub(vadd(x, vscale(tau, r)), xt))
        if best_d is None or d > best_d:
            best_d, best_j = d, j
    return best_j


@dataclass(frozen=True)
class StepRecord:
    step: int
    mode: int
    theta: tuple[Fraction, ...]
    duration: Fraction
    x_before: RVec
    x_after: RVec
    lam: Fraction
    mode_contributions: tuple[Fraction, ...]


@dataclass(frozen=True)
class Trace:
    steps: tuple[StepRecord, ...]
    outcome: str
    witness: CmsInstance | None = None
    hyperplane: RVec | None = None
    detail: str = ""


def run_game(
    bms: Bms, prob: ReachProblem, env: EnvStrategy, max_steps: int = 10**6
) -> Trace:
    """Alternate propose/observe against the environment until an outcome."""
    if max_steps <= 0:
        raise ValueError("max_steps must be positive")
    try:
        s = sched.init(bms, prob)
    except sched.NotRobustlyReachable as e:
        return Trace((), NOT_ROBUSTLY_REACHABLE,
                     witness=e.witness, hyperplane=e.hyperplane)
    except sched.InvalidProblem as e:
        return Trace((), CONTRACT_VIOLATION, detail=str(e))
    session = env.session()
    steps: list[StepRecord] = []
    while len(steps) < max_steps:
        proposal = s.propose()
        if proposal is None:
            return Trace(tuple(steps), REACHED)
        mode, tau = proposal
        x_before = s.x
        try:
            theta = session.choose(bms, prob, mode, s.x, tau)
            s.observe(mode, theta)
        except (sched.ContractViolation, ReplayExhausted) as e:
            return Trace(tuple(steps), CONTRACT_VIOLATION, detail=str(e))
        steps.append(StepRecord(
            step=len(steps),
            mode=mode,
            theta=tuple(theta),
            duration=tau,
            x_before=x_before,
            x_after=s.x,
            lam=s.P.lam,
            mode_contributions=tuple(
                s.P.mode_contribution(i) for i in range(len(bms.modes))
            ),
        ))
    if s.done:
        return Trace(tuple(steps), REACHED)
    return Trace(tuple(steps), STEP_LIMIT)


@dataclass(frozen=True)
class TraceReport:
    violations: tuple[str, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return not self.violations


def check_trace(trace: Trace, bms: Bms, prob: ReachProblem) -> TraceReport:
    """Independent re-verification of a recorded game.

    Checks strict safety at every visited point, exact step chaining, theta
    validity, the goal-ball postcondition for Reached traces, and replays the
    scheduler to confirm that the recorded mode choices are the ones the
    deterministic strategy makes.
    """
    bad: list[str] = []
    if trace.outcome == NOT_ROBUSTLY_REACHABLE:
        if not trace.steps:
            return TraceReport(())
        bad.append("refused trace has steps")
        return TraceReport(tuple(bad))

    prev = prob.x0
    for rec in trace.steps:
        if rec.x_before != prev:
            bad.append(f"step {rec.step}: chaining broken (x_before)")
        vertices = bms.modes[rec.mode].vertices
        if len(rec.theta) != len(vertices):
            bad.append(f"step {rec.step}: theta arity mismatch")
            break
        if any(th < 0 for th in rec.theta) or sum(rec.theta) != 1:
            bad.append(f"step {rec.step}: theta not convex")
        rate = zeros(bms.n)
        for th, vtx in zip(rec.theta, vertices, strict=True):
            rate = vadd(rate, vscale(th, vtx))
        expected = vadd(rec.x_before, vscale(rec.duration, rate))
        if rec.x_after != expected:
            bad.append(f"step {rec.step}: chaining broken (x_after)")
        if not prob.safety.strictly_contains(rec.x_after):
            bad.append(f"step {rec.step}: point leaves the safety interior")
        prev = rec.x_after

    if trace.outcome == REACHED:
        final = trace.steps[-1].x_after if trace.steps else prob.x0
        if sqnorm(vsub(final, prob.xt)) > prob.epsilon**2:
            bad.append("outcome Reached but final point outside goal ball")

    if not bad:
        bad.extend(_replay_scheduler(trace, bms, prob))
    return TraceReport(tuple(bad))


def _replay_scheduler(trace: Trace, bms: Bms, prob: ReachProblem) -> list[str]:
    try:
        s = sched.init(bms, prob)
    except sched.InitError as e:
        return [f"scheduler replay failed to initialize: {e}"]
    for rec in trace.steps:
        if rec.duration != s.config.tau:
            return [f"step {rec.step}: duration differs from tau"]
        proposal = s.propose()
        if proposal is None:
            return [f"step {rec.step}: scheduler was already done"]
        mode, _ = proposal
        if mode != rec.mode:
            return [f"step {rec.step}: recorded mode {rec.mode}, replay chose {mode}"]
        s.observe(mode, rec.theta)
        if s.x != rec.x_after or s.P.lam != rec.lam:
            return [f"step {rec.step}: replay state diverged"]
    return []
