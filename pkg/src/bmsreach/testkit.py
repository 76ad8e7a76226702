"""Independent oracles and hardness-construction generators.

The DNF validity reduction turns a 3-literal-per-clause DNF formula into a
reachability problem whose verdict matches validity: an environment mode
picks a truth assignment (the box polytope over {-1,1}^n), clause modes undo
satisfied clauses, correction modes clean up the remaining coordinates.
Truth-table and Fourier-Motzkin oracles provide ground truth for the
decision procedure and the LP engine respectively.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

from .lp import FeasProblem
from .model import Bms, HPolytope, Mode, ReachProblem
from .rational import RVec

_ZERO = Fraction(0)
_ONE = Fraction(1)

# (variable index, polarity); polarity True means the positive literal.
Literal = tuple[int, bool]
Clause = tuple[Literal, Literal, Literal]


@dataclass(frozen=True)
class DnfFormula:
    n: int
    clauses: tuple[Clause, ...]

    def __post_init__(self) -> None:
        if self.n < 3:
            raise ValueError("need at least 3 propositions")
        for clause in self.clauses:
            if len(clause) != 3:
                raise ValueError("clauses must have exactly 3 literals")
            variables = {var for var, _ in clause}
            if len(variables) != 3:
                raise ValueError("clause variables must be distinct")
            if any(var < 0 or var >= self.n for var in variables):
                raise ValueError("literal variable out of range")


def dnf_validity_oracle(f: DnfFormula) -> bool:
    """Exhaustive truth-table evaluation; usable up to ~20 propositions."""
    if f.n > 20:
        raise ValueError("truth-table oracle capped at n <= 20")
    for bits in itertools.product((False, True), repeat=f.n):
        if not any(
            all(bits[var] == pol for var, pol in clause)
            for clause in f.clauses
        ):
            return False
    return True


def dnf_to_bms(f: DnfFormula) -> tuple[Bms, ReachProblem]:
    """The co-NP hardness construction: validity <=> robust reachability.

    Variables are x_1..x_n plus three stage counters y1, y2, y3.  Mode
    count stays below 7m + 2n + 3.  The safety box is loosened to [-2, 2]
    (and [-1, n] for the third counter) so that start and target are
    strictly interior; the verdict only depends on time-vector feasibility,
    which the box does not affect.
    """
    n = f.n
    dim = n + 3

    def rate(x: dict[int, Fraction], y1=_ZERO, y2=_ZERO, y3=_ZERO) -> RVec:
        coords = [x.get(i, _ZERO) for i in range(n)]
        return (*coords, y1, y2, y3)

    modes: list[Mode] = []
    # Environment mode: box over {-1,1}^n with the first counter running.
    box = tuple(
        rate({i: Fraction(s) for i, s in enumerate(signs)}, y1=_ONE)
        for signs in itertools.product((-1, 1), repeat=n)
    )
    modes.append(Mode("env", box))

    # Clause modes: every nonempty subclause of every clause, plus the empty
    # clause, deduplicated.  Rates undo the chosen literals.
    subclauses: set[tuple[Literal, ...]] = {()}
    for clause in f.clauses:
        for size in (1, 2, 3):
            for sub in itertools.combinations(sorted(clause), size):
                subclauses.add(sub)
    for sub in sorted(subclauses):
        x = {var: (-_ONE if pol else _ONE) for var, pol in sub}
        if sub:
            name = "clause:" + ",".join(
                f"{'' if pol else '!'}x{var}" for var, pol in sub
            )
        else:
            name = "clause:empty"
        modes.append(Mode(name, (rate(x, y2=_ONE),)))

    # Correction modes: one per signed coordinate, plus the idle one.
    for i in range(n):
        modes.append(Mode(f"corr:+x{i}", (rate({i: _ONE}, y3=_ONE),)))
        modes.append(Mode(f"corr:-x{i}", (rate({i: -_ONE}, y3=_ONE),)))
    modes.append(Mode("corr:0", (rate({}, y3=_ONE),)))

    bms = Bms(n=dim, modes=tuple(modes))

    rows: list[tuple[RVec, Fraction]] = []
    for c in range(n + 2):
        unit = tuple(_ONE if k == c else _ZERO for k in range(dim))
        rows.append((unit, Fraction(2)))
        rows.append((tuple(-x for x in unit), Fraction(2)))
    clock = tuple(_ONE if k == dim - 1 else _ZERO for k in range(dim))
    rows.append((clock, Fraction(n)))
    rows.append((tuple(-x for x in clock), _ONE))

    prob = ReachProblem(
        x0=(_ZERO,) * dim,
        xt=(*(_ZERO,) * n, _ONE, _ONE, Fraction(n - 3)),
        epsilon=Fraction(1, 8),
        safety=HPolytope(tuple(rows)),
    )
    return bms, prob


def fm_feasibility_oracle(p: FeasProblem, max_vars: int = 8) -> bool:
    """Fourier-Motzkin elimination; independent of the simplex engine."""
    if p.n_vars > max_vars:
        raise ValueError(f"Fourier-Motzkin oracle capped at {max_vars} variables")
    # Normalize everything to <= rows.
    rows: list[tuple[list[Fraction], Fraction]] = []
    for coeffs, rhs in p.eq:
        rows.append(([*coeffs], rhs))
        rows.append(([-c for c in coeffs], -rhs))
    for coeffs, rhs in p.ineq:
        rows.append(([*coeffs], rhs))
    for j in p.nonneg:
        row = [_ZERO] * p.n_vars
        row[j] = -_ONE
        rows.append((row, _ZERO))

    for j in range(p.n_vars):
        lower = []  # rows giving  t_j >= value
        upper = []  # rows giving  t_j <= value
        rest = []
        for coeffs, rhs in rows:
            c = coeffs[j]
            if c > 0:
                upper.append(([x / c for x in coeffs], rhs / c))
            elif c < 0:
                lower.append(([x / -c for x in coeffs], rhs / -c))
            else:
                rest.append((coeffs, rhs))
        rows = rest
        for (lc, lb), (uc, ub) in itertools.product(lower, upper):
            coeffs = [lx + ux for lx, ux in zip(lc, uc)]
            coeffs[j] = _ZERO
            rows.append((coeffs, lb + ub))

    return all(rhs >= 0 for _, rhs in rows)


def random_bms(
    n: int, k_modes: int, max_vertices: int, coeff_bound: int, seed: int
) -> Bms:
    """Deterministic random system with rational coordinates of bounded size."""
    if min(n, k_modes, max_vertices, coeff_bound) < 1:
        raise ValueError("all parameters must be >= 1")
    rng = random.Random(seed)
    modes = []
    for i in range(k_modes):
        count = rng.randint(1, max_vertices)
        vertices = tuple(
            tuple(
                Fraction(
                    rng.randint(-coeff_bound, coeff_bound),
                    rng.randint(1, coeff_bound),
                )
                for _ in range(n)
            )
            for _ in range(count)
        )
        modes.append(Mode(f"m{i}", vertices))
    return Bms(n=n, modes=tuple(modes))
