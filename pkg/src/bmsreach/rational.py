"""Exact rational scalars and small dense vector helpers.

Every quantity in the toolkit (points, rates, durations, certificates) is a
`fractions.Fraction`; no floating point appears anywhere in a decision or
scheduling path.  Vectors are plain tuples of Fractions.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence, Union

Rat = Fraction
RVec = tuple[Fraction, ...]

RatLike = Union[int, str, Fraction]


def rat(value: RatLike) -> Fraction:
    """Parse a rational given as an int, a Fraction, or a string "p/q"."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as a rational")


def rat_str(x: Fraction) -> str:
    """Canonical text form: bare integer or "p/q" in lowest terms."""
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def vec(values: Iterable[RatLike]) -> RVec:
    return tuple(rat(v) for v in values)


def zeros(n: int) -> RVec:
    return (Fraction(0),) * n


def vadd(a: Sequence[Fraction], b: Sequence[Fraction]) -> RVec:
    return tuple(x + y for x, y in zip(a, b, strict=True))


def vsub(a: Sequence[Fraction], b: Sequence[Fraction]) -> RVec:
    return tuple(x - y for x, y in zip(a, b, strict=True))


def vscale(c: Fraction, a: Sequence[Fraction]) -> RVec:
    return tuple(c * x for x in a)


def dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(a, b, strict=True)), Fraction(0))


def norm1(a: Sequence[Fraction]) -> Fraction:
    return sum((abs(x) for x in a), Fraction(0))


def norminf(a: Sequence[Fraction]) -> Fraction:
    return max((abs(x) for x in a), default=Fraction(0))


def sqnorm(a: Sequence[Fraction]) -> Fraction:
    """Squared Euclidean norm; comparisons against distances stay exact."""
    return sum((x * x for x in a), Fraction(0))


def is_zero(a: Sequence[Fraction]) -> bool:
    return all(x == 0 for x in a)
