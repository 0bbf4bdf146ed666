"""The factorisation q = b1 b2^2 c^2 d and dyadic counts of moduli by their parts."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from .numtheory import (
    divisors,
    factorize,
    factorize_with_table,
    is_square_full,
    num_divisors,
    smallest_prime_factor_table,
)

CENSUS_BUDGET = 10**7


@dataclass(frozen=True)
class QDecomposition:
    q: int
    b1: int
    b2: int
    c: int
    d: int
    d0: int

    @property
    def b(self) -> int:
        return self.b1 * self.b2**2

    def as_row(self) -> tuple[int, ...]:
        return (self.q, self.b1, self.b2, self.c, self.d, self.d0)

    def check(self) -> list[str]:
        """Names of violated invariants (empty when all hold)."""
        bad = []
        if self.b1 * self.b2**2 * self.c**2 * self.d != self.q:
            bad.append("reconstruction")
        if math.gcd(self.b, self.c**2 * self.d) != 1:
            bad.append("coprime")
        if self.c % self.d:
            bad.append("d|c")
        if self.d % self.d0 or not is_square_full(self.c // (self.d * self.d0)):
            bad.append("square-full")
        elif any(is_square_full(self.c // (self.d * e)) for e in divisors(self.d0) if e < self.d0 and self.d % e == 0):
            bad.append("d0-minimal")
        return bad


def _from_factorization(q: int, fac: dict[int, int]) -> QDecomposition:
    b1 = b2 = c = d = d0 = 1
    for p, e in fac.items():
        if e == 1:
            b1 *= p
        elif e == 2:
            b2 *= p
        elif e % 2 == 0:
            c *= p ** (e // 2)
        else:
            d *= p
            c *= p ** ((e - 1) // 2)
            # ord_p(c/d) = (e - 3)/2 equals 1 exactly when e = 5
            if e == 5:
                d0 *= p
    return QDecomposition(q, b1, b2, c, d, d0)


def decompose(q: int) -> QDecomposition:
    if q < 1:
        raise ValueError("q must be >= 1")
    return _from_factorization(q, factorize(q))


def decompose_range(limit: int) -> list[QDecomposition]:
    """decompose(q) for q = 1..limit using a smallest-prime-factor sieve."""
    spf = smallest_prime_factor_table(limit)
    return [_from_factorization(q, factorize_with_table(q, spf)) for q in range(1, limit + 1)]


def minimal_d0(c: int, d: int) -> int:
    """Smallest divisor e of d with c/(d e) square-full (independent of the closed form)."""
    for e in divisors(d):
        if (c // d) % e == 0 and is_square_full(c // (d * e)):
            return e
    raise ValueError("no admissible d0")


def dyadic_index(x: int) -> Fraction:
    """The lower endpoint R in {1/2, 1, 2, 4, ...} with R < x <= 2R."""
    if x < 1:
        raise ValueError("x must be >= 1")
    return Fraction(1, 2) if x == 1 else Fraction(1 << ((x - 1).bit_length() - 1))


@dataclass(frozen=True)
class CensusResult:
    count: int
    bound_ratio: float


def _in_box(x: int, R, span) -> bool:
    return R < x <= span * R


def dyadic_census(R, R0, R1, R2, R3, spans: tuple = (2, 2, 2, 2, 2)) -> CensusResult:
    """Count q = b1 b2^2 c^2 d with R < q <= 2R, R0 < b1 <= 2R0, ..., R3 < d <= 2R3."""
    lows = [Fraction(v) for v in (R, R0, R1, R2, R3)]
    if any(v < Fraction(1, 2) for v in lows):
        raise ValueError("dyadic endpoints must be >= 1/2")
    lo = int(math.floor(lows[0])) + 1
    hi = int(math.floor(spans[0] * lows[0]))
    if hi - lo > CENSUS_BUDGET:
        raise ValueError("census budget exceeded")
    count = 0
    for q in range(lo, hi + 1):
        D = decompose(q)
        parts = (D.b1, D.b2, D.c, D.d)
        if all(_in_box(x, L, s) for x, L, s in zip(parts, lows[1:], spans[1:])):
            count += 1
    denom = float(lows[1] * lows[2]) * math.sqrt(float(lows[3] * lows[4]))
    return CensusResult(count, count / denom)


def census_sweep(max_q: int) -> dict[tuple, int]:
    """Counts for every dyadic box (R, R0, R1, R2, R3) with 2R <= max_q, by binning each q once."""
    boxes: Counter = Counter()
    top = Fraction(max_q, 2)
    for D in decompose_range(max_q):
        R = dyadic_index(D.q)
        if R > top or 2 * R > max_q:
            continue
        key = (R, dyadic_index(D.b1), dyadic_index(D.b2), dyadic_index(D.c), dyadic_index(D.d))
        boxes[key] += 1
    return dict(boxes)


def census_max_ratio(max_q: int) -> tuple[float, tuple]:
    best, arg = 0.0, ()
    for key, cnt in census_sweep(max_q).items():
        _, R0, R1, R2, R3 = key
        ratio = cnt / (float(R0 * R1) * math.sqrt(float(R2 * R3)))
        if ratio > best:
            best, arg = ratio, key
    return best, arg


def gcd_sum(B: int, N: int) -> tuple[int, Fraction]:
    """(sum_{b <= B} gcd(b, N), that sum / (tau(N) B))."""
    if B < 1 or N < 1:
        raise ValueError("B and N must be >= 1")
    total = sum(math.gcd(b, N) for b in range(1, B + 1))
    return total, Fraction(total, num_divisors(N) * B)
