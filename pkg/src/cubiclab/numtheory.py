"""Small exact number-theory helpers shared across the package."""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

FACTOR_LIMIT = 10**12


def egcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        k, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - k * x1
        y0, y1 = y1, y0 - k * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


def inverse_mod(a: int, q: int) -> int:
    if q == 1:
        return 0
    return pow(a % q, -1, q)


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def primes_up_to(limit: int) -> list[int]:
    if limit < 2:
        return []
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return [int(p) for p in np.flatnonzero(sieve)]


def factorize(q: int) -> dict[int, int]:
    """Prime factorization by trial division (q <= 10^12)."""
    if q < 1:
        raise ValueError(f"cannot factor {q}")
    if q > FACTOR_LIMIT:
        raise ValueError(f"{q} exceeds the trial-division cap {FACTOR_LIMIT}")
    out: dict[int, int] = {}
    for p in (2, 3):
        while q % p == 0:
            out[p] = out.get(p, 0) + 1
            q //= p
    f = 5
    step = 2
    while f * f <= q:
        while q % f == 0:
            out[f] = out.get(f, 0) + 1
            q //= f
        f += step
        step = 6 - step
    if q > 1:
        out[q] = out.get(q, 0) + 1
    return out


def smallest_prime_factor_table(limit: int) -> np.ndarray:
    spf = np.zeros(limit + 1, dtype=np.int64)
    for p in range(2, limit + 1):
        if spf[p] == 0:
            block = spf[p::p]
            block[block == 0] = p
    return spf


def factorize_with_table(q: int, spf: np.ndarray) -> dict[int, int]:
    out: dict[int, int] = {}
    while q > 1:
        p = int(spf[q])
        out[p] = out.get(p, 0) + 1
        q //= p
    return out


def euler_phi(q: int) -> int:
    result = q
    for p in factorize(q):
        result -= result // p
    return result


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n).items():
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def num_divisors(n: int) -> int:
    return math.prod(e + 1 for e in factorize(n).values())


def mobius(n: int) -> int:
    fac = factorize(n)
    if any(e > 1 for e in fac.values()):
        return 0
    return -1 if len(fac) % 2 else 1


def is_squarefree(n: int) -> bool:
    return all(e == 1 for e in factorize(n).values())


def is_square_full(n: int) -> bool:
    """True when every prime dividing n does so at least twice (1 included)."""
    return all(e >= 2 for e in factorize(n).values())


def units_mod(q: int) -> list[int]:
    """Residues a in [1, q] with gcd(a, q) = 1 (a = 1 when q = 1)."""
    return [a for a in range(1, q + 1) if math.gcd(a, q) == 1]


@lru_cache(maxsize=256)
def roots_of_unity(q: int) -> np.ndarray:
    """Table of e_q(k) for k = 0..q-1."""
    k = np.arange(q)
    return np.exp(2j * np.pi * k / q)


def _poly_divmod(num: list[int], den: list[int]) -> tuple[list[int], list[int]]:
    """Integer polynomial division by a monic divisor; coefficient lists are low degree first."""
    num = list(num)
    dd = len(den) - 1
    quot = [0] * max(1, len(num) - dd)
    for i in range(len(num) - 1, dd - 1, -1):
        c = num[i]
        if c:
            quot[i - dd] = c
            for j in range(dd + 1):
                num[i - dd + j] -= c * den[j]
    return quot, num[:dd] if dd else []


@lru_cache(maxsize=256)
def cyclotomic(q: int) -> tuple[int, ...]:
    """Coefficients of the q-th cyclotomic polynomial, low degree first."""
    if q < 1:
        raise ValueError("q must be >= 1")
    num = [-1] + [0] * (q - 1) + [1]
    for d in divisors(q):
        if d < q:
            num, _ = _poly_divmod(num, list(cyclotomic(d)))
    return tuple(num)


def reduce_cyclotomic(c: Sequence[int], q: int) -> list[int]:
    """Remainder of sum c_j x^j modulo the q-th cyclotomic polynomial (exact)."""
    _, rem = _poly_divmod([int(x) for x in c], list(cyclotomic(q)))
    return rem


def eval_root_polynomial(c: Sequence[int], q: int) -> complex:
    """sum_j c_j e_q(j), reduced exactly first so vanishing sums come out as 0."""
    rem = reduce_cyclotomic(c, q)
    if not any(rem):
        return 0j
    return complex(np.asarray(rem, dtype=float) @ roots_of_unity(q)[: len(rem)])


def gcd_vector(v: Iterable[int]) -> int:
    g = 0
    for x in v:
        g = math.gcd(g, int(x))
    return g


def integer_cube_root(n: int) -> int | None:
    """Exact integer cube root of n, or None if n is not a perfect cube."""
    if n == 0:
        return 0
    s = -1 if n < 0 else 1
    m = abs(n)
    r = round(m ** (1.0 / 3.0))
    for c in (r - 1, r, r + 1):
        if c >= 0 and c * c * c == m:
            return s * c
    # large inputs: integer Newton refinement
    lo, hi = 0, 1 << ((m.bit_length() + 2) // 3 + 1)
    while lo < hi:
        mid = (lo + hi) // 2
        if mid**3 < m:
            lo = mid + 1
        else:
            hi = mid
    return s * lo if lo**3 == m else None


def smith_diagonal(matrix: Sequence[Sequence[int]]) -> list[int]:
    """Diagonal of the Smith normal form of an integer matrix (nonnegative entries)."""
    a = [list(map(int, row)) for row in matrix]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    diag: list[int] = []
    t = 0
    while t < min(rows, cols):
        pivot = None
        for i in range(t, rows):
            for j in range(t, cols):
                if a[i][j] and (pivot is None or abs(a[i][j]) < abs(a[pivot[0]][pivot[1]])):
                    pivot = (i, j)
        if pivot is None:
            break
        i, j = pivot
        a[t], a[i] = a[i], a[t]
        for row in a:
            row[t], row[j] = row[j], row[t]
        done = False
        while not done:
            done = True
            p = a[t][t]
            for i in range(t + 1, rows):
                if a[i][t]:
                    k = a[i][t] // p
                    a[i] = [x - k * y for x, y in zip(a[i], a[t])]
                    if a[i][t]:
                        a[t], a[i] = a[i], a[t]
                        done = False
                        break
            if not done:
                continue
            p = a[t][t]
            for j in range(t + 1, cols):
                if a[t][j]:
                    k = a[t][j] // p
                    for row in a:
                        row[j] -= k * row[t]
                    if a[t][j]:
                        for row in a:
                            row[t], row[j] = row[j], row[t]
                        done = False
                        break
            if not done:
                continue
            p = a[t][t]
            bad = next(
                ((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols) if a[i][j] % p),
                None,
            )
            if bad is not None:
                a[t] = [x + y for x, y in zip(a[t], a[bad[0]])]
                done = False
        diag.append(abs(a[t][t]))
        t += 1
    return diag


def integer_determinant(matrix: Sequence[Sequence[int]]) -> int:
    """Exact determinant via fraction-free Bareiss elimination."""
    a = [list(map(int, row)) for row in matrix]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k]), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]
