"""Hyperplane slicing: singular-locus dimension mod p, slicing vectors, and the sliced count."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .counting import count_affine_weighted
from .numtheory import gcd_vector, integer_determinant, is_prime, smith_diagonal
from .poly import CubicPolynomial, PolynomialError, cubic_part, gradient_mod_grid, scaled_norm
from .weights import WeightFunction

DEFAULT_PRIMES = (7, 11, 13)
DEFAULT_SEARCH_BOUND = 3
GRID_LIMIT = 10**9
DESK_N = 3
DESK_P = 12


class AmbiguousDimension(ValueError):
    """Point counts at different primes point to different dimensions."""


# ---------------------------------------------------------------- singular locus


def singular_point_count(g0: CubicPolynomial, p: int) -> int:
    """Number of points of P^{n-1}(F_p) where every partial derivative of g0 vanishes."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if p**g0.n > GRID_LIMIT:
        raise ValueError(f"p^n = {p**g0.n} exceeds {GRID_LIMIT}")
    zero = np.ones((p,) * g0.n, dtype=bool)
    for d in gradient_mod_grid(g0, p):
        zero &= np.asarray(d) % p == 0
    zero.flat[0] = False
    return int(np.count_nonzero(zero)) // (p - 1)


def singular_dimension_estimate(g0: CubicPolynomial, primes: Sequence[int] = DEFAULT_PRIMES) -> int:
    """The s with ½ p^s <= #Sing(F_p) <= 4 p^s at every test prime; -1 if all counts are 0."""
    if not g0.is_homogeneous_cubic() and not g0.is_zero():
        raise PolynomialError("need a cubic form")
    primes = list(primes)
    if len(primes) < 3:
        raise ValueError("need at least 3 primes")
    counts = [singular_point_count(g0, p) for p in primes]
    if all(c == 0 for c in counts):
        return -1
    if any(c == 0 for c in counts):
        raise AmbiguousDimension(f"counts {counts} vanish at some primes only")
    fits = [s for s in range(g0.n) if all(p**s / 2 <= c <= 4 * p**s for p, c in zip(primes, counts))]
    if len(fits) != 1:
        raise AmbiguousDimension(f"counts {counts} at primes {primes} fit dimensions {fits}")
    return fits[0]


# ---------------------------------------------------------------- lattice


@dataclass(frozen=True)
class HyperplaneBasis:
    m: tuple[int, ...]
    vectors: tuple[tuple[int, ...], ...]  # e_1..e_{n-1}
    preimage: tuple[int, ...]  # t0 with m . t0 = 1

    @property
    def gram_determinant(self) -> int:
        E = [list(e) for e in self.vectors]
        gram = [[sum(a * b for a, b in zip(u, v)) for v in E] for u in E]
        return integer_determinant(gram) if E else 1

    @property
    def max_norm(self) -> int:
        return max((max(abs(x) for x in e) for e in self.vectors), default=0)

    def completion(self) -> list[list[int]]:
        """The n x n matrix with columns e_1, ..., e_{n-1}, t0 (unimodular)."""
        cols = list(self.vectors) + [self.preimage]
        return [[c[i] for c in cols] for i in range(len(self.m))]


def _check_primitive(m: Sequence[int]) -> tuple[int, ...]:
    m = tuple(int(x) for x in m)
    if not any(m):
        raise ValueError("m must be nonzero")
    if gcd_vector(m) != 1:
        raise ValueError(f"m = {m} is not primitive")
    return m


def _sign_normal(v: list[int]) -> list[int]:
    first = next((x for x in v if x), 0)
    return [-x for x in v] if first < 0 else v


def hyperplane_lattice_basis(m: Sequence[int]) -> HyperplaneBasis:
    """Integer basis of {y : m.y = 0} from a unimodular completion, then size-reduced."""
    m = _check_primitive(m)
    n = len(m)
    row = list(m)
    U = [[int(i == j) for j in range(n)] for i in range(n)]  # columns track the operations

    def colop(dst: int, src: int, k: int) -> None:
        row[dst] -= k * row[src]
        for r in U:
            r[dst] -= k * r[src]

    # Euclid on the entries of m by column operations
    while sum(1 for x in row if x) > 1:
        piv = min((i for i in range(n) if row[i]), key=lambda i: abs(row[i]))
        for j in range(n):
            if j != piv and row[j]:
                colop(j, piv, row[j] // row[piv])
    piv = next(i for i in range(n) if row[i])
    sign = row[piv]  # +-1 since m is primitive
    t0 = [U[i][piv] * sign for i in range(n)]
    basis = [[U[i][j] for i in range(n)] for j in range(n) if j != piv]
    basis = _size_reduce(basis)
    return HyperplaneBasis(m, tuple(tuple(e) for e in basis), tuple(t0))


def _size_reduce(basis: list[list[int]]) -> list[list[int]]:
    """Pairwise nearest-integer reduction until no vector shortens."""

    def dot(a, b):
        return sum(x * y for x, y in zip(a, b))

    changed = True
    while changed:
        changed = False
        for i, j in itertools.permutations(range(len(basis)), 2):
            ej = basis[j]
            k = round(Fraction(dot(basis[i], ej), dot(ej, ej)))
            if k:
                cand = [a - k * b for a, b in zip(basis[i], ej)]
                if dot(cand, cand) < dot(basis[i], basis[i]):
                    basis[i] = cand
                    changed = True
    basis = [_sign_normal(e) for e in basis]
    return sorted(basis, key=lambda e: dot(e, e))


def lattice_index(B: HyperplaneBasis) -> int:
    """Product of the Smith invariants of the completion matrix (1 iff the basis spans the lattice)."""
    return math.prod(smith_diagonal(B.completion()))


# ---------------------------------------------------------------- slicing vector


@dataclass(frozen=True)
class SlicingVector:
    m: tuple[int, ...]
    s_before: int
    s_after: int
    tried: int

    @property
    def norm(self) -> int:
        return max(abs(x) for x in self.m)


def restrict_form(g0: CubicPolynomial, B: HyperplaneBasis) -> CubicPolynomial:
    """g0 composed with u -> sum u_i e_i, a form in n - 1 variables."""
    forms = [([e[i] for e in B.vectors], 0) for i in range(g0.n)]
    return g0.substitute(forms, g0.n - 1)


def candidate_vectors(n: int, M: int):
    """Primitive m with max norm <= M, first nonzero entry positive, by max norm then lex."""
    for r in range(1, M + 1):
        for m in itertools.product(range(-r, r + 1), repeat=n):
            if max(abs(x) for x in m) != r:
                continue
            if next(x for x in m if x) < 0 or gcd_vector(m) != 1:
                continue
            yield m


def find_slicing_vector(
    g0: CubicPolynomial, M: int = DEFAULT_SEARCH_BOUND, primes: Sequence[int] = DEFAULT_PRIMES
) -> SlicingVector:
    """First m (max norm, then lex) whose hyperplane section drops the singular dimension by one."""
    if M < 1:
        raise ValueError("search bound must be >= 1")
    if g0.n < 3:
        raise ValueError("need n >= 3 so the section is still a form in >= 2 variables")
    s = singular_dimension_estimate(g0, primes)
    if s < 0:
        raise ValueError("g0 is nonsingular: nothing to slice")
    tried = 0
    for m in candidate_vectors(g0.n, M):
        tried += 1
        h0 = restrict_form(g0, hyperplane_lattice_basis(m))
        try:
            s_h = singular_dimension_estimate(h0, primes)
        except AmbiguousDimension:
            continue
        if s_h == s - 1:
            return SlicingVector(m, s, s_h, tried)
    raise LookupError(f"no slicing vector with |m| <= {M}")


# ---------------------------------------------------------------- one slice


@dataclass(frozen=True)
class SliceData:
    m: tuple[int, ...]
    k: int
    t: tuple[int, ...]
    basis: HyperplaneBasis
    h: CubicPolynomial
    weight: WeightFunction
    norm_ratio: float  # ||h||_P / max(1, ||g||_P)

    def as_dict(self) -> dict:
        from .poly import format_polynomial

        return {
            "m": list(self.m),
            "k": self.k,
            "t": list(self.t),
            "basis": [list(e) for e in self.basis.vectors],
            "h": format_polynomial(self.h),
            "norm_ratio": self.norm_ratio,
        }


def anchor_point(m: Sequence[int], k: int) -> tuple[int, ...] | None:
    """The t with m.t = k of least max norm (ties broken lexicographically), |t| <= |k| + |m|_1."""
    m = tuple(int(x) for x in m)
    n = len(m)
    for r in range(abs(k) + sum(abs(x) for x in m) + 1):

        @lru_cache(maxsize=None)
        def feasible(i: int, rem: int) -> bool:
            if i == n:
                return rem == 0
            return any(feasible(i + 1, rem - m[i] * x) for x in range(-r, r + 1))

        if not feasible(0, k):
            continue
        t, rem = [], k
        for i in range(n):
            x = next(x for x in range(-r, r + 1) if feasible(i + 1, rem - m[i] * x))
            t.append(x)
            rem -= m[i] * x
        return tuple(t)
    return None


def _composed_weight(w: WeightFunction, t: Sequence[int], B: HyperplaneBasis, P: float) -> WeightFunction:
    E = np.array(B.vectors, dtype=float).T  # n x (n-1)
    shift = np.asarray(t, dtype=float) / P
    ev = w.evaluator
    pinv = np.linalg.pinv(E)
    radius = float(np.abs(pinv).sum(axis=1).max()) * (w.support_radius + float(np.abs(shift).max()))
    return WeightFunction(E.shape[1], lambda u: ev(shift + np.asarray(u, dtype=float) @ E.T), radius * (1 + 1e-9),
                          f"{w.name}@slice")


def slice_polynomial(g: CubicPolynomial, w: WeightFunction, m: Sequence[int], k: int, P: float) -> SliceData | None:
    """h(u) = g(t + sum u_i e_i) and w0(u) = w(t/P + sum u_i e_i); None when m.x = k has no anchor."""
    m = _check_primitive(m)
    if len(m) != g.n:
        raise ValueError("dimension mismatch")
    if g.n < 2:
        raise ValueError("need n >= 2")
    t = anchor_point(m, k)
    if t is None:
        return None
    B = hyperplane_lattice_basis(m)
    forms = [([e[i] for e in B.vectors], t[i]) for i in range(g.n)]
    h = g.substitute(forms, g.n - 1)
    ratio = scaled_norm(h, P) / max(1.0, scaled_norm(g, P))
    return SliceData(m, k, t, B, h, _composed_weight(w, t, B, P), ratio)


def lattice_coordinates(x: Sequence[int], data: SliceData) -> tuple[int, ...]:
    """lambda with x = t + sum lambda_i e_i (x must lie on the level m.x = k)."""
    n = len(x)
    A = [[Fraction(v) for v in row] for row in data.basis.completion()]
    b = [Fraction(int(a) - ti) for a, ti in zip(x, data.t)]
    sol = _solve(A, b)
    if sol[-1] != 0 or any(s.denominator != 1 for s in sol):
        raise ValueError(f"{tuple(x)} is not on the level {data.k}")
    return tuple(int(s) for s in sol[: n - 1])


def _solve(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    n = len(A)
    M = [row[:] + [rhs] for row, rhs in zip(A, b)]
    for c in range(n):
        piv = next(r for r in range(c, n) if M[r][c] != 0)
        M[c], M[piv] = M[piv], M[c]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c] / M[c][c]
                M[r] = [a - f * v for a, v in zip(M[r], M[c])]
    return [M[i][n] / M[i][i] for i in range(n)]


def slice_levels(w: WeightFunction, P: float, m: Sequence[int]) -> range:
    K = int(math.floor(sum(abs(x) for x in m) * w.support_radius * P + 1e-9))
    return range(-K, K + 1)


def verify_slice_identity(g: CubicPolynomial, w: WeightFunction, P: float, m: Sequence[int], strict: bool = True) -> float:
    """|N_w(g; P) - sum_k N_{w0}(h_k; P)| over every level k the support can reach."""
    if strict and (g.n > DESK_N or P > DESK_P):
        raise ValueError(f"slice verification is limited to n <= {DESK_N}, P <= {DESK_P}")
    lhs = count_affine_weighted(g, w, P)
    parts = []
    for k in slice_levels(w, P, m):
        data = slice_polynomial(g, w, m, k, P)
        if data is not None:
            parts.append(count_affine_weighted(data.h, data.weight, P))
    return abs(lhs - math.fsum(parts))


def slice_dimension_drop(g0: CubicPolynomial, m: Sequence[int], primes: Sequence[int] = DEFAULT_PRIMES) -> tuple[int, int]:
    """(s(g0), s(h0)) for the section by m^perp."""
    g0 = cubic_part(g0)
    h0 = restrict_form(g0, hyperplane_lattice_basis(m))
    return singular_dimension_estimate(g0, primes), singular_dimension_estimate(h0, primes)
