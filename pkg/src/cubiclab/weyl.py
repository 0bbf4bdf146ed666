"""Weyl differencing: the differenced polynomial G, its bilinear part, and the resulting bound."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .archimedean import minor_arc_sum
from .numtheory import is_prime
from .poly import (
    CubicPolynomial,
    SymmetricCubicTensor,
    bilinear_system,
    coefficient_sum,
    cubic_part,
    sup_norm,
    symmetric_tensor,
)
from .weights import WeightFunction

VARIETY_LIMIT = 10**9


@dataclass(frozen=True)
class DifferencedValue:
    """G(w, x; y) split as sum_i y_i B_i(w; x) + Gamma(w, x).

    B uses the integer tensor of 6 g0, so ``linear`` equals 6 sum_i y_i b_i(w; x) where b is
    built from the symmetric (possibly fractional) coefficients of g0 itself.
    """

    G: int
    linear: int
    Gamma: int


def _shift(a: Sequence[int], b: Sequence[int]) -> list[int]:
    return [int(s) + int(t) for s, t in zip(a, b)]


def differenced(g: CubicPolynomial, w: Sequence[int], x: Sequence[int], y: Sequence[int]) -> int:
    """G(w, x; y) = g(w+x+y) - g(w+y) - g(x+y) + g(y)."""
    wy = _shift(w, y)
    return g(_shift(wy, x)) - g(wy) - g(_shift(x, y)) + g(y)


def difference_form(
    g: CubicPolynomial,
    w: Sequence[int],
    x: Sequence[int],
    y: Sequence[int],
    tensor: SymmetricCubicTensor | None = None,
) -> DifferencedValue:
    n = g.n
    if not (len(w) == len(x) == len(y) == n):
        raise ValueError("dimension mismatch")
    T = tensor if tensor is not None else symmetric_tensor(cubic_part(g))
    B = bilinear_system(T, w, x)
    G = differenced(g, w, x, y)
    lin = sum(int(yi) * bi for yi, bi in zip(y, B))
    Gamma = G - lin
    # Gamma must not move when y moves
    y1 = list(y)
    y1[0] += 1
    G1 = differenced(g, w, x, y1)
    if G1 - sum(int(yi) * bi for yi, bi in zip(y1, B)) != Gamma:
        raise ArithmeticError("linearisation failed: Gamma depends on y")
    return DifferencedValue(G, lin, Gamma)


def fractional_bilinear(g0: CubicPolynomial, w: Sequence[int], x: Sequence[int]) -> list[Fraction]:
    """b_i(w; x) = sum_jk a_ijk w_j x_k with a the symmetric rational coefficients of g0."""
    T = symmetric_tensor(g0)
    return [Fraction(b, 6) for b in bilinear_system(T, w, x)]


def _rank_mod_p(M: np.ndarray, p: int) -> int:
    A = M.copy() % p
    rows, cols = A.shape
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if A[i, c]), None)
        if piv is None:
            continue
        A[[r, piv]] = A[[piv, r]]
        A[r] = A[r] * pow(int(A[r, c]), -1, p) % p
        for i in range(rows):
            if i != r and A[i, c]:
                A[i] = (A[i] - A[i, c] * A[r]) % p
        r += 1
        if r == rows:
            break
    return r


def bilinear_variety_count(g0: CubicPolynomial, p: int, method: str = "rank") -> int:
    """#{(x, y) in F_p^{2n} : B_i(x; y) = 0 for all i}.

    ``rank`` sums p^{n - rank(M_x)} over x, with M_x the matrix of y -> B(x; y) mod p;
    ``enumerate`` tests every pair.
    """
    n = g0.n
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if p ** (2 * n) > VARIETY_LIMIT:
        raise ValueError(f"p^(2n) = {p ** (2 * n)} exceeds {VARIETY_LIMIT}")
    T = symmetric_tensor(g0).as_int64() % p
    xs = np.stack(np.meshgrid(*([np.arange(p, dtype=np.int64)] * n), indexing="ij"), axis=-1).reshape(-1, n)
    # M[x][i, k] = sum_j c_ijk x_j
    Ms = np.einsum("ijk,mj->mik", T, xs) % p
    if method == "rank":
        return sum(p ** (n - _rank_mod_p(M, p)) for M in Ms)
    if method == "enumerate":
        total = 0
        for M in Ms:
            img = (xs @ M.T) % p
            total += int(np.count_nonzero(~img.any(axis=1)))
        return total
    raise ValueError(f"unknown method {method!r}")


def variety_dimension_log(g0: CubicPolynomial, p: int) -> float:
    """log_p of the bilinear variety count."""
    return math.log(bilinear_variety_count(g0, p)) / math.log(p)


@dataclass(frozen=True)
class WeylBoundInput:
    q: int
    z: float
    P: float
    c: int
    epsilon: float = 0.0

    def validate(self, strict: bool = True) -> None:
        if self.c <= 0:
            raise ValueError("coefficient sum c must be positive")
        if self.q < 1 or self.P < 1:
            raise ValueError("need q >= 1 and P >= 1")
        if strict:
            if self.q > self.P**1.5 * (1 + 1e-12):
                raise ValueError("need q <= P^{3/2}")
            if abs(self.z) > (1 + 1e-12) / (self.q * self.P**1.5):
                raise ValueError("need |z| <= q^{-1} P^{-3/2}")


def weyl_parameter_Z(inp: WeylBoundInput) -> float:
    """Z = (1/2) min{1, 1/(12 c q |z| P^2), P/(2q), max{q/(6cP^2), q|z|P}}^{1/2}."""
    inp.validate(strict=False)
    q, z, P, c = inp.q, abs(inp.z), inp.P, inp.c
    second = math.inf if z == 0 else 1.0 / (12 * c * q * z * P * P)
    inner = min(1.0, second, P / (2 * q), max(q / (6 * c * P * P), q * z * P))
    return 0.5 * math.sqrt(inner)


def weyl_bound_rhs(inp: WeylBoundInput, g0: CubicPolynomial, n: int | None = None) -> float:
    """||g0||^{n/8} q^{1-n/8} P^{n+eps} min{1, (|z|P^3)^{-n/8}}."""
    inp.validate(strict=True)
    if n is None:
        n = g0.n
    q, z, P = inp.q, abs(inp.z), inp.P
    factor = 1.0 if z == 0 else min(1.0, (z * P**3) ** (-n / 8))
    return sup_norm(g0) ** (n / 8) * q ** (1 - n / 8) * P ** (n + inp.epsilon) * factor


@dataclass(frozen=True)
class WeylBoundRow:
    q: int
    u: int
    z: float
    P: float
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs


def weyl_bound_report(
    g: CubicPolynomial,
    w: WeightFunction,
    P_values: Sequence[float],
    q_max: int = 12,
    u_values: Sequence[int] = (0, 1),
    z_points: int = 5,
    epsilon: float = 0.25,
) -> list[WeylBoundRow]:
    """|S_u(q; z)| against the differencing bound over q <= min(q_max, P^{3/2}) and sampled z."""
    g0 = cubic_part(g)
    c = coefficient_sum(g0)
    rows = []
    for P in P_values:
        for q in range(1, q_max + 1):
            if q > P**1.5:
                break
            zmax = 1.0 / (q * P**1.5)
            zs = [0.0] + [zmax * k / z_points for k in range(1, z_points + 1)]
            zs = zs + [-z for z in zs[1:]]
            for u in u_values:
                vals = np.abs(minor_arc_sum(u, q, np.array(zs), g, w, P))
                for z, lhs in zip(zs, vals):
                    rhs = weyl_bound_rhs(WeylBoundInput(q, z, P, c, epsilon), g0)
                    rows.append(WeylBoundRow(q, u, z, P, float(lhs), rhs))
    return rows
