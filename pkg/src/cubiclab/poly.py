"""Integer polynomials of degree at most three in n variables.

Polynomials are immutable mappings from exponent tuples to nonzero integer
coefficients. Everything here is exact; numpy paths are used only when a
coefficient/size bound certifies that int64 cannot overflow.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .numtheory import primes_up_to

Exponent = tuple[int, ...]

INT64_SAFE = 2**62


class PolynomialError(ValueError):
    pass


class DegreeTooHigh(PolynomialError):
    pass


def _grlex_key(exps: Exponent) -> tuple:
    # graded lex: higher total degree first, then lexicographically larger exponents first
    return (-sum(exps), tuple(-e for e in exps))


@dataclass(frozen=True)
class CubicPolynomial:
    n: int
    terms: tuple[tuple[Exponent, int], ...] = field(default=())

    def __post_init__(self) -> None:
        if self.n < 1:
            raise PolynomialError("need at least one variable")
        for exps, c in self.terms:
            if len(exps) != self.n:
                raise PolynomialError(f"exponent {exps} has wrong length for n={self.n}")
            if sum(exps) > 3:
                raise DegreeTooHigh(f"monomial {exps} has degree {sum(exps)} > 3")
            if c == 0:
                raise PolynomialError("stored coefficients must be nonzero")

    @classmethod
    def from_dict(cls, n: int, coeffs: Mapping[Exponent, int]) -> "CubicPolynomial":
        clean = {tuple(int(e) for e in k): int(v) for k, v in coeffs.items() if int(v) != 0}
        for k in clean:
            if len(k) != n:
                raise PolynomialError(f"exponent {k} has wrong length for n={n}")
            if any(e < 0 for e in k):
                raise PolynomialError(f"negative exponent in {k}")
            if sum(k) > 3:
                raise DegreeTooHigh(f"monomial {k} has degree {sum(k)} > 3")
        return cls(n, tuple(sorted(clean.items(), key=lambda kv: _grlex_key(kv[0]))))

    @classmethod
    def zero(cls, n: int) -> "CubicPolynomial":
        return cls(n, ())

    @classmethod
    def parse(cls, text: str, n: int) -> "CubicPolynomial":
        return parse_polynomial(text, n)

    @classmethod
    def fermat(cls, n: int, k: int | None = None) -> "CubicPolynomial":
        """x1^3 + ... + xk^3 viewed in n variables (k defaults to n)."""
        k = n if k is None else k
        return cls.from_dict(n, {tuple(3 if j == i else 0 for j in range(n)): 1 for i in range(k)})

    # ---- basic structure -------------------------------------------------
    def as_dict(self) -> dict[Exponent, int]:
        return dict(self.terms)

    @property
    def degree(self) -> int:
        return max((sum(e) for e, _ in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def is_homogeneous_cubic(self) -> bool:
        return all(sum(e) == 3 for e, _ in self.terms)

    def homogeneous_part(self, d: int) -> "CubicPolynomial":
        return CubicPolynomial(self.n, tuple((e, c) for e, c in self.terms if sum(e) == d))

    def __str__(self) -> str:
        return format_polynomial(self)

    # ---- arithmetic ------------------------------------------------------
    def __add__(self, other: "CubicPolynomial") -> "CubicPolynomial":
        out = self.as_dict()
        for e, c in other.terms:
            out[e] = out.get(e, 0) + c
        return CubicPolynomial.from_dict(self.n, out)

    def __neg__(self) -> "CubicPolynomial":
        return CubicPolynomial(self.n, tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other: "CubicPolynomial") -> "CubicPolynomial":
        return self + (-other)

    def scale(self, k: int) -> "CubicPolynomial":
        return CubicPolynomial.from_dict(self.n, {e: k * c for e, c in self.terms})

    def permute(self, perm: Sequence[int]) -> "CubicPolynomial":
        """Relabel variables: new variable i is old variable perm[i]."""
        return CubicPolynomial.from_dict(
            self.n, {tuple(e[perm[i]] for i in range(self.n)): c for e, c in self.terms}
        )

    def add_constant(self, k: int) -> "CubicPolynomial":
        return self + CubicPolynomial.from_dict(self.n, {(0,) * self.n: k})

    # ---- evaluation ------------------------------------------------------
    def __call__(self, x: Sequence[int]) -> int:
        return self.evaluate(x)

    def evaluate(self, x: Sequence) -> int:
        if len(x) != self.n:
            raise PolynomialError(f"point has dimension {len(x)}, expected {self.n}")
        total = 0
        for e, c in self.terms:
            term = c
            for xi, ei in zip(x, e):
                if ei:
                    term *= xi**ei
            total += term
        return total

    def evaluate_rational(self, x: Sequence[Fraction]) -> Fraction:
        return Fraction(self.evaluate([Fraction(v) for v in x]))

    def magnitude_bound(self, radius: float) -> float:
        """Interval bound of |g| on the box [-radius, radius]^n."""
        return sum(abs(c) * radius ** sum(e) for e, c in self.terms)

    def evaluate_grid(self, coords: Sequence[np.ndarray]) -> np.ndarray:
        """Exact values on a broadcastable set of integer coordinate arrays.

        Uses int64 when the interval bound certifies no overflow, object arrays otherwise.
        """
        if len(coords) != self.n:
            raise PolynomialError("coordinate count mismatch")
        radius = max((float(np.max(np.abs(c))) if np.size(c) else 0.0) for c in coords)
        safe = self.magnitude_bound(max(radius, 1.0)) < INT64_SAFE
        dtype = np.int64 if safe else object
        arrs = [np.asarray(c).astype(dtype) for c in coords]
        shape = np.broadcast_shapes(*(a.shape for a in arrs))
        total = np.zeros(shape, dtype=dtype)
        for e, c in self.terms:
            term = np.full(shape, c, dtype=dtype)
            for a, ei in zip(arrs, e):
                if ei:
                    term = term * a**ei
            total = total + term
        return total

    def evaluate_mod_grid(self, q: int) -> np.ndarray:
        """g(y) mod q for every y in (Z/qZ)^n, as an n-dimensional int64 array."""
        if q**self.n > 2 * 10**8:
            raise PolynomialError(f"grid (Z/{q})^{self.n} too large")
        y = np.arange(q, dtype=np.int64)
        powers = [np.ones(q, dtype=np.int64), y % q, (y * y) % q, (y * y % q) * y % q]
        total = np.zeros((q,) * self.n, dtype=np.int64)
        for e, c in self.terms:
            term = np.array(c % q, dtype=np.int64)
            for axis, ei in enumerate(e):
                if ei:
                    shape = [1] * self.n
                    shape[axis] = q
                    term = (term * powers[ei].reshape(shape)) % q
            total = (total + term) % q
        return np.broadcast_to(total, (q,) * self.n) % q

    # ---- calculus --------------------------------------------------------
    def partial(self, i: int) -> "CubicPolynomial":
        out: dict[Exponent, int] = {}
        for e, c in self.terms:
            if e[i]:
                f = list(e)
                f[i] -= 1
                out[tuple(f)] = out.get(tuple(f), 0) + c * e[i]
        return CubicPolynomial.from_dict(self.n, out)

    def gradient(self) -> list["CubicPolynomial"]:
        return [self.partial(i) for i in range(self.n)]

    def substitute(self, forms: Sequence[tuple[Sequence[int], int]], m: int) -> "CubicPolynomial":
        """Compose with an affine map: x_i = forms[i][0] . u + forms[i][1], u in Z^m."""
        if len(forms) != self.n:
            raise PolynomialError("need one affine form per variable")
        lin = []
        for coeffs, const in forms:
            d: dict[Exponent, int] = {}
            for j, a in enumerate(coeffs):
                if a:
                    d[tuple(1 if k == j else 0 for k in range(m))] = int(a)
            if const:
                d[(0,) * m] = d.get((0,) * m, 0) + int(const)
            lin.append(d)
        out: dict[Exponent, int] = {}
        for e, c in self.terms:
            prod: dict[Exponent, int] = {(0,) * m: c}
            for i, ei in enumerate(e):
                for _ in range(ei):
                    prod = _mul(prod, lin[i])
            for k, v in prod.items():
                out[k] = out.get(k, 0) + v
        return CubicPolynomial.from_dict(m, out)


def _mul(a: Mapping[Exponent, int], b: Mapping[Exponent, int]) -> dict[Exponent, int]:
    out: dict[Exponent, int] = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, 0) + ca * cb
    return {k: v for k, v in out.items() if v}


# ---- text format -----------------------------------------------------------

_TERM_SPLIT = re.compile(r"\s*([+-])\s*")
_FACTOR = re.compile(r"^(?:(\d+)|x(\d+)(?:\^(\d+))?)$")


def parse_polynomial(text: str, n: int) -> CubicPolynomial:
    """Parse e.g. ``"x1^3 - 2*x1*x2^2 + 5"`` into a polynomial in x1..xn."""
    s = text.strip()
    if not s:
        raise PolynomialError("empty polynomial text")
    if s[0] not in "+-":
        s = "+" + s
    parts = _TERM_SPLIT.split(s)
    # parts: ['', sign, term, sign, term, ...]
    if parts[0].strip():
        raise PolynomialError(f"syntax error near {parts[0]!r}")
    out: dict[Exponent, int] = {}
    for sign, body in zip(parts[1::2], parts[2::2]):
        body = body.strip()
        if not body:
            raise PolynomialError(f"syntax error: dangling {sign!r}")
        coeff = -1 if sign == "-" else 1
        exps = [0] * n
        for factor in body.split("*"):
            factor = factor.strip()
            m = _FACTOR.match(factor)
            if m is None:
                raise PolynomialError(f"syntax error in factor {factor!r}")
            if m.group(1) is not None:
                coeff *= int(m.group(1))
            else:
                idx = int(m.group(2))
                if not 1 <= idx <= n:
                    raise PolynomialError(f"variable x{idx} out of range for n={n}")
                exps[idx - 1] += int(m.group(3) or 1)
        if sum(exps) > 3:
            raise DegreeTooHigh(f"term {body!r} has degree {sum(exps)} > 3")
        key = tuple(exps)
        out[key] = out.get(key, 0) + coeff
    return CubicPolynomial.from_dict(n, out)


def format_polynomial(g: CubicPolynomial) -> str:
    """Canonical graded-lex text, e.g. ``x1^3 - 2*x1*x2^2 + 5``."""
    if g.is_zero():
        return "0"
    pieces: list[str] = []
    for i, (e, c) in enumerate(g.terms):
        mono = "*".join(
            f"x{j + 1}" if k == 1 else f"x{j + 1}^{k}" for j, k in enumerate(e) if k
        )
        mag = abs(c)
        if not mono:
            body = str(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{mag}*{mono}"
        if i == 0:
            pieces.append(("-" if c < 0 else "") + body)
        else:
            pieces.append((" - " if c < 0 else " + ") + body)
    return "".join(pieces)


# ---- operations --------------------------------------------------------------


def cubic_part(g: CubicPolynomial) -> CubicPolynomial:
    return g.homogeneous_part(3)


def sup_norm(g: CubicPolynomial) -> int:
    return max((abs(c) for _, c in g.terms), default=0)


def scaled_norm(g: CubicPolynomial, P: float) -> float:
    """max |c| * P^(deg - 3) over the terms of g, i.e. the sup norm of P^-3 g(P x)."""
    if P < 1:
        raise ValueError("P must be >= 1")
    if isinstance(P, (int, Fraction)):
        return float(scaled_norm_exact(g, Fraction(P)))
    return max((abs(c) * float(P) ** (sum(e) - 3) for e, c in g.terms), default=0.0)


def scaled_norm_exact(g: CubicPolynomial, P: Fraction) -> Fraction:
    if P < 1:
        raise ValueError("P must be >= 1")
    return max((abs(c) * Fraction(P) ** (sum(e) - 3) for e, c in g.terms), default=Fraction(0))


@dataclass(frozen=True)
class SymmetricCubicTensor:
    """Integer c_ijk, symmetric in (i, j, k), with sum c_ijk x_i x_j x_k = 6 g0(x)."""

    n: int
    entries: np.ndarray  # shape (n, n, n), dtype object (exact ints)

    def __getitem__(self, idx: tuple[int, int, int]) -> int:
        return int(self.entries[idx])

    def contract(self, x: Sequence[int]) -> int:
        n = self.n
        return sum(
            int(self.entries[i, j, k]) * x[i] * x[j] * x[k]
            for i in range(n)
            for j in range(n)
            for k in range(n)
        )

    def abs_sum(self) -> int:
        return int(sum(abs(int(v)) for v in self.entries.flat))

    def as_int64(self) -> np.ndarray:
        return self.entries.astype(np.int64)


def symmetric_tensor(g0: CubicPolynomial) -> SymmetricCubicTensor:
    if not g0.is_homogeneous_cubic():
        raise PolynomialError("symmetric_tensor needs a homogeneous cubic")
    n = g0.n
    T = np.zeros((n, n, n), dtype=object)
    T[...] = 0
    for e, c in g0.terms:
        idx = [i for i, k in enumerate(e) for _ in range(k)]
        perms = set(itertools.permutations(idx))
        share = 6 * c // len(perms)
        for p in perms:
            T[p] = share
    return SymmetricCubicTensor(n, T)


def bilinear_system(T: SymmetricCubicTensor, w: Sequence[int], x: Sequence[int]) -> list[int]:
    """B_i(w; x) = sum_{j,k} c_ijk w_j x_k for i = 1..n."""
    n = T.n
    if len(w) != n or len(x) != n:
        raise PolynomialError("dimension mismatch")
    return [
        sum(int(T.entries[i, j, k]) * w[j] * x[k] for j in range(n) for k in range(n))
        for i in range(n)
    ]


@dataclass(frozen=True)
class HessianMatrix:
    rows: tuple[tuple[int, ...], ...]

    def matvec(self, y: Sequence[int]) -> list[int]:
        return [sum(a * b for a, b in zip(r, y)) for r in self.rows]

    def as_list(self) -> list[list[int]]:
        return [list(r) for r in self.rows]


def gradient_hessian(F: CubicPolynomial, x: Sequence[int]) -> tuple[int, list[int], HessianMatrix]:
    if len(x) != F.n:
        raise PolynomialError("dimension mismatch")
    grads = F.gradient()
    hess = tuple(tuple(gi.partial(j).evaluate(x) for j in range(F.n)) for gi in grads)
    return F.evaluate(x), [gi.evaluate(x) for gi in grads], HessianMatrix(hess)


def gradient_mod_grid(g0: CubicPolynomial, p: int) -> list[np.ndarray]:
    return [d.evaluate_mod_grid(p) for d in g0.gradient()]


def bad_primes(g0: CubicPolynomial, limit: int) -> list[int]:
    """Primes p <= limit for which the gradient of g0 has a nonzero common zero mod p."""
    if limit < 2:
        raise ValueError("limit must be >= 2")
    if not g0.is_homogeneous_cubic():
        raise PolynomialError("bad_primes needs a homogeneous cubic")
    out = []
    for p in primes_up_to(limit):
        grads = gradient_mod_grid(g0, p)
        zero = np.ones((p,) * g0.n, dtype=bool)
        for d in grads:
            zero &= d == 0
        zero.flat[0] = False  # the origin
        if zero.any():
            out.append(p)
    return out


def monomials(n: int, max_degree: int = 3) -> list[Exponent]:
    out = [
        e
        for e in itertools.product(range(max_degree + 1), repeat=n)
        if sum(e) <= max_degree
    ]
    return sorted(out, key=_grlex_key)


def random_polynomial(
    rng: np.random.Generator,
    n: int,
    coeff_bound: int = 3,
    homogeneous: bool = False,
    density: float = 1.0,
) -> CubicPolynomial:
    mons = [e for e in monomials(n) if not homogeneous or sum(e) == 3]
    coeffs = {}
    for e in mons:
        if density < 1.0 and rng.random() > density:
            continue
        coeffs[e] = int(rng.integers(-coeff_bound, coeff_bound + 1))
    return CubicPolynomial.from_dict(n, coeffs)


def coefficient_sum(g0: CubicPolynomial) -> int:
    """c = sum |c_ijk| over the integer tensor of 6 g0."""
    return symmetric_tensor(g0).abs_sum()
