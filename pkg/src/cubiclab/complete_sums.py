"""Complete exponential sums modulo q and the finite-field checks built on them.

All sums are assembled from an integer histogram N[h, k] = #{y mod q : g(y) = h, v.y = k},
so the only floating-point step is the final contraction against a table of e_q(j).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .numtheory import egcd, euler_phi, eval_root_polynomial, inverse_mod, is_prime, roots_of_unity, smith_diagonal
from .poly import CubicPolynomial, bad_primes, cubic_part, gradient_hessian

SLICE_LIMIT = 1 << 22
ENUM_LIMIT = 10**3


def _powers_mod(q: int) -> list[np.ndarray]:
    y = np.arange(q, dtype=np.int64)
    return [np.ones(q, dtype=np.int64), y, y * y % q, y * y % q * y % q]


def _slice_values(g: CubicPolynomial, q: int, head: Sequence[int], tail_dim: int, pw: list[np.ndarray]) -> np.ndarray:
    """g(head, y') mod q for all y' in (Z/q)^tail_dim (flattened)."""
    lead = len(head)
    # fold the fixed head coordinates into one coefficient per tail monomial
    coeffs: dict[tuple[int, ...], int] = {}
    for e, c in g.terms:
        coef = c % q
        for i in range(lead):
            coef = coef * pow(int(head[i]), e[i], q) % q
        if coef:
            tail = e[lead:]
            coeffs[tail] = (coeffs.get(tail, 0) + coef) % q
    total = np.zeros((q,) * tail_dim, dtype=np.int64)
    for tail, coef in coeffs.items():
        if not coef:
            continue
        # coef and each factor are < q; the slice size cap keeps q^(1 + tail_dim) inside int64
        term = np.array(coef, dtype=np.int64)
        for ax, ei in enumerate(tail):
            if ei:
                shape = [1] * tail_dim
                shape[ax] = q
                term = term * pw[ei].reshape(shape)
        total += term % q
    return (total % q).reshape(-1)


def _linear_slice(v: Sequence[int], q: int, head: Sequence[int], tail_dim: int) -> np.ndarray:
    lead = len(head)
    base = sum(int(v[i]) * int(head[i]) for i in range(lead)) % q
    total = np.full((q,) * tail_dim, base, dtype=np.int64)
    y = np.arange(q, dtype=np.int64)
    for ax in range(tail_dim):
        shape = [1] * tail_dim
        shape[ax] = q
        total += (int(v[lead + ax]) % q) * y.reshape(shape) % q
    return (total % q).reshape(-1)


def residue_histogram(g: CubicPolynomial, q: int, v: Sequence[int]) -> np.ndarray:
    """Integer matrix N[h, k] = #{y in (Z/q)^n : g(y) = h, v.y = k (mod q)}."""
    n = g.n
    if len(v) != n:
        raise ValueError("frequency vector has the wrong dimension")
    pw = _powers_mod(q)
    # fix leading coordinates until the remaining block fits in memory
    lead = 0
    while lead < n and q ** (n - lead) > SLICE_LIMIT:
        lead += 1
    N = np.zeros(q * q, dtype=np.int64)
    heads = np.ndindex(*((q,) * lead)) if lead else [()]
    for head in heads:
        h = _slice_values(g, q, head, n - lead, pw)
        k = _linear_slice(v, q, head, n - lead)
        N += np.bincount(h * q + k, minlength=q * q)
    return N.reshape(q, q)


def _check_unit(a: int, q: int) -> None:
    if math.gcd(a, q) != 1:
        raise ValueError(f"gcd({a}, {q}) != 1")


def complete_T(a: int, q: int, v: Sequence[int], g: CubicPolynomial) -> complex:
    """T(a, q; v) = sum over y mod q of e_q(a g(y) + v.y)."""
    if q < 1:
        raise ValueError("q must be >= 1")
    _check_unit(a, q)
    return _T_any(a, q, v, g)


def _T_any(a: int, q: int, v: Sequence[int], g: CubicPolynomial) -> complex:
    N = residue_histogram(g, q, v)
    h = np.arange(q, dtype=np.int64)
    idx = (a % q * h[:, None] + h[None, :]) % q
    bins = np.zeros(q, dtype=np.int64)
    np.add.at(bins, idx.reshape(-1), N.reshape(-1))
    return complex(bins @ roots_of_unity(q))


@lru_cache(maxsize=512)
def twisted_kernel(q: int, u: int) -> np.ndarray:
    """K(h) = sum over units a mod q of e_q(a^{-1} u + a h), for h = 0..q-1."""
    u %= q
    units = np.array([a for a in range(1, q + 1) if math.gcd(a, q) == 1], dtype=np.int64) % q
    inv = np.array([inverse_mod(int(a), q) for a in units], dtype=np.int64)
    h = np.arange(q, dtype=np.int64)
    idx = (inv[:, None] * u + units[:, None] * h[None, :]) % q
    out = np.zeros(q, dtype=complex)
    table = roots_of_unity(q)
    # counts of each phase per h, then one contraction: keeps the sum order fixed
    for col in range(q):
        counts = np.bincount(idx[:, col], minlength=q)
        out[col] = counts @ table
    out.flags.writeable = False
    return out


@lru_cache(maxsize=64)
def _kernel_counts(q: int, u: int) -> np.ndarray:
    """C[h, j] = #{units a mod q : a^{-1} u + a h = j (mod q)}."""
    units = np.array([a for a in range(1, q + 1) if math.gcd(a, q) == 1], dtype=np.int64) % q
    inv = np.array([inverse_mod(int(a), q) for a in units], dtype=np.int64)
    h = np.arange(q, dtype=np.int64)
    idx = (h[:, None] * q + (inv[None, :] * u + units[None, :] * h[:, None]) % q).reshape(-1)
    out = np.bincount(idx, minlength=q * q).reshape(q, q)
    out.flags.writeable = False
    return out


def phase_counts(u: int, q: int, v: Sequence[int], g: CubicPolynomial) -> np.ndarray:
    """Integer c with S_u(q; v) = sum_j c_j e_q(j).

    c_j = sum_{h,k} N[h, k] C[h, j - k] is a sum of cyclic convolutions, done by FFT and
    rounded; the rounding gap and the total phi(q) q^n are checked, with an exact fallback.
    """
    N = residue_histogram(g, q, v)
    C = _kernel_counts(q, u % q)
    raw = np.fft.ifft((np.fft.fft(N, axis=1) * np.fft.fft(C, axis=1)).sum(axis=0)).real
    c = np.rint(raw).astype(np.int64)
    if float(np.max(np.abs(raw - c), initial=0.0)) < 0.25 and int(c.sum()) == euler_phi(q) * q**g.n:
        return c
    A = N.T @ C  # A[k, j] = sum_h N[h, k] C[h, j]
    k = np.arange(q, dtype=np.int64)
    c = np.zeros(q, dtype=np.int64)
    np.add.at(c, ((k[:, None] + k[None, :]) % q).reshape(-1), A.reshape(-1))
    return c


def complete_S(u: int, q: int, v: Sequence[int], g: CubicPolynomial) -> complex:
    """S_u(q; v) = sum over units a mod q of e_q(a^{-1} u) T(a, q; v)."""
    if q < 1:
        raise ValueError("q must be >= 1")
    return eval_root_polynomial(phase_counts(u, q, v, g), q)


def complete_S_table(u: int, q: int, g: CubicPolynomial) -> np.ndarray:
    """S_u(q; v) for every residue class v mod q, as an array of shape (q,)*n."""
    out = np.empty((q,) * g.n, dtype=complex)
    for v in np.ndindex(*out.shape):
        out[v] = complete_S(u, q, v, g)
    return out


def numerator_sum_all(q: int, g: CubicPolynomial) -> complex:
    """sum over ALL a mod q of T(a, q; 0), assembled from S_0(d; 0) over divisors d of q.

    T(a, q; 0) with gcd(a, q) = q/d equals (q/d)^n T(a', d; 0) with a' a unit mod d.
    """
    n = g.n
    total = 0j
    for d in range(1, q + 1):
        if q % d == 0:
            total += (q // d) ** n * complete_S(0, d, [0] * n, g)
    return total


def residue_zero_count(q: int, g: CubicPolynomial) -> int:
    """#{y mod q : g(y) = 0 mod q}."""
    return int(residue_histogram(g, q, [0] * g.n)[0].sum())


def check_multiplicativity(r: int, s: int, u: int, v: Sequence[int], g: CubicPolynomial) -> float:
    """Absolute residual of S_u(rs; v) = S_{u rb^2}(s; rb v) S_{u sb^2}(r; sb v), r rb + s sb = 1."""
    gg, rb, sb = egcd(r, s)
    if gg != 1:
        raise ValueError(f"r={r} and s={s} are not coprime")
    lhs = complete_S(u, r * s, v, g)
    right_s = complete_S(u * rb * rb, s, [rb * x for x in v], g)
    right_r = complete_S(u * sb * sb, r, [sb * x for x in v], g)
    return abs(lhs - right_s * right_r)


def multiplicativity_sides(r: int, s: int, u: int, v: Sequence[int], g: CubicPolynomial) -> tuple[complex, complex]:
    gg, rb, sb = egcd(r, s)
    if gg != 1:
        raise ValueError(f"r={r} and s={s} are not coprime")
    lhs = complete_S(u, r * s, v, g)
    rhs = complete_S(u * rb * rb, s, [rb * x for x in v], g) * complete_S(u * sb * sb, r, [sb * x for x in v], g)
    return lhs, rhs


def hessian_kernel_count(x: Sequence[int], d: int, g: CubicPolynomial, method: str = "auto") -> int:
    """#{y mod d : H_g(x) y = 0 mod d}."""
    if d < 1:
        raise ValueError("d must be >= 1")
    H = gradient_hessian(g, x)[2].as_list()
    n = g.n
    if method == "auto":
        method = "enumerate" if d <= ENUM_LIMIT and d**n <= 4 * 10**6 else "smith"
    if method == "smith":
        diag = smith_diagonal(H)
        diag = diag + [0] * (n - len(diag))
        return math.prod(math.gcd(s, d) for s in diag)
    if method != "enumerate":
        raise ValueError(f"unknown method {method!r}")
    Hm = np.array(H, dtype=np.int64) % d
    ys = np.stack(np.meshgrid(*([np.arange(d, dtype=np.int64)] * n), indexing="ij"), axis=-1).reshape(-1, n)
    img = (ys @ Hm.T) % d
    return int(np.count_nonzero(~img.any(axis=1)))


def _projective_normalize(v: Sequence[int], p: int) -> tuple[int, ...] | None:
    v = [int(x) % p for x in v]
    lead = next((x for x in v if x), 0)
    if not lead:
        return None
    inv = inverse_mod(lead, p)
    return tuple(x * inv % p for x in v)


@dataclass(frozen=True)
class GaussImage:
    """Projective classes [grad g0(x)] over nonzero zeros x of g0 mod p."""

    p: int
    n: int
    points: frozenset = field(default_factory=frozenset)

    def __contains__(self, v) -> bool:
        key = _projective_normalize(v, self.p)
        return key is not None and key in self.points

    def __len__(self) -> int:
        return len(self.points)


def gauss_image_mod_p(g0: CubicPolynomial, p: int) -> GaussImage:
    if not is_prime(p) or p > 31:
        raise ValueError("p must be a prime <= 31")
    if g0.n > 4:
        raise ValueError("n must be <= 4")
    n = g0.n
    vals = g0.evaluate_mod_grid(p).reshape(-1)
    grads = [d.evaluate_mod_grid(p).reshape(-1) for d in g0.gradient()]
    G = np.stack(grads, axis=1) if n else np.zeros((len(vals), 0), dtype=np.int64)
    sel = np.flatnonzero(vals == 0)
    sel = sel[sel != 0]  # drop the origin
    G = G[sel]
    G = G[G.any(axis=1)]
    # normalise each row so the first nonzero entry is 1
    first = np.argmax(G != 0, axis=1)
    lead = G[np.arange(len(G)), first]
    inv_table = np.array([0] + [inverse_mod(a, p) for a in range(1, p)], dtype=np.int64)
    G = G * inv_table[lead][:, None] % p
    pts = frozenset(map(tuple, np.unique(G, axis=0).tolist())) if len(G) else frozenset()
    return GaussImage(p, n, pts)


@dataclass
class PrimeBoundReport:
    primes: list[int]
    excluded: list[int]
    ratio1: float
    ratio2: float
    ratio4: float
    ratio4_large_p: float
    rows: list[dict]

    def as_dict(self) -> dict:
        return {
            "primes": self.primes,
            "excluded": self.excluded,
            "max_ratio1": self.ratio1,
            "max_ratio2": self.ratio2,
            "max_ratio4": self.ratio4,
            "max_ratio4_large_p": self.ratio4_large_p,
            "rows": self.rows,
        }


def prime_bound_report(
    g: CubicPolynomial,
    prime_limit: int,
    u_choice: int = 1,
    samples: int = 50,
    seed: int = 0,
    min_prime: int = 2,
) -> PrimeBoundReport:
    """Observed ratios of |S_u(p; v)|, |S_0(p; v)| and |S_u(p^2; v)| to their square-root-type bounds."""
    n = g.n
    g0 = cubic_part(g)
    bad = set(bad_primes(g0, prime_limit)) if prime_limit >= 2 else set()
    primes = [p for p in range(max(2, min_prime), prime_limit + 1) if is_prime(p) and p not in bad]
    if not primes:
        raise ValueError("no good primes in range")
    rng = np.random.default_rng(seed)
    # large-p flag for the p^2 check: p > n * ||g||
    height = max(abs(c) for _, c in g.terms)
    r1 = r2 = r4 = r4_big = 0.0
    rows = []
    for p in primes:
        img = gauss_image_mod_p(g0, p) if n <= 4 else None
        q2 = p * p
        for _ in range(samples):
            v = [int(t) for t in rng.integers(0, q2, size=n)]
            row = {"p": p, "v": v}
            if u_choice % p:
                s1 = abs(complete_S(u_choice, p, v, g)) / p ** ((n + 1) / 2)
                row["ratio1"] = s1
                r1 = max(r1, s1)
            vp = [x % p for x in v]
            in_img = (not any(vp)) or (img is not None and vp in img)
            factor = p if in_img else 1
            s2 = abs(complete_S(0, p, v, g)) / (p ** ((n + 1) / 2) * math.sqrt(factor))
            row["ratio2"] = s2
            r2 = max(r2, s2)
            s4 = abs(complete_S(u_choice, q2, v, g)) / p ** (n + 2)
            row["ratio4"] = s4
            r4 = max(r4, s4)
            if p > n * height:
                r4_big = max(r4_big, s4)
            rows.append(row)
    return PrimeBoundReport(primes, sorted(bad), r1, r2, r4, r4_big, rows)


def trivial_bounds(q: int, n: int) -> tuple[int, int]:
    """(q^n, phi(q) q^n): the trivial sizes of |T| and |S|."""
    return q**n, euler_phi(q) * q**n
