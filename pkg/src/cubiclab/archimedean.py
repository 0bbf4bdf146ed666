"""Weighted Weyl sums, twisted minor-arc sums, the oscillatory integral and Poisson reconstruction."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .complete_sums import complete_S_table, twisted_kernel
from .counting import _box, support_box
from .numtheory import inverse_mod, units_mod
from .poly import CubicPolynomial
from .weights import WeightFunction

GL_NODES = 32
QUAD_RTOL = 1e-6
MAX_DOUBLINGS = 4
CYCLES_PER_PANEL = 6.0
ROW_CHUNK = 64


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class LatticeData:
    """The support lattice of w(./P) collapsed by the value of g.

    values[i] are the distinct g(x) over points with w(x/P) > 0 and mass[i] the summed weight.
    """

    values: np.ndarray
    mass: np.ndarray
    bound: int

    def phases(self, q: int) -> np.ndarray:
        return np.array([int(h) % q for h in self.values], dtype=np.int64)


@lru_cache(maxsize=64)
def lattice_data(g: CubicPolynomial, w: WeightFunction, P: float) -> LatticeData:
    if g.n != w.n:
        raise ValueError("weight and polynomial dimensions differ")
    B = support_box(w, P)
    pts = _box(B, g.n)
    wt = np.asarray(w(pts / P), dtype=float)
    keep = wt > 0
    pts, wt = pts[keep], wt[keep]
    vals = g.evaluate_grid([pts[:, i] for i in range(g.n)])
    if vals.dtype == object:
        keys = [int(v) for v in vals]
        uniq = sorted(set(keys))
        pos = {h: i for i, h in enumerate(uniq)}
        inv = np.array([pos[h] for h in keys], dtype=np.int64)
        values = np.array(uniq, dtype=object)
    else:
        values, inv = np.unique(vals, return_inverse=True)
        inv = inv.reshape(-1)
    mass = np.bincount(inv, weights=wt, minlength=len(values))
    bound = int(math.ceil(g.magnitude_bound(max(B, 1))))
    return LatticeData(values, mass, bound)


def _frac_phase(a: int, q: int, z: float, values: np.ndarray) -> np.ndarray:
    exact = np.array([(a * int(h)) % q for h in values], dtype=float) / q if q > 1 else 0.0
    return exact + z * values.astype(float)


def weyl_sum(alpha: float, g: CubicPolynomial, w: WeightFunction, P: float) -> complex:
    """T(alpha) = sum over x of w(x/P) e(alpha g(x))."""
    data = lattice_data(g, w, P)
    ph = np.mod(alpha * data.values.astype(float), 1.0)
    return complex(np.exp(2j * np.pi * ph) @ data.mass)


def weyl_sum_at(a: int, q: int, z: float, g: CubicPolynomial, w: WeightFunction, P: float) -> complex:
    """T(a/q + z) with the rational part reduced exactly."""
    data = lattice_data(g, w, P)
    return complex(np.exp(2j * np.pi * _frac_phase(a, q, z, data.values)) @ data.mass)


def minor_arc_sum(
    u: int, q: int, z, g: CubicPolynomial, w: WeightFunction, P: float, method: str = "kernel"
):
    """S_u(q; z) = sum over units a mod q of e_q(a^{-1} u) T(a/q + z).

    The kernel route folds the numerator sum into K(h) = sum_a e_q(a^{-1}u + ah) and accepts
    an array of z; the direct route loops over a and calls the Weyl sum.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    if method == "direct":
        total = 0j
        for a in units_mod(q):
            total += np.exp(2j * np.pi * ((inverse_mod(a, q) * u) % q) / q) * weyl_sum_at(a, q, float(z), g, w, P)
        return complex(total)
    if method != "kernel":
        raise ValueError(f"unknown method {method!r}")
    data = lattice_data(g, w, P)
    coeff = twisted_kernel(q, u % q)[data.phases(q)] * data.mass
    zs = np.atleast_1d(np.asarray(z, dtype=float))
    vals = data.values.astype(float)
    out = np.empty(len(zs), dtype=complex)
    step = max(1, (1 << 22) // max(1, len(vals)))
    for s in range(0, len(zs), step):
        ph = np.outer(zs[s : s + step], vals)
        out[s : s + step] = np.exp(2j * np.pi * ph) @ coeff
    return complex(out[0]) if np.ndim(z) == 0 else out


def trivial_minor_arc_bound(q: int, z: float, g: CubicPolynomial, w: WeightFunction, P: float) -> float:
    """phi(q) max_a |T(a/q + z)|."""
    units = units_mod(q)
    return len(units) * max(abs(weyl_sum_at(a, q, z, g, w, P)) for a in units)


def orthogonality_count(g: CubicPolynomial, w: WeightFunction, P: float, M: int | None = None) -> float:
    """(1/M) sum_{j<M} T(j/M) with M = 2B + 1, B >= max |g| on the support."""
    data = lattice_data(g, w, P)
    if M is None:
        M = 2 * data.bound + 1
    if M <= 2 * max((abs(int(h)) for h in data.values), default=0):
        raise ValueError("M too small for an exact grid")
    if len(data.values) == 0:
        return 0.0
    h = np.array([int(v) % M for v in data.values], dtype=np.int64)
    total = 0j
    step = max(1, (1 << 22) // len(h))
    for s in range(0, M, step):
        j = np.arange(s, min(M, s + step), dtype=np.int64)
        ph = (j[:, None] * h[None, :]) % M
        total += np.exp(2j * np.pi * ph / M).sum(axis=0) @ data.mass
    return float(total.real / M)


# ---------------------------------------------------------------- quadrature


def _gauss_legendre_grid(L: float, panels: int) -> tuple[np.ndarray, np.ndarray]:
    t, wt = np.polynomial.legendre.leggauss(GL_NODES)
    edges = np.linspace(-L, L, panels + 1)
    half = (edges[1:] - edges[:-1]) / 2
    mid = (edges[1:] + edges[:-1]) / 2
    x = (mid[:, None] + half[:, None] * t[None, :]).reshape(-1)
    ww = (half[:, None] * wt[None, :]).reshape(-1)
    return x, ww


def _gradient_scale(g: CubicPolynomial, radius: float) -> float:
    return max((d.magnitude_bound(max(radius, 1.0)) for d in g.gradient()), default=0.0)


def _integral_once(z: float, betas: Sequence[np.ndarray], g: CubicPolynomial, w: WeightFunction, P: float, panels: int) -> np.ndarray:
    n = g.n
    L = w.support_radius * P
    x, ww = _gauss_legendre_grid(L, panels)
    N = len(x)
    # E_k[b, i] = e(-beta_b x_i) with the quadrature weight folded in
    E = [np.exp(-2j * np.pi * np.outer(np.asarray(b, dtype=float), x)) * ww[None, :] for b in betas]
    out = np.zeros(tuple(len(b) for b in betas), dtype=complex)
    rest_shape = (N,) * (n - 1)
    rest = np.stack(np.meshgrid(*([x] * (n - 1)), indexing="ij"), axis=-1).reshape(-1, n - 1) if n > 1 else np.zeros((1, 0))
    for s in range(0, N, ROW_CHUNK):
        x0 = x[s : s + ROW_CHUNK]
        pts = np.concatenate(
            [np.repeat(x0, len(rest))[:, None], np.tile(rest, (len(x0), 1))], axis=1
        )
        F = np.asarray(w(pts / P), dtype=float) * np.exp(2j * np.pi * z * _real_eval(g, pts))
        F = F.reshape((len(x0),) + rest_shape)
        # contract the trailing axes first, then the chunked leading axis
        for k in range(n - 1, 0, -1):
            F = np.tensordot(F, E[k], axes=([k], [1]))
            F = np.moveaxis(F, -1, k)
        out += np.tensordot(E[0][:, s : s + ROW_CHUNK], F, axes=([1], [0]))
    return out


def _real_eval(g: CubicPolynomial, pts: np.ndarray) -> np.ndarray:
    total = np.zeros(len(pts))
    for e, c in g.terms:
        term = np.full(len(pts), float(c))
        for i, k in enumerate(e):
            if k:
                term = term * pts[:, i] ** k
        total += term
    return total


@dataclass(frozen=True)
class IntegralResult:
    values: np.ndarray
    error: float
    panels: int


def oscillatory_integral_grid(
    z: float,
    betas: Sequence[np.ndarray],
    g: CubicPolynomial,
    w: WeightFunction,
    P: float,
    panels: int | None = None,
    rtol: float = QUAD_RTOL,
) -> IntegralResult:
    """I(z; beta) for all beta in the product set betas[0] x ... x betas[n-1].

    Tensor Gauss-Legendre with GL_NODES nodes per panel; panels double until two successive
    levels agree to rtol relative to max |I|, at most MAX_DOUBLINGS times.
    """
    if P < 1:
        raise ValueError("P must be >= 1")
    if len(betas) != g.n:
        raise ValueError("need one beta axis per variable")
    L = w.support_radius * P
    if panels is None:
        fmax = max(float(np.max(np.abs(b))) for b in betas) + abs(z) * _gradient_scale(g, L)
        panels = max(4, int(math.ceil(2 * L * fmax / CYCLES_PER_PANEL)))
    prev = _integral_once(z, betas, g, w, P, panels)
    for _ in range(MAX_DOUBLINGS):
        panels *= 2
        cur = _integral_once(z, betas, g, w, P, panels)
        err = float(np.max(np.abs(cur - prev)))
        scale = max(float(np.max(np.abs(cur))), 1e-300)
        if err <= rtol * scale:
            return IntegralResult(cur, err, panels)
        prev = cur
    raise QuadratureError(f"no convergence after {MAX_DOUBLINGS} doublings (error {err:.3g})")


def oscillatory_integral(
    z: float, beta: Sequence[float], g: CubicPolynomial, w: WeightFunction, P: float, panels: int | None = None
) -> tuple[complex, float]:
    """I(z; beta) = integral of w(x/P) e(z g(x) - beta.x) dx, with an error estimate."""
    res = oscillatory_integral_grid(z, [np.array([b]) for b in beta], g, w, P, panels)
    return complex(res.values.reshape(-1)[0]), res.error


# ---------------------------------------------------------------- Poisson


def default_truncation(q: int, z: float, P: float) -> int:
    V = q / P * max(1.0, math.sqrt(abs(z) * P**3))
    return max(8, int(math.ceil(4 * q * V / P)) * 4)


@dataclass(frozen=True)
class PoissonReport:
    lhs: complex
    rhs: complex
    residual: float
    truncation: int
    quadrature_error: float


def poisson_report(
    u: int, q: int, z: float, g: CubicPolynomial, w: WeightFunction, P: float, truncation: int | None = None
) -> PoissonReport:
    """Compare S_u(q; z) with q^{-n} sum_{|v| <= truncation} S_u(q; v) I(z; v/q)."""
    n = g.n
    if truncation is None:
        truncation = default_truncation(q, z, P)
    needed = math.ceil(q * abs(z) * _gradient_scale(g, w.support_radius * P))
    if truncation < needed:
        warnings.warn(f"truncation {truncation} below the stationary-phase scale {needed}", stacklevel=2)
    lhs = minor_arc_sum(u, q, z, g, w, P)
    vs = np.arange(-truncation, truncation + 1)
    integ = oscillatory_integral_grid(z, [vs / q] * n, g, w, P)
    table = complete_S_table(u, q, g)
    idx = np.ix_(*([vs % q] * n))
    rhs = complex(np.sum(table[idx] * integ.values)) / q**n
    return PoissonReport(lhs, rhs, abs(lhs - rhs), truncation, integ.error)


def poisson_residual(
    u: int, q: int, z: float, g: CubicPolynomial, w: WeightFunction, P: float, truncation: int | None = None
) -> float:
    return poisson_report(u, q, z, g, w, P, truncation).residual
