"""The Farey split of N_w: main term, error majorant, and the minor-arc bound functionals."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .archimedean import lattice_data, minor_arc_sum
from .complete_sums import twisted_kernel
from .poly import CubicPolynomial, scaled_norm
from .qdecomp import QDecomposition, decompose
from .weights import WeightFunction

SIMPSON_RTOL = 1e-4
MAX_SIMPSON_DEPTH = 60
Z_SAMPLES = 9
REPORT_THETA = 1.0
REPORT_EPS = 0.25
V_FLOOR = 1e-12


class IntegrationError(RuntimeError):
    pass


def adaptive_simpson(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, tol: float) -> complex:
    """Adaptive Simpson quadrature of a complex function with an explicit stack."""
    m = (a + b) / 2
    fa, fm, fb = f(np.array([a, m, b]))
    whole = (b - a) / 6 * (fa + 4 * fm + fb)
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    total = 0j
    while stack:
        a, b, fa, fm, fb, whole, eps, depth = stack.pop()
        m = (a + b) / 2
        lm, rm = (a + m) / 2, (m + b) / 2
        flm, frm = f(np.array([lm, rm]))
        left = (m - a) / 6 * (fa + 4 * flm + fm)
        right = (b - m) / 6 * (fm + 4 * frm + fb)
        diff = left + right - whole
        if abs(diff) <= 15 * eps:
            total += left + right + diff / 15
        elif depth >= MAX_SIMPSON_DEPTH:
            raise IntegrationError(f"Simpson depth exceeded on [{a}, {b}]")
        else:
            stack.append((m, b, fm, frm, fb, right, eps / 2, depth + 1))
            stack.append((a, m, fa, flm, fm, left, eps / 2, depth + 1))
    return total


def _arc_integral(q: int, Q: int, g: CubicPolynomial, w: WeightFunction, P: float, rtol: float) -> complex:
    delta = 1.0 / (q * Q)

    def f(z: np.ndarray) -> np.ndarray:
        return minor_arc_sum(0, q, z, g, w, P)

    # scale for the tolerance from a coarse look at |S_0|
    probe = np.abs(f(np.linspace(-delta, delta, 65)))
    scale = max(float(probe.mean()) * 2 * delta, 1e-300)
    # initial split so the first Simpson panels see at most a few oscillations
    hmax = float(np.max(np.abs(lattice_data(g, w, P).values.astype(float)), initial=0.0))
    pieces = max(1, int(math.ceil(2 * delta * hmax / 2)))
    edges = np.linspace(-delta, delta, pieces + 1)
    tol = rtol * scale / pieces
    return sum(adaptive_simpson(f, float(lo), float(hi), tol) for lo, hi in zip(edges[:-1], edges[1:]))


def main_term(g: CubicPolynomial, w: WeightFunction, P: float, Q: int, rtol: float = SIMPSON_RTOL) -> float:
    """sum over q <= Q of the integral of S_0(q; z) over |z| <= 1/(qQ)."""
    if Q < 1:
        raise ValueError("Q must be >= 1")
    total = sum(_arc_integral(q, Q, g, w, P, rtol) for q in range(1, Q + 1))
    return float(total.real)


def main_term_complex(g: CubicPolynomial, w: WeightFunction, P: float, Q: int, rtol: float = SIMPSON_RTOL) -> complex:
    return complex(sum(_arc_integral(q, Q, g, w, P, rtol) for q in range(1, Q + 1)))


def main_term_closed_form(g: CubicPolynomial, w: WeightFunction, P: float, Q: int) -> float:
    """The same quantity integrated term by term: each e(zh) integrates to sin(2 pi h d)/(pi h)."""
    data = lattice_data(g, w, P)
    h = data.values.astype(float)
    total = 0j
    for q in range(1, Q + 1):
        delta = 1.0 / (q * Q)
        K = twisted_kernel(q, 0)[data.phases(q)]
        safe = np.where(h == 0, 1.0, h)
        f = np.where(h == 0, 2 * delta, np.sin(2 * np.pi * h * delta) / (np.pi * safe))
        total += np.sum(data.mass * K * f)
    return float(total.real)


def _z_grid(q: int, Q: int, samples: int) -> np.ndarray:
    mags = np.linspace(0.5, 1.0, samples) / (q * Q)
    return np.concatenate([mags, -mags])


def error_majorant(g: CubicPolynomial, w: WeightFunction, P: float, Q: int, samples: int = Z_SAMPLES) -> float:
    """sum_{q <= Q} sum_{|u| <= q/2} max_z |S_u(q; z)| / (1 + |u|), z over 1/2 <= qQ|z| <= 1 (sampled)."""
    total = 0.0
    for q in range(1, Q + 1):
        zs = _z_grid(q, Q, samples)
        for u in range(-(q // 2), q // 2 + 1):
            total += float(np.max(np.abs(minor_arc_sum(u, q, zs, g, w, P)))) / (1 + abs(u))
    return total


@dataclass(frozen=True)
class DeltaCheck:
    N: float
    main: float
    E: float
    Q: int

    @property
    def constant(self) -> float:
        """C with |N - main| = C Q^{-2} E."""
        return abs(self.N - self.main) * self.Q**2 / self.E if self.E else math.inf


def delta_check(g: CubicPolynomial, w: WeightFunction, P: float, Q: int) -> DeltaCheck:
    from .counting import count_affine_weighted

    return DeltaCheck(count_affine_weighted(g, w, P), main_term(g, w, P, Q), error_majorant(g, w, P, Q), Q)


# ---------------------------------------------------------------- functionals


@dataclass(frozen=True)
class BoundFunctionals:
    q: int
    z: float
    P: float
    H: float
    n: int
    decomposition: QDecomposition
    N_gcd: int
    V: float
    W: float
    M1: float
    M2: float
    M3: float
    M4: float

    def min_term(self) -> float:
        return min(self.W**self.n, self.M2, self.M3)


def bound_functionals(q: int, z: float, P: float, H: float, n: int, N_gcd: int | None = None) -> BoundFunctionals:
    if q < 1 or P < 1 or H < 1:
        raise ValueError("need q >= 1, P >= 1, H >= 1")
    if abs(z) > (1 + 1e-12) / (q * P**1.5):
        raise ValueError("need |z| <= q^{-1} P^{-3/2}")
    D = decompose(q)
    if N_gcd is None:
        N_gcd = D.b1
    if N_gcd < 1:
        raise ValueError("N_gcd must be positive")
    az = abs(z)
    V = q / P * max(1.0, math.sqrt(az * P**3))
    Vs = max(V, V_FLOOR)
    c, d = D.c, D.d
    W = V + (c * c * d) ** (1 / 3)
    M1 = math.sqrt(math.gcd(D.b1, N_gcd)) / math.sqrt(D.b1)
    M2 = c**n * (1 + V / c) ** (n - 1.5)
    M3 = Vs**n * (1 + c * c * d / Vs**3) ** (n / 2)
    M4 = q ** (3 * n / 8) * (1.0 if az == 0 else min(1.0, (az * P**3) ** (-n / 8)))
    return BoundFunctionals(q, z, P, H, n, D, N_gcd, V, W, M1, M2, M3, M4)


def proposition1_rhs(F: BoundFunctionals, theta: float = REPORT_THETA, eps: float = REPORT_EPS) -> float:
    n = F.n
    return F.H**theta * F.q ** (-n / 2 + 1) * F.P ** (n + eps) * (F.W**n * F.M1 + F.min_term())


@dataclass(frozen=True)
class Prop1Row:
    q: int
    z: float
    u: int
    V: float
    W: float
    M1: float
    M2: float
    M3: float
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs

    def as_dict(self) -> dict:
        return {
            "q": self.q, "z": self.z, "u": self.u, "V": self.V, "W": self.W, "M1": self.M1,
            "M2": self.M2, "M3": self.M3, "lhs": self.lhs, "rhs": self.rhs, "ratio": self.ratio,
        }


def default_grid(P: float, q_max: int = 8, u_values: Sequence[int] = (0, 1), z_points: int = 4) -> list[tuple[int, float, int]]:
    grid = []
    for q in range(1, q_max + 1):
        zmax = 1.0 / (q * P**1.5)
        zs = [0.0] + [zmax * k / z_points for k in range(1, z_points + 1)]
        for z in zs:
            for u in u_values:
                grid.append((q, z, u))
    return grid


def proposition1_report(
    g: CubicPolynomial,
    w: WeightFunction,
    P: float,
    H: float | None = None,
    grid: Iterable[tuple[int, float, int]] | None = None,
) -> list[Prop1Row]:
    """|S_u(q; z)| against q^{-n/2+1} P^{n+eps} (W^n M1 + min{W^n, M2, M3}) on a (q, z, u) grid."""
    n = g.n
    hp = scaled_norm(g, P)
    if H is None:
        H = max(1.0, hp)
    if not hp <= H <= P:
        raise ValueError("need ||g||_P <= H <= P")
    grid = list(default_grid(P) if grid is None else grid)
    if not grid:
        raise ValueError("empty grid")
    rows = []
    for q, z, u in grid:
        F = bound_functionals(q, z, P, H, n, abs(u) if u else None)
        lhs = abs(minor_arc_sum(u, q, z, g, w, P))
        rows.append(Prop1Row(q, z, u, F.V, F.W, F.M1, F.M2, F.M3, lhs, proposition1_rhs(F)))
    return rows
