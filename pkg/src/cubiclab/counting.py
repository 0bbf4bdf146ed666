"""Exact reference counts of points on cubic hypersurfaces."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .poly import CubicPolynomial, PolynomialError
from .weights import WeightFunction

MAX_EVALUATIONS = 10**10
CHUNK = 1 << 20


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class CountResult:
    P: float
    value: float
    elapsed: float


def _check_budget(evaluations: float) -> None:
    if evaluations > MAX_EVALUATIONS:
        raise BudgetExceeded(
            f"estimated {evaluations:.3g} lattice evaluations exceeds the {MAX_EVALUATIONS:.0e} cap"
        )


def _box(P: int, n: int) -> np.ndarray:
    """All integer points of [-P, P]^n as an (N, n) array."""
    axis = np.arange(-P, P + 1, dtype=np.int64)
    return np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1).reshape(-1, n)


def _variable_blocks(g: CubicPolynomial) -> list[list[int]]:
    """Connected components of the 'appear in a common monomial' graph."""
    parent = list(range(g.n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for e, _ in g.terms:
        idx = [i for i, k in enumerate(e) if k]
        for a in idx[1:]:
            parent[find(a)] = find(idx[0])
    blocks: dict[int, list[int]] = {}
    for i in range(g.n):
        blocks.setdefault(find(i), []).append(i)
    return sorted(blocks.values())


def _restrict(g: CubicPolynomial, variables: Sequence[int]) -> CubicPolynomial:
    """The monomials of g that only involve the given variables, as a polynomial in them."""
    out = {}
    vs = set(variables)
    for e, c in g.terms:
        if all(k == 0 or i in vs for i, k in enumerate(e)) and any(e[i] for i in variables):
            out[tuple(e[i] for i in variables)] = c
    return CubicPolynomial.from_dict(len(variables), out)


def _canonical_primitive_mask(pts: np.ndarray) -> np.ndarray:
    """Rows that are primitive with first nonzero coordinate positive."""
    g = np.gcd.reduce(np.abs(pts), axis=1)
    nz = pts != 0
    first = np.argmax(nz, axis=1)
    lead = pts[np.arange(len(pts)), first]
    return (g == 1) & (lead > 0)


def _solutions_split(C: CubicPolynomial, P: int, blocks: list[list[int]]) -> np.ndarray:
    """Zeros of C in [-P, P]^n when C = A(x_S) + B(x_T) with disjoint variable sets."""
    # balance the two halves so both enumerations stay near (2P+1)^{n/2}
    left_vars: list[int] = []
    right_vars: list[int] = []
    for b in sorted(blocks, key=len, reverse=True):
        (left_vars if len(left_vars) <= len(right_vars) else right_vars).extend(b)
    left_vars.sort()
    right_vars.sort()
    A = _restrict(C, left_vars)
    B = _restrict(C, right_vars)
    left = _box(P, len(left_vars))
    right = _box(P, len(right_vars))
    _check_budget(len(left) + len(right))
    a = A.evaluate_grid([left[:, i] for i in range(len(left_vars))]).astype(np.int64)
    b = B.evaluate_grid([right[:, i] for i in range(len(right_vars))]).astype(np.int64)
    const = dict(C.terms).get((0,) * C.n, 0)
    a = a + const
    order = np.argsort(b, kind="stable")
    b_sorted = b[order]
    lo = np.searchsorted(b_sorted, -a, side="left")
    hi = np.searchsorted(b_sorted, -a, side="right")
    counts = hi - lo
    li = np.repeat(np.arange(len(a)), counts)
    starts = np.repeat(lo, counts)
    offs = np.arange(len(li)) - np.repeat(np.cumsum(counts) - counts, counts)
    ri = order[starts + offs]
    pts = np.empty((len(li), C.n), dtype=np.int64)
    pts[:, left_vars] = left[li]
    pts[:, right_vars] = right[ri]
    return pts


def _solve_last_variable(C: CubicPolynomial, P: int, var: int) -> np.ndarray:
    """Zeros of C in [-P, P]^n by enumerating all variables except `var`."""
    n = C.n
    others = [i for i in range(n) if i != var]
    # C as a polynomial in x_var whose coefficients are polynomials in the other variables
    parts: dict[int, dict] = {d: {} for d in range(4)}
    for e, c in C.terms:
        parts[e[var]][tuple(e[i] for i in others)] = c
    polys = [CubicPolynomial.from_dict(n - 1, parts[d]) for d in range(4)]
    lead = max((d for d in range(4) if not polys[d].is_zero()), default=0)
    pure = lead == 3 and polys[3].degree == 0 and polys[2].is_zero() and polys[1].is_zero()
    rest = _box(P, n - 1)
    _check_budget(len(rest) * (1 if pure else 4))
    results = []
    for start in range(0, len(rest), CHUNK):
        block = rest[start : start + CHUNK]
        cols = [block[:, i] for i in range(n - 1)]
        coef = [np.broadcast_to(p.evaluate_grid(cols), (len(block),)) for p in polys]
        if pure:
            # a3 x^3 + a0 = 0 with a constant a3: exact integer cube roots
            a3 = polys[3].terms[0][1]
            num = -coef[0].astype(np.int64)
            idx = np.flatnonzero(num % a3 == 0)
            cube = num[idx] // a3
            root = np.round(np.cbrt(cube.astype(float))).astype(np.int64)
            good = (root**3 == cube) & (np.abs(root) <= P)
            results.append(_assemble(block[idx[good]], var, root[good]))
        else:
            results.append(_roots_generic(block, var, coef, lead, P))
    return np.concatenate(results)


def _assemble(rest: np.ndarray, var: int, xv) -> np.ndarray:
    n = rest.shape[1] + 1
    out = np.empty((len(rest), n), dtype=np.int64)
    others = [i for i in range(n) if i != var]
    out[:, others] = rest
    out[:, var] = xv
    return out


def _roots_generic(block: np.ndarray, var: int, coef: list[np.ndarray], lead: int, P: int) -> np.ndarray:
    """Integer roots in [-P, P] of a0 + a1 x + a2 x^2 + a3 x^3, row by row (vectorised).

    Floating roots only propose candidates; every candidate is verified exactly.
    """
    m = len(block)
    width = block.shape[1] + 1
    found = []
    lead_c = np.asarray(coef[lead])
    degenerate = np.flatnonzero(lead_c == 0) if lead else np.arange(m)
    if len(degenerate):
        found.append(_brute_rows(block[degenerate], var, [np.asarray(c)[degenerate] for c in coef], P))
    rows = np.flatnonzero(lead_c != 0) if lead else np.zeros(0, dtype=np.int64)
    if len(rows):
        a = [np.asarray(c)[rows].astype(float) for c in coef]
        if lead == 1:
            cand = [-a[0] / a[1]]
        else:
            comp = np.zeros((len(rows), lead, lead))
            for k in range(lead):
                comp[:, 0, k] = -a[lead - 1 - k] / a[lead]
            for k in range(1, lead):
                comp[:, k, k - 1] = 1.0
            eig = np.linalg.eigvals(comp)
            cand = [eig[:, k].real for k in range(lead)]
        exact = [np.asarray(c)[rows].astype(object) for c in coef]
        hits = set()
        for r in cand:
            for shift in (-1.0, 0.0, 1.0):
                x = np.round(r) + shift
                idx = np.flatnonzero(np.abs(x) <= P)
                if not len(idx):
                    continue
                xi = x[idx].astype(np.int64).astype(object)
                val = exact[0][idx] + exact[1][idx] * xi + exact[2][idx] * xi**2 + exact[3][idx] * xi**3
                for k in np.flatnonzero(val == 0):
                    hits.add((int(rows[idx[k]]), int(xi[k])))
        if hits:
            ordered = sorted(hits)
            found.append(
                _assemble(block[[h[0] for h in ordered]], var, np.array([h[1] for h in ordered], dtype=np.int64))
            )
    if not found:
        return np.zeros((0, width), dtype=np.int64)
    return np.concatenate(found)


def _brute_rows(block: np.ndarray, var: int, coef: list[np.ndarray], P: int) -> np.ndarray:
    xs = np.arange(-P, P + 1, dtype=np.int64)
    if not len(block):
        return np.zeros((0, block.shape[1] + 1), dtype=np.int64)
    c = [np.asarray(k, dtype=object)[:, None] for k in coef]
    xo = xs.astype(object)[None, :]
    val = c[0] + c[1] * xo + c[2] * xo**2 + c[3] * xo**3
    r, k = np.nonzero(val == 0)
    return _assemble(block[r], var, xs[k])


def integer_zeros(g: CubicPolynomial, P: int, method: str = "auto") -> np.ndarray:
    """All x in Z^n with max |x_i| <= P and g(x) = 0, as an (N, n) array (unordered)."""
    if P < 0:
        raise ValueError("P must be >= 0")
    n = g.n
    if method == "auto":
        blocks = _variable_blocks(g)
        if len(blocks) > 1 and n >= 2 and not g.is_zero():
            method = "split"
        elif n <= 3:
            method = "brute"
        else:
            method = "solve"
    if method == "brute":
        _check_budget((2 * P + 1) ** n)
        pts_all = []
        total = (2 * P + 1) ** n
        axis = np.arange(-P, P + 1, dtype=np.int64)
        for start in range(0, total, CHUNK):
            flat = np.arange(start, min(total, start + CHUNK), dtype=np.int64)
            coords = np.stack(np.unravel_index(flat, (2 * P + 1,) * n), axis=-1)
            pts = axis[coords]
            vals = g.evaluate_grid([pts[:, i] for i in range(n)])
            pts_all.append(pts[np.asarray(vals == 0, dtype=bool)])
        return np.concatenate(pts_all) if pts_all else np.zeros((0, n), dtype=np.int64)
    if method == "split":
        return _solutions_split(g, P, _variable_blocks(g))
    if method == "solve":
        if n == 1:
            return integer_zeros(g, P, "brute")
        var = _pick_variable(g)
        return _solve_last_variable(g, P, var)
    raise ValueError(f"unknown method {method!r}")


def _pick_variable(g: CubicPolynomial) -> int:
    """Prefer a variable carrying a pure cube term (constant leading coefficient)."""
    for i in range(g.n - 1, -1, -1):
        if any(e[i] == 3 for e, _ in g.terms):
            return i
    return g.n - 1


def count_projective(C: CubicPolynomial, P: int, method: str = "auto") -> int:
    """Number of points of the hypersurface C = 0 in P^{n-1}(Q) with height <= P."""
    if not C.is_homogeneous_cubic():
        raise PolynomialError("count_projective needs a homogeneous cubic form")
    if C.n < 2:
        raise PolynomialError("need n >= 2")
    if P < 1:
        raise ValueError("P must be >= 1")
    pts = integer_zeros(C, P, method)
    pts = pts[np.any(pts != 0, axis=1)]
    if not len(pts):
        return 0
    return int(np.count_nonzero(_canonical_primitive_mask(pts)))


def count_projective_result(C: CubicPolynomial, P: int) -> CountResult:
    t0 = time.perf_counter()
    value = count_projective(C, P)
    return CountResult(P, value, time.perf_counter() - t0)


def support_box(w: WeightFunction, P: float) -> int:
    return int(math.floor(w.support_radius * P + 1e-9))


def count_affine_weighted(g: CubicPolynomial, w: WeightFunction, P: float) -> float:
    """N_w(g; P) = sum of w(x/P) over integer zeros x of g (inside the support of w(./P))."""
    if P < 1:
        raise ValueError("P must be >= 1")
    if w.n != g.n:
        raise ValueError("weight and polynomial dimensions differ")
    B = support_box(w, P)
    pts = integer_zeros(g, B)
    if not len(pts):
        return 0.0
    vals = np.asarray(w(pts / P), dtype=float)
    return math.fsum(vals[np.lexsort(pts.T[::-1])])


def lattice_weight_mass(w: WeightFunction, P: float) -> float:
    """sum over x in Z^n of w(x/P)."""
    B = support_box(w, P)
    pts = _box(B, w.n)
    return math.fsum(np.asarray(w(pts / P), dtype=float))


@dataclass(frozen=True)
class GrowthFit:
    exponent: float
    intercept: float
    residual: float


def fit_growth(samples: Sequence[tuple[float, float]]) -> GrowthFit:
    """Least-squares fit of log(count) against log(P)."""
    pos = [(float(P), float(c)) for P, c in samples if c > 0 and P > 0]
    if len(pos) < 3:
        raise ValueError("need at least 3 samples with positive counts")
    x = np.log([p for p, _ in pos])
    y = np.log([c for _, c in pos])
    A = np.stack([x, np.ones_like(x)], axis=1)
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.max(np.abs(A @ np.array([slope, icpt]) - y)))
    return GrowthFit(float(slope), float(icpt), resid)


def primitive_points_projective(n: int, P: int) -> int:
    """#P^{n-1}(Q) points of height <= P, by Mobius inversion over the box count."""
    from .numtheory import mobius

    total = 0
    for d in range(1, P + 1):
        mu = mobius(d)
        if mu:
            total += mu * ((2 * (P // d) + 1) ** n - 1)
    return total // 2
