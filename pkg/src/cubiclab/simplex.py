"""Exact two-phase simplex over the rationals with Bland's anti-cycling rule."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

Number = Fraction | int

OPTIMAL = "optimal"
UNBOUNDED = "unbounded"
INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class LPResult:
    status: str
    x: tuple[Fraction, ...] | None
    value: Fraction | None


def _F(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


def _pivot(T: list[list[Fraction]], basis: list[int], r: int, c: int) -> None:
    pr = T[r]
    inv = 1 / pr[c]
    T[r] = pr = [v * inv for v in pr]
    for i, row in enumerate(T):
        if i != r and row[c] != 0:
            f = row[c]
            T[i] = [a - f * b for a, b in zip(row, pr)]
    basis[r] = c


def _simplex(T: list[list[Fraction]], basis: list[int], allowed: Sequence[bool]) -> str:
    """Minimise the objective held in the last row of T (reduced costs, -value in last column)."""
    m = len(T) - 1
    ncols = len(T[0]) - 1
    while True:
        obj = T[-1]
        enter = next((j for j in range(ncols) if allowed[j] and obj[j] < 0), None)
        if enter is None:
            return OPTIMAL
        best = None
        leave = None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            return UNBOUNDED
        _pivot(T, basis, leave, enter)


def solve_lp(
    c: Sequence[Number],
    A_ub: Sequence[Sequence[Number]] = (),
    b_ub: Sequence[Number] = (),
    A_eq: Sequence[Sequence[Number]] = (),
    b_eq: Sequence[Number] = (),
    nonneg: Sequence[bool] | None = None,
) -> LPResult:
    """Maximise c.x subject to A_ub x <= b_ub and A_eq x = b_eq.

    Variables are free unless flagged in ``nonneg``.
    """
    nv = len(c)
    if nonneg is None:
        nonneg = [False] * nv
    # column map: each free variable becomes x+ - x-
    cols: list[tuple[int, int]] = []
    for j in range(nv):
        cols.append((j, 1))
        if not nonneg[j]:
            cols.append((j, -1))
    rows: list[tuple[list[Fraction], Fraction]] = []
    n_ub = len(A_ub)
    n_slack = n_ub
    for i, (a, b) in enumerate(zip(A_ub, b_ub)):
        row = [_F(a[j]) * s for j, s in cols] + [Fraction(int(k == i)) for k in range(n_slack)]
        rows.append((row, _F(b)))
    for a, b in zip(A_eq, b_eq):
        rows.append(([_F(a[j]) * s for j, s in cols] + [Fraction(0)] * n_slack, _F(b)))
    m = len(rows)
    nstruct = len(cols) + n_slack
    # phase 1 with one artificial per row
    T = []
    for i, (row, b) in enumerate(rows):
        if b < 0:
            row, b = [-v for v in row], -b
        T.append(row + [Fraction(int(k == i)) for k in range(m)] + [b])
    basis = [nstruct + i for i in range(m)]
    obj = [Fraction(0)] * (nstruct + m + 1)
    for row in T:
        for k in range(nstruct):
            obj[k] -= row[k]
        obj[-1] -= row[-1]
    T.append(obj)
    _simplex(T, basis, [True] * nstruct + [False] * m)
    if T[-1][-1] != 0:
        return LPResult(INFEASIBLE, None, None)
    # drive artificials out of the basis; drop redundant rows
    i = 0
    while i < len(basis):
        if basis[i] >= nstruct:
            piv = next((k for k in range(nstruct) if T[i][k] != 0), None)
            if piv is None:
                del T[i]
                del basis[i]
                continue
            _pivot(T, basis, i, piv)
        i += 1
    # phase 2: minimise -c
    cost = [-_F(c[j]) * s for j, s in cols] + [Fraction(0)] * n_slack
    T = [row[:nstruct] + [row[-1]] for row in T[:-1]]
    obj = cost + [Fraction(0)]
    for r, bcol in enumerate(basis):
        f = obj[bcol]
        if f != 0:
            obj = [a - f * b for a, b in zip(obj, T[r])]
    T.append(obj)
    status = _simplex(T, basis, [True] * nstruct)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, None, None)
    values = [Fraction(0)] * nstruct
    for r, bcol in enumerate(basis):
        values[bcol] = T[r][-1]
    x = [Fraction(0)] * nv
    for k, (j, s) in enumerate(cols):
        x[j] += s * values[k]
    value = sum((_F(c[j]) * x[j] for j in range(nv)), Fraction(0))
    return LPResult(OPTIMAL, tuple(x), value)


@dataclass(frozen=True)
class DualCertificate:
    y_ub: tuple[Fraction, ...]
    y_eq: tuple[Fraction, ...]
    value: Fraction


def solve_dual(
    c: Sequence[Number],
    A_ub: Sequence[Sequence[Number]],
    b_ub: Sequence[Number],
    A_eq: Sequence[Sequence[Number]],
    b_eq: Sequence[Number],
) -> DualCertificate | None:
    """Minimise b_ub.y + b_eq.l over y >= 0 with A_ub^T y + A_eq^T l = c (primal variables free)."""
    nv = len(c)
    k_ub, k_eq = len(A_ub), len(A_eq)
    obj = [-_F(b) for b in b_ub] + [-_F(b) for b in b_eq]
    rows = [[_F(A_ub[i][j]) for i in range(k_ub)] + [_F(A_eq[i][j]) for i in range(k_eq)] for j in range(nv)]
    res = solve_lp(obj, A_eq=rows, b_eq=list(c), nonneg=[True] * k_ub + [False] * k_eq)
    if res.status != OPTIMAL:
        return None
    return DualCertificate(res.x[:k_ub], res.x[k_ub:], -res.value)


def check_dual(
    cert: DualCertificate,
    c: Sequence[Number],
    A_ub: Sequence[Sequence[Number]],
    b_ub: Sequence[Number],
    A_eq: Sequence[Sequence[Number]],
    b_eq: Sequence[Number],
    primal_value: Fraction,
) -> bool:
    """Exact weak-duality witness: y >= 0, A^T y = c and b.y equals the primal optimum."""
    if any(y < 0 for y in cert.y_ub):
        return False
    for j in range(len(c)):
        lhs = sum((_F(A_ub[i][j]) * cert.y_ub[i] for i in range(len(A_ub))), Fraction(0))
        lhs += sum((_F(A_eq[i][j]) * cert.y_eq[i] for i in range(len(A_eq))), Fraction(0))
        if lhs != _F(c[j]):
            return False
    val = sum((_F(b) * y for b, y in zip(b_ub, cert.y_ub)), Fraction(0))
    val += sum((_F(b) * y for b, y in zip(b_eq, cert.y_eq)), Fraction(0))
    return val == primal_value
