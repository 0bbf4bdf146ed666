"""Exact LP certificates for the dyadic exponent bookkeeping of the minor-arc estimate.

Every quantity is written as a power of P.  With R = P^rho, R_i = P^rho_i, t = P^tau and
V = P^v, a case bound is P^{objective}; the case is certified at n when the LP maximum of
the objective over the admissible region is at most n - 2.  The exponent of H is taken to
be 0 throughout (it is absorbed into H^theta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .simplex import OPTIMAL, UNBOUNDED, DualCertificate, check_dual, solve_dual, solve_lp

VARS = ("rho", "rho0", "rho1", "rho2", "rho3", "tau", "v")
F = Fraction


class Lin:
    """Affine expression in the exponent variables with rational coefficients."""

    __slots__ = ("coef", "const")

    def __init__(self, coef: dict | None = None, const=0):
        self.coef = {k: F(v) for k, v in (coef or {}).items() if v != 0}
        self.const = F(const)

    @staticmethod
    def var(name: str) -> "Lin":
        return Lin({name: 1})

    def __add__(self, other) -> "Lin":
        other = other if isinstance(other, Lin) else Lin({}, other)
        keys = set(self.coef) | set(other.coef)
        return Lin({k: self.coef.get(k, 0) + other.coef.get(k, 0) for k in keys}, self.const + other.const)

    __radd__ = __add__

    def __neg__(self) -> "Lin":
        return Lin({k: -v for k, v in self.coef.items()}, -self.const)

    def __sub__(self, other) -> "Lin":
        return self + (-(other if isinstance(other, Lin) else Lin({}, other)))

    def __rsub__(self, other) -> "Lin":
        return (-self) + other

    def __mul__(self, k) -> "Lin":
        k = F(k)
        return Lin({a: b * k for a, b in self.coef.items()}, self.const * k)

    __rmul__ = __mul__

    def __truediv__(self, k) -> "Lin":
        return self * (1 / F(k))

    def vector(self) -> list[Fraction]:
        return [self.coef.get(k, F(0)) for k in VARS]

    def at(self, point: dict) -> Fraction:
        return self.const + sum((c * point[k] for k, c in self.coef.items()), F(0))

    def __repr__(self) -> str:
        parts = [f"{v}*{k}" for k, v in sorted(self.coef.items())]
        return " + ".join(parts + [str(self.const)])


rho, rho0, rho1, rho2, rho3, tau, v = (Lin.var(k) for k in VARS)
CUBE = 2 * rho2 + rho3  # log of R_2^2 R_3


@dataclass(frozen=True)
class Constraint:
    expr: Lin  # expr <= 0, or expr == 0 when equality
    equality: bool = False
    label: str = ""


def le(lhs, rhs, label: str = "") -> Constraint:
    return Constraint(Lin({}, 0) + lhs - rhs, False, label)


def eq(lhs, rhs, label: str = "") -> Constraint:
    return Constraint(Lin({}, 0) + lhs - rhs, True, label)


def base_constraints(regime: str, rho_cap: bool = True) -> list[Constraint]:
    """Shared constraints: dyadic sizes, d | c, q = b1 b2^2 c^2 d, R <= P^{3/2}, and the arc size."""
    out = [le(0, x, f"{n} >= 0") for x, n in ((rho0, "rho0"), (rho1, "rho1"), (rho2, "rho2"), (rho3, "rho3"))]
    out += [
        le(rho3, rho2, "R3 << R2"),
        eq(rho, rho0 + 2 * rho1 + 2 * rho2 + rho3, "R = R0 R1^2 R2^2 R3"),
        le(0, rho, "R >= 1"),
        le(tau, -rho - F(3, 2), "t <= (R P^{3/2})^{-1}"),
    ]
    if rho_cap:
        out.append(le(rho, F(3, 2), "R <= P^{3/2}"))
    if regime == "sigma2":
        out += [eq(tau, -rho - F(3, 2), "t ~ (R P^{3/2})^{-1}"), eq(v, rho / 2 - F(1, 4), "V ~ R^{1/2} P^{-1/4}")]
    elif regime == "tlarge":
        out += [le(-3, tau, "t >= P^{-3}"), eq(v, rho + tau / 2 + F(1, 2), "V ~ R t^{1/2} P^{1/2}")]
    elif regime == "tsmall":
        out += [le(tau, -3, "t <= P^{-3}"), eq(v, rho - 1, "V ~ R/P")]
    else:
        raise ValueError(f"unknown regime {regime!r}")
    return out


def v_regime(kind: str) -> list[Constraint]:
    if kind == "large":
        return [le(rho2, v, "V >= R2")]
    if kind == "mid":
        return [le(CUBE / 3, v, "V >= (R2^2 R3)^{1/3}"), le(v, rho2, "V <= R2")]
    if kind == "small":
        return [le(v, CUBE / 3, "V <= (R2^2 R3)^{1/3}")]
    raise ValueError(kind)


@dataclass(frozen=True)
class CaseSpec:
    name: str
    family: str
    bound: str  # the case bound as a formula in P, R, R_i, t, V
    regime: str
    v_kind: str | None
    objective: Callable[[Fraction], Lin]
    n_min: int = 5
    n_max: int | None = None
    extra: tuple[Constraint, ...] = ()
    weights: tuple[Fraction, ...] | None = None

    def applies(self, n: int) -> bool:
        return n >= self.n_min and (self.n_max is None or n <= self.n_max)

    def constraints(self, rho_cap: bool = True) -> list[Constraint]:
        cons = base_constraints(self.regime, rho_cap)
        if self.v_kind:
            cons += v_regime(self.v_kind)
        return cons + list(self.extra)


# ---- bound pieces: each returns the P-exponent as a Lin at a given n


def _s2_prefix(n) -> Lin:
    # P^{n-3} R^{1-n/2} times the modulus count R0 R1 R2^{1/2} R3^{1/2}
    return (n - 3) + (1 - F(n) / 2) * rho + rho0 + rho1 + rho2 / 2 + rho3 / 2


def _s2b_prefix(n) -> Lin:
    # P^{n-3} R^{2-n/2} / (R2^{3/2} R3^{1/2})
    return (n - 3) + (2 - F(n) / 2) * rho - F(3, 2) * rho2 - rho3 / 2


def _s1b_prefix(n) -> Lin:
    # P^n t R^{2-n/2} / (R2^{3/2} R3^{1/2})
    return n + tau + (2 - F(n) / 2) * rho - F(3, 2) * rho2 - rho3 / 2


def _s1a_prefix(n) -> Lin:
    # P^n t R^{3/2-n/2}
    return n + tau + (F(3, 2) - F(n) / 2) * rho


def _M2_large(n) -> Lin:  # R2^n (V/R2)^{n-3/2}
    return F(3, 2) * rho2 + (F(n) - F(3, 2)) * v


def _M2M3_mid(n) -> Lin:  # M2^{3/10} M3^{7/10} with M2 <= R2^n, M3 << V^n
    return F(3, 10) * F(n) * rho2 + F(7, 10) * F(n) * v


def _birch_t(n) -> Lin:  # M4 = R^{3n/8} (t P^3)^{-n/8}
    return F(3 * n, 8) * rho - F(n, 8) * (tau + 3)


def _interp(weights, terms) -> Lin:
    return sum((w * t for w, t in zip(weights, terms)), Lin())


W_MID = (F(3, 10), F(7, 10))
W_TLARGE = (F(1, 10), F(1, 5), F(7, 10))
W_TSMALL = (F(1, 10), F(11, 30), F(8, 15))
W_CUBE = (F(1, 3), F(2, 3))


def _catalog() -> list[CaseSpec]:
    cases: list[CaseSpec] = []
    add = cases.append

    # modulus contribution with t ~ (RQ)^{-1}: term W^n M1
    add(CaseSpec(
        "S2a-Vterm", "Sigma2a", "P^{n-3} R^{3/2-n/2} V^n", "sigma2", None,
        lambda n: (n - 3) + (F(3, 2) - F(n) / 2) * rho + n * v,
    ))
    add(CaseSpec(
        "S2a-cubeterm", "Sigma2a", "P^{n-3} R^{3/2-n/2} (R2^2 R3)^{n/3}", "sigma2", None,
        lambda n: (n - 3) + (F(3, 2) - F(n) / 2) * rho + F(n, 3) * CUBE,
    ))
    # term min{M2, M3} with t ~ (RQ)^{-1}
    add(CaseSpec(
        "S2b-largeV", "Sigma2b", "P^{n-3} R^{1-n/2} R0 R1 R2^{1/2} R3^{1/2} M2, M2 = R2^{3/2} V^{n-3/2}",
        "sigma2", "large", lambda n: _s2_prefix(n) + _M2_large(n),
    ))
    add(CaseSpec(
        "S2b-midV", "Sigma2b", "P^{n-3} R^{2-n/2} R2^{-3/2} R3^{-1/2} M2^{3/10} M3^{7/10}",
        "sigma2", "mid", lambda n: _s2b_prefix(n) + _M2M3_mid(n), weights=W_MID,
    ))
    poisson_small = lambda n: _s2b_prefix(n) + F(n, 8) + F(n, 2) * CUBE - F(n, 4) * rho  # noqa: E731
    weyl_small = lambda n: _s2b_prefix(n) + F(n, 2) * rho - F(3 * n, 16)  # noqa: E731
    add(CaseSpec(
        "S2b-smallV-poisson", "Sigma2b", "P^{n-3} R^2 R2^{-3/2} R3^{-1/2} P^{n/8} (R2^2 R3)^{n/2} R^{-3n/4}",
        "sigma2", "small", poisson_small, n_min=5, n_max=5,
    ))
    add(CaseSpec(
        "S2b-smallV-weyl", "Sigma2b", "P^{n-3} R^2 R2^{-3/2} R3^{-1/2} P^{-3n/16}, R <= P",
        "sigma2", "small", weyl_small, n_min=6, extra=(le(rho, 1, "R <= P"),),
    ))
    add(CaseSpec(
        "S2b-smallV-poisson-largeR", "Sigma2b",
        "P^{n-3} R^2 R2^{-3/2} R3^{-1/2} P^{n/8} (R2^2 R3)^{n/2} R^{-3n/4}, R >= P",
        "sigma2", "small", poisson_small, n_min=6, extra=(le(1, rho, "R >= P"),),
    ))

    # t ranging below (RQ)^{-1}: term with W^n
    s1a_v = lambda n: _s1a_prefix(n) + n * v  # noqa: E731
    s1a_cube = lambda n: _s1a_prefix(n) - rho2 / 2 + F(n, 3) * CUBE  # noqa: E731
    s1a_birch = lambda n: n + (2 - F(n, 8)) * rho + (1 - F(n, 8)) * tau - F(3, 2) * rho2 - rho3 / 2 - F(3 * n, 8)  # noqa: E731
    add(CaseSpec("S1a-Vterm-tlarge", "Sigma1a", "P^n t R^{3/2-n/2} V^n", "tlarge", None, s1a_v))
    add(CaseSpec("S1a-Vterm-tsmall", "Sigma1a", "P^n t R^{3/2-n/2} V^n", "tsmall", None, s1a_v))
    add(CaseSpec(
        "S1a-cubeterm-tlarge", "Sigma1a",
        "A^{1/3} B^{2/3}, A = P^n t R^{3/2-n/2} R2^{-1/2} (R2^2 R3)^{n/3}, "
        "B = P^n R^{2-n/8} t^{1-n/8} R2^{-3/2} R3^{-1/2} P^{-3n/8}",
        "tlarge", None, lambda n: _interp(W_CUBE, (s1a_cube(n), s1a_birch(n))), weights=W_CUBE,
    ))
    add(CaseSpec(
        "S1a-cubeterm-tsmall", "Sigma1a", "P^n t R^{3/2-n/2} R2^{-1/2} (R2^2 R3)^{n/3}",
        "tsmall", None, s1a_cube,
    ))

    # t ranging below (RQ)^{-1}: term min{M2, M3, M4}
    M3_small = lambda n: F(n, 2) * (CUBE - v)  # noqa: E731  (R2^2 R3 / V)^{n/2}
    M2_small = lambda n: F(n) * rho2  # noqa: E731
    add(CaseSpec(
        "S1b-tlarge-largeV", "Sigma1b", "P^n t R^{2-n/2} R2^{-3/2} R3^{-1/2} R2^{3/2} V^{n-3/2}",
        "tlarge", "large", lambda n: _s1b_prefix(n) + _M2_large(n),
    ))
    add(CaseSpec(
        "S1b-tlarge-midV", "Sigma1b", "P^n t R^{2-n/2} R2^{-3/2} R3^{-1/2} M2^{3/10} M3^{7/10}",
        "tlarge", "mid", lambda n: _s1b_prefix(n) + _M2M3_mid(n), weights=W_MID,
    ))
    add(CaseSpec(
        "S1b-tlarge-smallV-interp", "Sigma1b",
        "P^n t R^{2-n/2} R2^{-3/2} R3^{-1/2} A^{1/10} B^{1/5} C^{7/10}, A = R2^n, B = (R2^2 R3/V)^{n/2}, "
        "C = R^{3n/8} (tP^3)^{-n/8}",
        "tlarge", "small",
        lambda n: _s1b_prefix(n) + _interp(W_TLARGE, (M2_small(n), M3_small(n), _birch_t(n))),
        n_min=5, n_max=10, weights=W_TLARGE,
    ))
    add(CaseSpec(
        "S1b-tlarge-smallV-weyl", "Sigma1b", "P^n t R^{2-n/2} R2^{-3/2} R3^{-1/2} R^{3n/8} (tP^3)^{-n/8}",
        "tlarge", "small", lambda n: _s1b_prefix(n) + _birch_t(n), n_min=11,
    ))
    add(CaseSpec(
        "S1b-tsmall-largeV", "Sigma1b", "P^n t R^{2-n/2} R2^{-3/2} R3^{-1/2} R2^{3/2} V^{n-3/2}",
        "tsmall", "large", lambda n: _s1b_prefix(n) + _M2_large(n),
    ))
    add(CaseSpec(
        "S1b-tsmall-midV", "Sigma1b", "P^n t R^{2-n/2} R2^{-3/2} R3^{-1/2} M2^{3/10} M3^{7/10}",
        "tsmall", "mid", lambda n: _s1b_prefix(n) + _M2M3_mid(n), weights=W_MID,
    ))
    tsmall_interp = lambda n: _s1b_prefix(n) + _interp(  # noqa: E731
        W_TSMALL, (M2_small(n), M3_small(n), F(3 * n, 8) * rho)
    )
    tsmall_C = lambda n: _s1b_prefix(n) + F(3 * n, 8) * rho  # noqa: E731
    small_bound = "P^n t R^{2-n/2} R2^{-3/2} R3^{-1/2} A^{1/10} B^{11/30} C^{8/15}, A = R2^n, B = (P R2^2 R3/R)^{n/2}, C = R^{3n/8}"
    add(CaseSpec(
        "S1b-tsmall-smallV-final", "Sigma1b", small_bound, "tsmall", "small", tsmall_interp,
        n_min=5, n_max=5, weights=W_TSMALL,
    ))
    add(CaseSpec(
        "S1b-tsmall-smallV-interp-largeR", "Sigma1b", small_bound + ", R >= P^{7/10}", "tsmall", "small",
        tsmall_interp, n_min=6, n_max=15, extra=(le(F(7, 10), rho, "R >= P^{7/10}"),), weights=W_TSMALL,
    ))
    add(CaseSpec(
        "S1b-tsmall-smallV-weyl-smallR", "Sigma1b", "P^n t R^{2-n/2} R2^{-3/2} R3^{-1/2} R^{3n/8}, R <= P^{7/10}",
        "tsmall", "small", tsmall_C, n_min=6, n_max=15, extra=(le(rho, F(7, 10), "R <= P^{7/10}"),),
    ))
    add(CaseSpec(
        "S1b-tsmall-smallV-weyl", "Sigma1b", "P^n t R^{2-n/2} R2^{-3/2} R3^{-1/2} R^{3n/8}",
        "tsmall", "small", tsmall_C, n_min=16,
    ))
    return cases


CATALOG: tuple[CaseSpec, ...] = tuple(_catalog())

_ALIASES = {"Σ₂ₐ": "S2a", "Σ₂ᵦ": "S2b", "Σ₁ₐ": "S1a", "Σ₁ᵦ": "S1b", "Σ₂b": "S2b", "Σ₁b": "S1b"}
_SHORT_NAMES = {"S1b-final-smallV": "S1b-tsmall-smallV-final"}


def catalog() -> list[CaseSpec]:
    return list(CATALOG)


def get_case(name: str) -> CaseSpec:
    for k, val in _ALIASES.items():
        name = name.replace(k, val)
    name = _SHORT_NAMES.get(name, name)
    for case in CATALOG:
        if case.name == name:
            return case
    raise KeyError(f"unknown case {name!r}")


# ---------------------------------------------------------------- certification


class EncodingError(RuntimeError):
    """The case LP is unbounded: the constraint set fails to confine the exponents."""


@dataclass(frozen=True)
class CaseCertificate:
    case: str
    n: int
    optimum: Fraction | None
    target: Fraction
    vertex: dict | None
    certified: bool
    infeasible: bool = False
    dual: DualCertificate | None = field(default=None, compare=False)
    dual_verified: bool = False

    @property
    def margin(self) -> Fraction | None:
        return None if self.optimum is None else self.target - self.optimum

    def as_dict(self) -> dict:
        return {
            "case": self.case,
            "n": self.n,
            "optimum": str(self.optimum),
            "target": str(self.target),
            "margin": str(self.margin),
            "certified": self.certified,
            "infeasible": self.infeasible,
            "dual_verified": self.dual_verified,
            "vertex": {k: str(x) for k, x in (self.vertex or {}).items()},
        }


def lp_data(case: CaseSpec, n: int, rho_cap: bool = True, order: Sequence[int] | None = None):
    obj = case.objective(F(n))
    cons = case.constraints(rho_cap)
    if order is not None:
        cons = [cons[i] for i in order]
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for c in cons:
        row, rhs = c.expr.vector(), -c.expr.const
        if c.equality:
            A_eq.append(row)
            b_eq.append(rhs)
        else:
            A_ub.append(row)
            b_ub.append(rhs)
    return obj, A_ub, b_ub, A_eq, b_eq


def certify_case(
    case: CaseSpec, n: int, rho_cap: bool = True, force: bool = False, order: Sequence[int] | None = None
) -> CaseCertificate:
    """Maximise the case exponent exactly; certified iff the maximum is <= n - 2."""
    if not force and not case.applies(n):
        raise ValueError(f"case {case.name} is stated for n in [{case.n_min}, {case.n_max or 'inf'}]")
    obj, A_ub, b_ub, A_eq, b_eq = lp_data(case, n, rho_cap, order)
    c = obj.vector()
    res = solve_lp(c, A_ub, b_ub, A_eq, b_eq)
    target = F(n - 2)
    if res.status == UNBOUNDED:
        raise EncodingError(f"{case.name} at n={n} is unbounded")
    if res.status != OPTIMAL:
        return CaseCertificate(case.name, n, None, target, None, True, infeasible=True)
    optimum = res.value + obj.const
    vertex = dict(zip(VARS, res.x))
    dual = solve_dual(c, A_ub, b_ub, A_eq, b_eq)
    ok = dual is not None and check_dual(dual, c, A_ub, b_ub, A_eq, b_eq, res.value)
    return CaseCertificate(case.name, n, optimum, target, vertex, optimum <= target, False, dual, ok)


def vertex_residuals(case: CaseSpec, cert: CaseCertificate) -> list[Fraction]:
    """Constraint violations at the optimiser (all must be zero)."""
    out = []
    for c in case.constraints():
        val = c.expr.at(cert.vertex)
        out.append(abs(val) if c.equality else max(val, F(0)))
    return out


@dataclass(frozen=True)
class SweepResult:
    case: str
    certificates: tuple[CaseCertificate, ...]

    @property
    def smallest_certified(self) -> int | None:
        return next((c.n for c in self.certificates if c.certified), None)

    @property
    def all_certified(self) -> bool:
        return all(c.certified for c in self.certificates)


def sweep(case: CaseSpec, n_range: Iterable[int]) -> SweepResult:
    ns = [n for n in n_range]
    if any(n < 4 or n > 60 for n in ns):
        raise ValueError("n must lie in [4, 60]")
    return SweepResult(case.name, tuple(certify_case(case, n) for n in ns if case.applies(n)))


def rho_neutral_threshold(case: CaseSpec, n_range: Iterable[int]) -> int | None:
    """Smallest n at which the optimum is already attained with R fixed at 1 (rho = 0)."""
    for n in n_range:
        full = certify_case(case, n, force=True)
        pinned = CaseSpec(case.name, case.family, case.bound, case.regime, case.v_kind, case.objective,
                          case.n_min, case.n_max, case.extra + (eq(rho, 0, "rho = 0"),), case.weights)
        fixed = certify_case(pinned, n, force=True)
        if fixed.optimum is not None and fixed.optimum == full.optimum:
            return n
    return None


def interpolate_min(values: Sequence[float], weights: Sequence) -> tuple[float, bool]:
    """(prod values_i^{w_i}, min(values) <= that product)."""
    if len(values) != len(weights):
        raise ValueError("values and weights differ in length")
    if any(x <= 0 for x in values):
        raise ValueError("values must be positive")
    ws = [F(w) for w in weights]
    if any(w < 0 for w in ws) or sum(ws) != 1:
        raise ValueError("weights must be non-negative and sum to 1")
    logs = [math.log(x) for x in values]
    bound = math.exp(sum(float(w) * lg for w, lg in zip(ws, logs)))
    lo = min(logs)
    # sum w_i (log v_i - log min) is a sum of non-negative terms
    holds = sum(float(w) * (lg - lo) for w, lg in zip(ws, logs)) >= 0
    return bound, holds
