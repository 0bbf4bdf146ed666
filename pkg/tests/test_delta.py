import math

import numpy as np
import pytest
from scipy import integrate

from cubiclab.archimedean import weyl_sum
from cubiclab.counting import count_affine_weighted
from cubiclab.delta import (
    IntegrationError,
    adaptive_simpson,
    bound_functionals,
    default_grid,
    delta_check,
    error_majorant,
    main_term,
    main_term_closed_form,
    main_term_complex,
    proposition1_report,
)
from cubiclab.poly import parse_polynomial
from cubiclab.weights import product_weight

G2 = parse_polynomial("x1^3 + 2*x2^3 - 3", 2)
W2 = product_weight(2)


def test_simpson_against_quad():
    f = lambda x: np.exp(2j * np.pi * 3.3 * x) * (1 + x**2)
    ref_re = integrate.quad(lambda x: math.cos(2 * math.pi * 3.3 * x) * (1 + x * x), -1, 0.7)[0]
    ref_im = integrate.quad(lambda x: math.sin(2 * math.pi * 3.3 * x) * (1 + x * x), -1, 0.7)[0]
    assert abs(adaptive_simpson(f, -1, 0.7, 1e-10) - complex(ref_re, ref_im)) < 1e-8


def test_simpson_depth_guard():
    with pytest.raises(IntegrationError):
        adaptive_simpson(lambda x: np.where(x > 0.3, np.nan, 0.0) + 0j, 0.0, 1.0, 1e-6)


@pytest.mark.parametrize("Q", [1, 3, 6])
def test_main_term_against_closed_form(Q):
    a = main_term(G2, W2, 5.0, Q)
    b = main_term_closed_form(G2, W2, 5.0, Q)
    assert abs(a - b) <= 1e-4 * max(1.0, abs(b))


def test_main_term_Q1_is_twice_the_count():
    N = count_affine_weighted(G2, W2, 5.0)
    assert abs(main_term(G2, W2, 5.0, 1, rtol=1e-7) - 2 * N) < 1e-5 * max(1.0, 2 * N)


def test_main_term_is_real():
    v = main_term_complex(G2, W2, 5.0, 4, rtol=1e-8)
    assert abs(v.imag) < 1e-9 * max(1.0, abs(v))


def test_main_term_rejects_Q0():
    with pytest.raises(ValueError):
        main_term(G2, W2, 5.0, 0)


def test_error_majorant_Q1_is_scan_of_T():
    zs = np.concatenate([np.linspace(0.5, 1, 9), -np.linspace(0.5, 1, 9)])
    scan = max(abs(weyl_sum(float(z), G2, W2, 5.0)) for z in zs)
    assert abs(error_majorant(G2, W2, 5.0, 1) - scan) < 1e-9
    assert error_majorant(G2, W2, 5.0, 3) >= 0


def test_decomposition_constant_at_desk_scale():
    consts = []
    for P in (4.0, 6.0):
        chk = delta_check(G2, W2, P, 6)
        assert chk.E >= 0
        consts.append(chk.constant)
    assert max(consts) <= 10


def test_Q_doubling_trends_toward_count():
    N = count_affine_weighted(G2, W2, 5.0)
    gaps = [abs(main_term_closed_form(G2, W2, 5.0, Q) - N) for Q in (3, 6, 12)]
    assert gaps[-1] < gaps[0]


def test_functionals_example():
    P = 16.0
    F = bound_functionals(4, P**-3, P, 1.0, 2)
    assert (F.decomposition.b2, F.decomposition.c, F.decomposition.d) == (2, 1, 1)
    assert math.isclose(F.V, 0.25)
    assert math.isclose(F.W, 1.25)


def test_functionals_zero_z_and_M1():
    F = bound_functionals(6, 0.0, 10.0, 1.0, 3)
    assert math.isclose(F.V, 0.6)
    assert F.M1 == 1.0
    F = bound_functionals(15, 0.0, 10.0, 1.0, 3, N_gcd=7)
    assert math.isclose(F.M1, 15**-0.5)
    F = bound_functionals(15, 0.0, 10.0, 1.0, 3, N_gcd=5)
    assert math.isclose(F.M1, 3**-0.5)


def test_functionals_formulas_and_monotonicity():
    q, P, n = 72, 30.0, 4
    zmax = 1 / (q * P**1.5)
    prev = 0.0
    for k in range(0, 11):
        z = zmax * k / 10
        F = bound_functionals(q, z, P, 2.0, n)
        D = F.decomposition
        V = q / P * max(1, math.sqrt(z * P**3))
        assert math.isclose(F.V, V)
        assert math.isclose(F.W, V + (D.c**2 * D.d) ** (1 / 3))
        assert math.isclose(F.M2, D.c**n * (1 + V / D.c) ** (n - 1.5))
        assert math.isclose(F.M3, V**n * (1 + D.c**2 * D.d / V**3) ** (n / 2))
        assert min(F.V, F.W, F.M1, F.M2, F.M3, F.M4) >= 0
        assert F.min_term() <= F.W**n
        assert F.V >= prev
        prev = F.V


def test_functionals_preconditions():
    with pytest.raises(ValueError):
        bound_functionals(3, 1.0, 10.0, 1.0, 2)
    with pytest.raises(ValueError):
        bound_functionals(0, 0.0, 10.0, 1.0, 2)


def test_prop1_report_rows():
    rows = proposition1_report(G2, W2, 8.0, H=8.0)
    assert len(rows) == len(default_grid(8.0))
    assert all(math.isfinite(r.ratio) and r.ratio > 0 for r in rows)
    by_key = {}
    for r in rows:
        by_key.setdefault((r.q, r.z), {})[r.u] = r
    for (q, z), pair in by_key.items():
        a, b = pair[0], pair[1]
        assert (a.V, a.W, a.M2, a.M3) == (b.V, b.W, b.M2, b.M3)


def test_prop1_trivial_bound_comparison():
    # M1 <= 1 and min <= W^n: the ratio against the trivial form W^n + W^n is no smaller
    rows = proposition1_report(G2, W2, 8.0, H=8.0)
    for r in rows:
        trivial = 8.0 * 8.0**2.25 * 2 * r.W**2
        assert r.rhs <= trivial * (1 + 1e-12)


def test_prop1_errors():
    with pytest.raises(ValueError):
        proposition1_report(G2, W2, 8.0, H=8.0, grid=[])
    with pytest.raises(ValueError):
        proposition1_report(G2, W2, 8.0, H=100.0)
