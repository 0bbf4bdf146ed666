import cmath
import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from cubiclab.archimedean import (
    minor_arc_sum,
    oscillatory_integral,
    orthogonality_count,
    poisson_report,
    weyl_sum,
    weyl_sum_at,
)
from cubiclab.counting import count_affine_weighted
from cubiclab.numtheory import inverse_mod, units_mod
from cubiclab.poly import parse_polynomial
from cubiclab.weights import box_smooth, gamma_bump, product_weight

FERMAT2 = parse_polynomial("x1^3 + x2^3 - 7", 2)
MIXED2 = parse_polynomial("x1^2*x2 + 2*x2^2 - x1 + 3", 2)
W2 = product_weight(2)


def direct_T(alpha, g, w, P):
    B = int(math.ceil(w.support_radius * P))
    total = 0j
    for x in itertools.product(range(-B, B + 1), repeat=g.n):
        wt = float(w(np.array(x, dtype=float) / P))
        if wt:
            total += wt * cmath.exp(2j * math.pi * alpha * g(x))
    return total


def test_weyl_sum_against_direct_loop():
    for alpha in (0.0, 0.137, 1 / 3 + 0.01):
        assert abs(weyl_sum(alpha, MIXED2, W2, 5.0) - direct_T(alpha, MIXED2, W2, 5.0)) < 1e-9


def test_orthogonality_matches_weighted_count():
    for g in (FERMAT2, MIXED2):
        for P in (4.0, 7.0):
            exact = count_affine_weighted(g, W2, P)
            assert abs(orthogonality_count(g, W2, P) - exact) < 1e-6


def test_orthogonality_invariant_under_larger_modulus():
    from cubiclab.archimedean import lattice_data

    M = 2 * lattice_data(FERMAT2, W2, 5.0).bound + 1
    assert abs(orthogonality_count(FERMAT2, W2, 5.0, M) - orthogonality_count(FERMAT2, W2, 5.0, M + 7)) < 1e-8


def test_orthogonality_rejects_small_modulus():
    with pytest.raises(ValueError):
        orthogonality_count(FERMAT2, W2, 5.0, M=3)


def test_constant_polynomial_edge_cases():
    one = parse_polynomial("1", 2)
    zero = parse_polynomial("0", 2)
    assert abs(orthogonality_count(one, W2, 5.0)) < 1e-9
    mass = count_affine_weighted(zero, W2, 5.0)
    assert mass > 0
    assert abs(orthogonality_count(zero, W2, 5.0) - mass) < 1e-9


def test_kernel_and_direct_minor_arc_sums_agree():
    for u, q, z in [(0, 1, 0.003), (1, 5, 0.0), (3, 6, -0.002), (2, 9, 0.001)]:
        a = minor_arc_sum(u, q, z, MIXED2, W2, 5.0, method="kernel")
        b = minor_arc_sum(u, q, z, MIXED2, W2, 5.0, method="direct")
        assert abs(a - b) < 1e-9


def test_minor_arc_sum_small_moduli():
    z = 0.0025
    assert abs(minor_arc_sum(0, 1, z, FERMAT2, W2, 5.0) - weyl_sum(z, FERMAT2, W2, 5.0)) < 1e-9
    assert abs(minor_arc_sum(0, 2, z, FERMAT2, W2, 5.0) - weyl_sum(0.5 + z, FERMAT2, W2, 5.0)) < 1e-9


def test_minor_arc_sum_vectorised_over_z():
    zs = np.array([0.0, 0.001, -0.004])
    vec = minor_arc_sum(2, 7, zs, MIXED2, W2, 4.0)
    for z, v in zip(zs, vec):
        assert abs(v - minor_arc_sum(2, 7, float(z), MIXED2, W2, 4.0)) < 1e-9


@given(st.integers(-50, 50), st.integers(1, 12))
def test_minor_arc_sum_periodic_in_u(u, q):
    a = minor_arc_sum(u, q, 0.001, MIXED2, W2, 3.0)
    b = minor_arc_sum(u + q, q, 0.001, MIXED2, W2, 3.0)
    assert abs(a - b) < 1e-9


def test_weyl_sum_at_matches_float_alpha():
    for a, q in [(1, 3), (2, 7), (5, 12)]:
        assert abs(weyl_sum_at(a, q, 0.0, MIXED2, W2, 4.0) - weyl_sum(a / q, MIXED2, W2, 4.0)) < 1e-8


def test_minor_arc_sum_definition_by_hand():
    u, q, z = 4, 9, 0.0007
    hand = sum(
        cmath.exp(2j * math.pi * (inverse_mod(a, q) * u % q) / q) * direct_T(a / q + z, MIXED2, W2, 3.0)
        for a in units_mod(q)
    )
    assert abs(minor_arc_sum(u, q, z, MIXED2, W2, 3.0) - hand) < 1e-8


def test_integral_at_origin_against_quad():
    one_d = integrate.quad(gamma_bump, -1, 1, epsabs=1e-13)[0]
    for P in (1.0, 6.0):
        val, err = oscillatory_integral(0.0, [0.0, 0.0], FERMAT2, W2, P)
        assert abs(val - (one_d * P) ** 2) < 1e-6 * (one_d * P) ** 2
    # frozen value for P = 6
    assert abs(oscillatory_integral(0.0, [0.0, 0.0], FERMAT2, W2, 6.0)[0].real - 7.0967) < 1e-3


def test_unit_scale_sum_sees_only_the_origin():
    # at P = 1 the open support contains a single lattice point
    for alpha in (0.0, 0.3):
        assert abs(weyl_sum(alpha, FERMAT2, W2, 1.0) - math.exp(-2) * cmath.exp(-14j * math.pi * alpha)) < 1e-12


def test_integral_against_scipy_with_phase():
    g1 = parse_polynomial("x1^3 + x1", 1)
    w1 = product_weight(1)
    P, z, beta = 3.0, 0.004, 0.25

    def f(x, part):
        ph = 2 * math.pi * (z * (x**3 + x) - beta * x)
        return float(gamma_bump(x / P)) * (math.cos(ph) if part == 0 else math.sin(ph))

    re = integrate.quad(f, -P, P, args=(0,), epsabs=1e-12, limit=200)[0]
    im = integrate.quad(f, -P, P, args=(1,), epsabs=1e-12, limit=200)[0]
    val, _ = oscillatory_integral(z, [beta], g1, w1, P)
    assert abs(val - complex(re, im)) < 1e-7


def test_integral_rejects_small_P():
    with pytest.raises(ValueError):
        oscillatory_integral(0.0, [0.0, 0.0], FERMAT2, W2, 0.5)


def test_poisson_reconstruction_small_case():
    g = parse_polynomial("x1^3 + 2*x2^3 + x1", 2)
    w = box_smooth(2, 1.0)
    rep = poisson_report(1, 3, 0.0005, g, w, 3.0)
    assert rep.residual < 1e-3
    assert rep.quadrature_error < 1e-3
