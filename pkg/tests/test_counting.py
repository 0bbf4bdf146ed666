import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cubiclab.counting import (
    count_affine_weighted,
    count_projective,
    fit_growth,
    integer_zeros,
    lattice_weight_mass,
    primitive_points_projective,
)
from cubiclab.poly import CubicPolynomial, PolynomialError, parse_polynomial, random_polynomial
from cubiclab.weights import product_weight


def brute_projective(C, P):
    seen = 0
    for x in itertools.product(range(-P, P + 1), repeat=C.n):
        if not any(x) or math.gcd(*x) != 1:
            continue
        if next(v for v in x if v) < 0:
            continue
        seen += C(x) == 0
    return seen


def test_projective_examples():
    assert count_projective(CubicPolynomial.fermat(3), 1) == 3
    assert count_projective(parse_polynomial("x1^3", 2), 1) == 1
    assert count_projective(parse_polynomial("x1^3 + 2*x2^3 + 4*x3^3", 3), 1) == 0
    with pytest.raises(PolynomialError):
        count_projective(parse_polynomial("x1^3 + 1", 1), 3)


@given(st.integers(0, 2**32 - 1), st.integers(2, 4), st.integers(1, 4))
def test_projective_matches_brute(seed, n, P):
    C = random_polynomial(np.random.default_rng(seed), n, 2, homogeneous=True, density=0.5)
    if C.is_zero():
        return
    assert count_projective(C, P) == brute_projective(C, P)


@given(st.integers(0, 2**32 - 1), st.integers(2, 4), st.integers(1, 5))
def test_zero_finders_agree(seed, n, P):
    g = random_polynomial(np.random.default_rng(seed), n, 3, density=0.5)
    ref = {tuple(r) for r in integer_zeros(g, P, "brute").tolist()}
    assert {tuple(r) for r in integer_zeros(g, P, "solve").tolist()} == ref
    assert {tuple(r) for r in integer_zeros(g, P).tolist()} == ref


def test_projective_invariances(rng):
    C = parse_polynomial("x1^3 + 2*x2^3 - x3^3 + x1*x2*x3", 3)
    base = count_projective(C, 6)
    assert count_projective(C.scale(-1), 6) == base
    for perm in itertools.permutations(range(3)):
        assert count_projective(C.permute(perm), 6) == base


def test_weighted_example():
    g = parse_polynomial("x1^3 + x2^3 - 9", 2)
    w = product_weight(2)
    expected = float(w([1 / 3, 2 / 3]) + w([2 / 3, 1 / 3]))
    assert count_affine_weighted(g, w, 3) == pytest.approx(expected, rel=1e-14)
    assert count_affine_weighted(parse_polynomial("x1^3 + x2^3 + 1000", 2), w, 3) == 0.0
    assert count_affine_weighted(g, w.scaled(2.5), 3) == pytest.approx(2.5 * expected)


def test_weighted_monotone_in_weight():
    g = parse_polynomial("x1^3 - x2^2 + x1", 2)
    w = product_weight(2)
    for P in (4, 7):
        assert count_affine_weighted(g, w.dilated(2.0), P) >= count_affine_weighted(g, w, P)


def test_zero_polynomial_counts_everything():
    w = product_weight(2)
    assert count_affine_weighted(CubicPolynomial.zero(2), w, 5) == pytest.approx(lattice_weight_mass(w, 5))


def test_fit_growth_examples():
    fit = fit_growth([(P, 7 * P**2) for P in (10, 100, 1000)])
    assert fit.exponent == pytest.approx(2.0, abs=1e-9)
    assert fit_growth([(P, P**3) for P in (2, 3, 5)]).exponent == pytest.approx(3.0)
    with pytest.raises(ValueError):
        fit_growth([(2, 1), (3, 0), (4, 0)])


def test_primitive_point_counts():
    # Mobius inversion against direct enumeration of primitive pairs and triples
    for n, P in ((2, 13), (3, 6)):
        ref = sum(
            1
            for x in itertools.product(range(-P, P + 1), repeat=n)
            if any(x) and math.gcd(*x) == 1 and next(v for v in x if v) > 0
        )
        assert primitive_points_projective(n, P) == ref


def test_lower_bound_family_subcount():
    # F = x1^3 + x2 (x3^2 + x4^2) vanishes on every [0, 0, x3, x4]
    F = parse_polynomial("x1^3 + x2*x3^2 + x2*x4^2", 4)
    P = 12
    pts = integer_zeros(F, P)
    sub = {tuple(r) for r in pts.tolist() if r[0] == 0 and r[1] == 0 and any(r) and math.gcd(*r) == 1 and next(v for v in r if v) > 0}
    assert len(sub) == primitive_points_projective(2, P)
    ratio = primitive_points_projective(2, 200) / 200**2
    assert 1.0 <= ratio <= 1.4
    assert ratio == pytest.approx(12 / math.pi**2, abs=0.02)


def test_fermat_surface_counts_frozen():
    # computed once with the split solver; the lines on the surface dominate
    assert [count_projective(CubicPolynomial.fermat(4), P) for P in (16, 64)] == [1053, 15765]
