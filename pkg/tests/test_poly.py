from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from cubiclab.poly import (
    CubicPolynomial,
    DegreeTooHigh,
    PolynomialError,
    bad_primes,
    bilinear_system,
    cubic_part,
    format_polynomial,
    gradient_hessian,
    parse_polynomial,
    random_polynomial,
    scaled_norm,
    scaled_norm_exact,
    sup_norm,
    symmetric_tensor,
)

X = sympy.symbols("x1:5")


def as_sympy(g: CubicPolynomial):
    return sympy.Integer(0) + sum(c * sympy.prod([X[i] ** k for i, k in enumerate(e)]) for e, c in g.terms)


def polys(n_max=3, homogeneous=False):
    return st.tuples(st.integers(1, n_max), st.integers(0, 2**32 - 1)).map(
        lambda t: random_polynomial(np.random.default_rng(t[1]), t[0], 5, homogeneous, density=0.6)
    )


# ---- parsing and formatting


def test_parse_examples():
    g = parse_polynomial("x1^3 + 2*x2", 2)
    assert g.as_dict() == {(3, 0): 1, (0, 1): 2}
    with pytest.raises(DegreeTooHigh):
        parse_polynomial("x1^4", 1)
    assert parse_polynomial("x1^3 - x1^3", 1).is_zero()
    with pytest.raises(PolynomialError):
        parse_polynomial("x3^2", 2)
    with pytest.raises(PolynomialError):
        parse_polynomial("x1^^3", 1)


def test_canonical_format():
    g = parse_polynomial("5 - 2*x1*x2^2 + x1^3", 2)
    assert format_polynomial(g) == "x1^3 - 2*x1*x2^2 + 5"


@given(polys())
def test_format_parse_roundtrip(g):
    if not g.is_zero():
        assert parse_polynomial(format_polynomial(g), g.n) == g


@given(polys(), st.lists(st.integers(-50, 50), min_size=3, max_size=3))
def test_evaluate_matches_sympy(g, x):
    x = x[: g.n]
    assert g(x) == as_sympy(g).subs(dict(zip(X, x)))


# ---- parts and norms


def test_cubic_part_examples():
    assert cubic_part(parse_polynomial("x1^3 + 7*x1^2 + 3", 1)) == parse_polynomial("x1^3", 1)
    F = CubicPolynomial.fermat(3)
    assert cubic_part(F) == F
    assert cubic_part(parse_polynomial("x1*x2 + 5", 2)).is_zero()


def test_norm_examples():
    assert sup_norm(parse_polynomial("x1^3 - 7*x2", 2)) == 7
    assert sup_norm(CubicPolynomial.zero(2)) == 0
    g = parse_polynomial("x1^3 + 7*x1^2 + 3", 1)
    assert sup_norm(g.scale(6)) == 6 * sup_norm(g)
    assert scaled_norm(g, 10) == 1.0
    assert scaled_norm(parse_polynomial("3", 1), 10) == pytest.approx(0.003)
    F = CubicPolynomial.fermat(3).scale(4)
    assert scaled_norm(F, 37.5) == sup_norm(F)
    with pytest.raises(ValueError):
        scaled_norm(g, 0.5)


@given(polys(), st.integers(1, 40))
def test_scaled_norm_by_expansion(g, P):
    # expand P^-3 g(P x) with sympy and take the largest coefficient
    expr = sympy.expand(as_sympy(g).subs({X[i]: P * X[i] for i in range(g.n)}, simultaneous=True) / P**3)
    coeffs = sympy.Poly(expr, *X[: g.n]).coeffs() if expr != 0 else [0]
    ref = max(abs(Fraction(int(sympy.numer(c)), int(sympy.denom(c)))) for c in coeffs)
    assert scaled_norm_exact(g, Fraction(P)) == ref
    g0 = cubic_part(g)
    assert sup_norm(g0) <= scaled_norm_exact(g, Fraction(P)) <= sup_norm(g)


# ---- tensor, bilinear forms, Hessian


def test_tensor_examples():
    T = symmetric_tensor(parse_polynomial("x1^3", 1))
    assert T[0, 0, 0] == 6
    T = symmetric_tensor(parse_polynomial("x1^2*x2", 2))
    assert [T[0, 0, 1], T[0, 1, 0], T[1, 0, 0]] == [2, 2, 2]
    assert T.abs_sum() == 6
    T = symmetric_tensor(parse_polynomial("x1*x2*x3", 3))
    assert sorted(int(v) for v in T.entries.flat if v) == [1] * 6
    with pytest.raises(PolynomialError):
        symmetric_tensor(parse_polynomial("x1^3 + 1", 1))


@given(polys(4, homogeneous=True), st.lists(st.integers(-30, 30), min_size=4, max_size=4))
def test_tensor_contracts_to_six_g0(g0, x):
    x = x[: g0.n]
    T = symmetric_tensor(g0)
    assert T.contract(x) == 6 * g0(x)
    for i, j, k in np.ndindex(T.entries.shape):
        assert T[i, j, k] == T[j, k, i] == T[k, j, i]


def test_bilinear_examples():
    T = symmetric_tensor(CubicPolynomial.fermat(3))
    assert bilinear_system(T, [1, 2, 3], [4, 5, 6]) == [24, 60, 108]
    assert bilinear_system(T, [0, 0, 0], [4, 5, 6]) == [0, 0, 0]
    with pytest.raises(PolynomialError):
        bilinear_system(T, [1, 2], [1, 2, 3])


@given(polys(4, homogeneous=True), st.data())
def test_hessian_identity(g0, data):
    # the Hessian of g0 at w applied to x is B(w; x) built from the tensor of 6 g0
    vec = st.lists(st.integers(-20, 20), min_size=g0.n, max_size=g0.n)
    w, x = data.draw(vec), data.draw(vec)
    T = symmetric_tensor(g0)
    _, _, H = gradient_hessian(g0, w)
    assert H.matvec(x) == bilinear_system(T, w, x)
    assert bilinear_system(T, w, x) == bilinear_system(T, x, w)


def test_gradient_hessian_examples():
    F = CubicPolynomial.fermat(3)
    val, grad, H = gradient_hessian(F, [1, -2, 3])
    assert val == 1 - 8 + 27 and grad == [3, 12, 27]
    assert H.as_list() == [[6, 0, 0], [0, -12, 0], [0, 0, 18]]
    g = parse_polynomial("x1^3 + 3*x1*x2 + 5*x2^2 - x1 + 2", 2)
    assert gradient_hessian(g, [0, 0])[2].as_list() == [[0, 3], [3, 10]]
    assert gradient_hessian(parse_polynomial("4*x1 - x2", 2), [7, 7])[2].as_list() == [[0, 0], [0, 0]]


@given(polys(), st.lists(st.integers(-9, 9), min_size=3, max_size=3))
def test_gradient_matches_sympy(g, x):
    x = x[: g.n]
    _, grad, H = gradient_hessian(g, x)
    e = as_sympy(g)
    sub = dict(zip(X, x))
    assert grad == [sympy.diff(e, X[i]).subs(sub) for i in range(g.n)]
    assert H.as_list() == [[sympy.diff(e, X[i], X[j]).subs(sub) for j in range(g.n)] for i in range(g.n)]


def test_substitute_matches_sympy():
    g = parse_polynomial("x1^3 - 2*x1*x2^2 + x3 + 5", 3)
    forms = [([1, 2], 3), ([0, -1], 1), ([4, 0], -2)]
    h = g.substitute(forms, 2)
    u = sympy.symbols("x1:3")
    ref = sympy.expand(as_sympy(g).subs({X[i]: sum(a * v for a, v in zip(f, u)) + c for i, (f, c) in enumerate(forms)},
                                        simultaneous=True))
    assert sympy.expand(as_sympy(h) - ref) == 0


# ---- bad primes


def test_bad_primes_examples():
    # brute force over F_p: the Fermat gradient 3 x_i^2 only degenerates at p = 3
    assert bad_primes(CubicPolynomial.fermat(3), 10) == [3]
    assert bad_primes(parse_polynomial("x1^3", 2), 20) == [2, 3, 5, 7, 11, 13, 17, 19]
    with pytest.raises(ValueError):
        bad_primes(CubicPolynomial.fermat(3), 1)


def test_bad_primes_monotone():
    g0 = parse_polynomial("x1^3 + 2*x2^3 + 3*x1*x2*x3 + x3^3", 3)
    small, large = bad_primes(g0, 11), bad_primes(g0, 23)
    assert large[: len(small)] == small
