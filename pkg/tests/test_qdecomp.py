import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from cubiclab.qdecomp import (
    census_max_ratio,
    census_sweep,
    decompose,
    decompose_range,
    dyadic_census,
    dyadic_index,
    gcd_sum,
    minimal_d0,
)

HALF = Fraction(1, 2)


def recipe(q):
    # independent route through sympy's factorisation
    b1 = b2 = c = d = 1
    for p, e in sympy.factorint(q).items():
        if e == 1:
            b1 *= p
        elif e == 2:
            b2 *= p
        elif e % 2 == 0:
            c *= p ** (e // 2)
        else:
            d *= p
            c *= p ** ((e - 1) // 2)
    return b1, b2, c, d


def test_examples():
    assert decompose(1).as_row() == (1, 1, 1, 1, 1, 1)
    assert decompose(720).as_row() == (720, 5, 3, 4, 1, 1)
    assert decompose(32).as_row() == (32, 1, 1, 4, 2, 2)
    assert decompose(8).as_row() == (8, 1, 1, 2, 2, 1)


def test_rejects_nonpositive():
    with pytest.raises(ValueError):
        decompose(0)


def test_invariants_up_to_1e5():
    rows = decompose_range(10**5)
    assert [D.q for D in rows] == list(range(1, 10**5 + 1))
    for D in rows:
        assert D.check() == [], D
        assert D.d0 == minimal_d0(D.c, D.d)


@given(st.integers(1, 10**12))
def test_decompose_against_sympy(q):
    D = decompose(q)
    assert (D.b1, D.b2, D.c, D.d) == recipe(q)
    assert D.check() == []
    for part in (D.b1, D.b2, D.d):
        assert all(e == 1 for e in sympy.factorint(part).values())


def test_range_matches_pointwise():
    assert decompose_range(500) == [decompose(q) for q in range(1, 501)]


def test_dyadic_index():
    assert dyadic_index(1) == HALF
    assert [dyadic_index(x) for x in (2, 3, 4, 5, 8, 9)] == [1, 2, 2, 4, 4, 8]
    with pytest.raises(ValueError):
        dyadic_index(0)


def test_census_examples():
    assert dyadic_census(HALF, HALF, HALF, HALF, HALF).count == 1
    # q = 4 puts 2 in b2, so the box that sees it is R1
    assert dyadic_census(2, HALF, 1, HALF, HALF).count == 1
    assert dyadic_census(2, HALF, HALF, 1, HALF).count == 0


def test_census_matches_sweep():
    table = census_sweep(2000)
    for key, cnt in list(table.items())[:60]:
        assert dyadic_census(*key).count == cnt


def test_census_sweep_partitions_all_moduli():
    table = census_sweep(1024)
    assert sum(table.values()) == 1024


def test_census_max_ratio():
    best, arg = census_max_ratio(10**4)
    assert math.isfinite(best)
    assert best == 8.0
    assert arg == (HALF,) * 5


@pytest.mark.parametrize("slot", range(5))
def test_census_monotone_in_each_box(slot):
    box = (64, 2, 1, 1, HALF)
    base = dyadic_census(*box).count
    spans = [2] * 5
    spans[slot] = 4
    assert dyadic_census(*box, spans=tuple(spans)).count >= base


def test_census_rejects_bad_endpoints():
    with pytest.raises(ValueError):
        dyadic_census(Fraction(1, 4), HALF, HALF, HALF, HALF)


def test_gcd_sum_examples():
    assert gcd_sum(10, 6) == (23, Fraction(23, 40))
    assert gcd_sum(37, 1) == (37, Fraction(1))
    with pytest.raises(ValueError):
        gcd_sum(0, 3)


def test_gcd_ratio_at_most_one_exhaustive():
    b = np.arange(1, 10**4 + 1, dtype=np.int64)
    for N in range(1, 10**3 + 1):
        partial = np.cumsum(np.gcd(b, N))
        tau = len(sympy.divisors(N))
        assert int(np.max(partial - tau * b)) <= 0
