import math
from fractions import Fraction

import pytest
from scipy.optimize import linprog

from cubiclab.exponents import (
    CATALOG,
    EncodingError,
    catalog,
    certify_case,
    get_case,
    interpolate_min,
    lp_data,
    rho_neutral_threshold,
    sweep,
    vertex_residuals,
)

F = Fraction


def test_catalog_size_and_names():
    names = [c.name for c in catalog()]
    assert len(names) >= 14
    assert len(set(names)) == len(names)
    families = {c.family for c in catalog()}
    assert families == {"Sigma2a", "Sigma2b", "Sigma1a", "Sigma1b"}
    assert all(c.bound for c in catalog())


def test_aliases():
    assert get_case("Σ₂ₐ-Vterm").name == "S2a-Vterm"
    assert get_case("Σ₁ᵦ-final-smallV").name == "S1b-tsmall-smallV-final"
    with pytest.raises(KeyError):
        get_case("nope")


def test_spot_values():
    assert certify_case(get_case("S2b-largeV"), 7).optimum == F(3 * 7, 4) - F(3, 4)
    final = certify_case(get_case("S1b-final-smallV"), 5)
    assert final.certified and final.margin == F(1, 12)
    vterm = certify_case(get_case("S2a-Vterm"), 5)
    assert vterm.certified and vterm.optimum == 3 and vterm.margin == 0


def test_n4_fails_somewhere():
    failures = [c.name for c in CATALOG if not certify_case(c, 4, force=True).certified]
    assert failures


def test_applicability_guard():
    with pytest.raises(ValueError):
        certify_case(get_case("S2b-smallV-poisson"), 6)
    with pytest.raises(ValueError):
        sweep(get_case("S2a-Vterm"), [3, 5])


def test_permuted_constraint_order():
    for case in CATALOG[::3]:
        n = max(case.n_min, 7)
        base = certify_case(case, n)
        k = len(case.constraints())
        rev = certify_case(case, n, order=list(reversed(range(k))))
        rot = certify_case(case, n, order=[(i * 5 + 2) % k for i in range(k)] if math.gcd(5, k) == 1 else list(range(1, k)) + [0])
        assert base.optimum == rev.optimum == rot.optimum


def test_vertices_and_duals():
    for case in CATALOG:
        cert = certify_case(case, case.n_min)
        assert all(r == 0 for r in vertex_residuals(case, cert))
        assert cert.dual_verified


@pytest.mark.parametrize("case", CATALOG[::2], ids=lambda c: c.name)
def test_scipy_cross_check(case):
    n = case.n_min + 1 if case.applies(case.n_min + 1) else case.n_min
    obj, A_ub, b_ub, A_eq, b_eq = lp_data(case, n)
    f = lambda M: [[float(x) for x in row] for row in M]
    ref = linprog(
        [-float(x) for x in obj.vector()], A_ub=f(A_ub), b_ub=[float(x) for x in b_ub],
        A_eq=f(A_eq) or None, b_eq=[float(x) for x in b_eq] or None,
        bounds=[(None, None)] * len(obj.vector()), method="highs",
    )
    assert ref.status == 0
    assert abs(-ref.fun + float(obj.const) - float(certify_case(case, n).optimum)) < 1e-9


def test_rho_cap_is_needed():
    with pytest.raises(EncodingError):
        certify_case(get_case("S2a-Vterm"), 5, rho_cap=False)


def test_cubeterm_threshold():
    assert rho_neutral_threshold(get_case("S2a-cubeterm"), range(5, 20)) == 9


def test_small_V_branches_from_six():
    for name in ("S2b-smallV-weyl", "S2b-smallV-poisson-largeR"):
        res = sweep(get_case(name), range(6, 13))
        assert res.all_certified and res.smallest_certified == 6


def test_full_sweep_certifies_everything():
    for case in CATALOG:
        res = sweep(case, range(5, 41))
        assert res.all_certified, case.name


def test_interpolate_min_examples():
    b, ok = interpolate_min([8, 1], [F(1, 3), F(2, 3)])
    assert math.isclose(b, 2.0) and ok
    b, ok = interpolate_min([5.0, 5.0, 5.0], [F(1, 10), F(11, 30), F(8, 15)])
    assert math.isclose(b, 5.0) and ok
    b, ok = interpolate_min([1e6, 1e3, 1.0], [F(1, 10), F(1, 5), F(7, 10)])
    assert math.isclose(b, 10**1.2) and ok and b >= 1.0


def test_interpolate_min_errors():
    with pytest.raises(ValueError):
        interpolate_min([1.0, 0.0], [F(1, 2), F(1, 2)])
    with pytest.raises(ValueError):
        interpolate_min([1.0, 2.0], [F(1, 2), F(1, 3)])
    with pytest.raises(ValueError):
        interpolate_min([1.0], [F(1, 2), F(1, 2)])
