import cmath
from fractions import Fraction as F

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from biratlab import complexity as cx
from biratlab.maps import bind

T = cx.T
K_GENERIC = [2, 2, 3, 4, 5, 7, 9, 12, 16, 21]


# -- degrees -----------------------------------------------------------------

def test_k_degrees_and_generating_function():
    ds = cx.degree_sequence(bind("K", cx.generic_params("K", seed=3)), n_max=10)
    assert ds.degrees == K_GENERIC
    g = sp.sympify(ds.generating_function, locals={"t": T})
    assert sp.simplify(g + T * (T**2 + 2 * T + 2) / (T**3 + T**2 - 1)) == 0


def test_line_and_homogeneous_methods_agree():
    bm = bind("K", cx.generic_params("K", seed=5))
    line = cx.degree_sequence(bm, n_max=7, method="line").degrees
    homo = cx.degree_sequence(bm, n_max=7, method="homogeneous").degrees
    assert line == homo == K_GENERIC[:7]


@pytest.mark.parametrize("c, expected", [
    (F(1, 10), [3**n for n in range(1, 7)]),
    (0, [2**n for n in range(1, 7)]),
])
def test_hd_degrees(c, expected):
    bm = bind("Hd", {"a": F(7, 5), "b": F(3, 10), "c": c})
    assert cx.degree_sequence(bm, n_max=6).degrees == expected


def test_hd_resonant_parameters_reduce_growth():
    b, c = F(3, 10), F(1, 7)
    ds = cx.degree_sequence(bind("Hd", {"a": (c - b) * c, "b": b, "c": c}), n_max=7)
    assert ds.degrees == [3, 7, 17, 41, 99, 239, 577]
    assert ds.lambda_estimate == pytest.approx(1 + 2**0.5, abs=0.01)


@pytest.mark.parametrize("seq, rate", [
    ([2**n for n in range(1, 12)], 2.0),
    ([1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144], (1 + 5**0.5) / 2),
    ([n + 1 for n in range(12)], 1.0),
])
def test_growth_rate(seq, rate):
    assert cx.growth_rate(seq).value == pytest.approx(rate, abs=0.12 if rate == 1.0 else 0.01)


def test_growth_rate_needs_data():
    with pytest.raises(ValueError):
        cx.growth_rate([1, 2, 3])


def test_generating_function_of_pell_like_sequence():
    g = cx.guess_generating_function([3, 7, 17, 41, 99, 239, 577, 1393])
    assert [int(x) for x in cx.series_coefficients(g, 8)[1:]] == [3, 7, 17, 41, 99, 239, 577, 1393]


# -- cycles ----------------------------------------------------------------------

@pytest.mark.parametrize("b, cls", [
    (F(1, 2), "StableSpiral"), (F(-1, 2), "UnstableSpiral"), (F(4, 5), "StableNode"),
    (F(2), "Saddle"), (F(4), "UnstableNode"),
])
def test_fixed_point_stability(b, cls):
    (cyc,), saturated = cx.find_cycles(bind("K", {"b": b}), 1)
    x = 1 / (1 - float(b))
    assert cyc.points[0] == pytest.approx((x, x))
    # eigenvalues solve l^2 - l + (1 - b) = 0
    assert sorted(cyc.eigenvalues, key=lambda z: (z.real, z.imag)) == pytest.approx(
        sorted(np.roots([1, -1, 1 - float(b)]), key=lambda z: (z.real, z.imag)))
    assert cyc.stability == cls == cx.stability(cyc)


@pytest.mark.parametrize("b, real", [(F(1, 2), False), (F(-3, 5), False), (F(4), True)])
def test_two_cycle(b, real):
    (cyc,), _ = cx.find_cycles(bind("K", {"b": b}), 2)
    x, y = cyc.points[0][0], cyc.points[1][0]
    assert x + y == pytest.approx(-1)
    assert x * y == pytest.approx(1 / (1 + float(b)))
    assert cyc.real is real


def test_seeded_search_is_deterministic():
    bm = bind("K", {"b": F(-3, 5)})
    a = [c.to_json() for c in cx.find_cycles(bm, 5, seed=2)[0]]
    b = [c.to_json() for c in cx.find_cycles(bm, 5, seed=2)[0]]
    assert a == b


def test_stability_boundaries():
    found = [cx.stability_boundary("K", {"b": F(1, 2)}, "b", lo, hi) for lo, hi in ((0.5, 0.9), (2.0, 4.0))]
    assert found == pytest.approx([0.75, 3.0], abs=1e-3)


# -- counting ----------------------------------------------------------------------

@pytest.mark.parametrize("b", [F(1, 2), F(2, 7)])
def test_exact_fix_counts_of_k(b):
    assert [cx.exact_fix_count(bind("K", {"b": b}), n) for n in range(1, 5)] == [1, 3, 4, 3]


def test_exact_fix_counts_of_k6():
    assert [cx.exact_fix_count(bind("K6"), n) for n in (1, 2, 3)] == [3, 5, 3]


counts = st.lists(st.integers(0, 20), min_size=1, max_size=14)


@given(counts)
def test_mobius_inversion_round_trip(prim):
    assert cx.primitive_from_fix(cx.fix_from_primitive(prim)) == prim


@given(counts)
def test_zeta_round_trip(prim):
    fix = cx.fix_from_primitive(prim)
    z = cx.zeta_from_fix(fix)
    expr = sum(sp.Rational(c.numerator, c.denominator) * T**k for k, c in enumerate(z))
    assert cx.fix_from_zeta(expr, len(fix)) == fix


def test_k_zeta_predicts_fix_counts():
    fix = cx.fix_from_zeta(cx.K_ZETA, 12)
    assert fix == [1, 3, 4, 3, 6, 6, 8, 11, 13, 18, 23, 30]
    assert cx.primitive_from_fix(fix) == [1, 1, 1, 0, 1, 0, 1, 1, 1, 1, 2, 2]
    assert cx.zeta_check(fix).matches
    assert not cx.zeta_check([1, 3, 4, 4]).matches


def test_zeta_poles_give_growth_of_fix_counts():
    # |fix_n|^(1/n) tends to the inverse smallest root of 1 - t^2 - t^3
    fix = cx.fix_from_zeta(cx.K_ZETA, 60)
    root = min(abs(r) for r in np.roots([-1, -1, 0, 1]))
    assert fix[-1] ** (1 / 60) == pytest.approx(1 / root, rel=0.02)
