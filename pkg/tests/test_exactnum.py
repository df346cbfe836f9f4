from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from biratlab.exactnum import (HomoPoly3, InvalidPoint, ProjPoint, UniPoly, cheb, mod_of, normalize,
                               reduce_triple, reduce_triple_with_factor, to_fraction)

ints = st.integers(min_value=-10**6, max_value=10**6)
rationals = st.fractions(max_denominator=10**4).filter(lambda f: abs(f) < 10**6)


def test_float_conversion_uses_shortest_repr():
    assert to_fraction(0.1) == Fraction(1, 10)
    assert to_fraction("3/7") == Fraction(3, 7)
    with pytest.raises(InvalidPoint):
        to_fraction(float("nan"))


@given(ints, ints, ints, st.integers(min_value=1, max_value=50).flatmap(lambda k: st.sampled_from([k, -k])))
def test_normalize_is_scale_invariant(x, y, z, k):
    if x == y == z == 0:
        with pytest.raises(InvalidPoint):
            normalize((x, y, z))
        return
    assert normalize((x, y, z)) == normalize((k * x, k * y, k * z))


@given(rationals, rationals)
def test_affine_round_trip(u, v):
    assert ProjPoint.affine(u, v).to_affine() == (u, v)


def test_point_at_infinity_has_no_affine_chart():
    p = normalize((2, -4, 0))
    assert p == ProjPoint(1, -2, 0) and not p.is_finite
    with pytest.raises(InvalidPoint):
        p.to_affine()


@pytest.mark.parametrize("n", range(0, 9))
def test_chebyshev_closed_forms(n):
    import math

    x = 0.3
    assert cheb("T", n, x) == pytest.approx(math.cos(n * math.acos(x)))
    assert cheb("U", n, x) == pytest.approx(math.sin((n + 1) * math.acos(x)) / math.sin(math.acos(x)))


@given(rationals, st.integers(min_value=1, max_value=12))
def test_chebyshev_pell_identity(x, n):
    # T_n^2 - (x^2 - 1) U_{n-1}^2 = 1 holds exactly
    assert cheb("T", n, x) ** 2 - (x * x - 1) * cheb("U", n - 1, x) ** 2 == 1


def test_chebyshev_edge_indices():
    assert cheb("U", -1, Fraction(5)) == 0
    with pytest.raises(ValueError):
        cheb("T", -1, 2)


@given(st.lists(rationals, max_size=6), st.lists(rationals, min_size=1, max_size=6).filter(lambda c: c[-1] != 0))
def test_unipoly_division(a, b):
    A, B = UniPoly(a), UniPoly(b)
    q, r = divmod(A, B)
    assert q * B + r == A
    assert r.is_zero() or r.degree < B.degree


def test_unipoly_gcd():
    t = UniPoly.gen()
    f = (t - 1) * (t + 2) ** 2
    g = (t + 2) * (t - 3)
    assert f.gcd(g) == t + 2


def test_reduce_triple_strips_common_factor():
    x, y, z = (HomoPoly3.var(s) for s in "xyz")
    common = x * y + z * z
    out = reduce_triple(common * x * 6, common * y * 4, common * (x + z) * 2)
    assert out == (x * 3, y * 2, x + z)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=3, max_size=3), st.integers(1, 6))
def test_reduce_triple_factor_identity(cs, k):
    x, y, z = (HomoPoly3.var(s) for s in "xyz")
    g = x * cs[0] + y * cs[1] + z * (cs[2] or 1)
    triple = (g * x * k, g * y, g * z * (k + 1))
    outs, factor = reduce_triple_with_factor(*triple)
    for o, t in zip(outs, triple):
        assert factor * o == t
    assert factor.degree == 1


def test_reduce_triple_rejects_mixed_degrees():
    x, y, z = (HomoPoly3.var(s) for s in "xyz")
    with pytest.raises(ValueError):
        reduce_triple(x, y * y, z)


def test_mod_image():
    p = 101
    assert mod_of(Fraction(1, 2), p) * 2 % p == 1
    with pytest.raises(ZeroDivisionError):
        mod_of(Fraction(1, 101), p)
