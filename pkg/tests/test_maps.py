from fractions import Fraction as F

import pytest
from hypothesis import assume, given, settings, strategies as st

from biratlab.maps import FAMILIES, INF, ConfigError, Indeterminacy, bind

small = st.fractions(min_value=-20, max_value=20, max_denominator=50)
DEFAULTS = {m: fam.defaults for m, fam in FAMILIES.items()}


@pytest.mark.parametrize("map_id", sorted(FAMILIES))
@settings(max_examples=25, deadline=None)
@given(u=small, v=small)
def test_inverse_undoes_forward(map_id, u, v):
    fwd = bind(map_id, DEFAULTS[map_id])
    bwd = fwd.inverse()
    try:
        image = fwd.eval_ext((u, v))
        back = bwd.eval_ext(image)
    except Indeterminacy:
        return
    # points on an exceptional curve collapse and cannot come back
    assume(all(c.poly.subs({"u": u, "v": v}) != 0 for c in fwd.exceptional_locus()))
    assert back == (u, v)


@pytest.mark.parametrize("map_id", sorted(FAMILIES))
@settings(max_examples=15, deadline=None)
@given(u=small, v=small)
def test_jacobians_of_inverse_pair_multiply_to_one(map_id, u, v):
    fwd = bind(map_id, DEFAULTS[map_id])
    try:
        image = fwd.eval_ext((u, v))
        assume(INF not in image)
        j = fwd.jacobian(u, v)
        jb = fwd.inverse().jacobian(*image)
    except (Indeterminacy, ZeroDivisionError):
        return
    assume(j != 0)
    assert j * jb == 1


def test_k_values():
    bm = bind("K", {"b": F(-3, 5)})
    assert bm.eval_ext((F(1), F(2))) == (F(-1, 10), F(1))
    assert bm.jacobian(F(1), F(2)) == F(1, 4)
    assert bm.degree == 2
    assert bm.eval_ext((INF, F(2))) == (INF, INF)
    with pytest.raises(Indeterminacy):
        bm.eval_ext((F(0), F(0)))


def test_indeterminacy_sets():
    assert bind("K", {"b": F(-3, 5)}).indeterminacy_set() == [(0, 0), (INF, F(5, 3))]
    assert bind("K6").indeterminacy_set() == [(0, -1), (INF, 0)]
    hd = bind("Hd", {"a": F(7, 5), "b": F(3, 10), "c": F(1, 10)})
    assert hd.indeterminacy_set() == [(0, -10), (-10, 0), (-10, -10), (INF, INF)]


def test_exceptional_locus_of_k():
    labels = [c.label for c in bind("K", {"b": F(-3, 5)}).exceptional_locus()]
    assert labels == ["u = 0", "v = 0"]


def test_henon_limit_is_degenerate():
    bm = bind("Hd", {"a": F(7, 5), "b": F(3, 10), "c": 0})
    assert bm.degree == 2
    assert "Henon" in bm.degeneracy()


@pytest.mark.parametrize("map_id, params", [("K", {}), ("Q", {}), ("K", {"b": 1, "z": 2})])
def test_bad_configs(map_id, params):
    with pytest.raises(ConfigError):
        bind(map_id, params)


def test_k1_jacobian_formula_and_pole():
    from biratlab.maps import JacobianPole

    eps = F(2)
    bm = bind("K1", {"epsilon": eps})
    for u, v in [(F(3), F(1, 2)), (F(-1, 3), F(5))]:
        # -(u+1) / ((1 - eps u) (1 + u - eps u)^2), a derived form of the published determinant
        expected = -(u + 1) / ((1 - eps * u) * (1 + u - eps * u) ** 2)
        assert bm.jacobian(u, v) == expected
    with pytest.raises(JacobianPole):
        bm.jacobian(F(1), F(3))


def test_huge_coordinates_are_abbreviated():
    from biratlab.maps import fmt_ext

    assert fmt_ext(F(-2, 3)) == "-2/3"
    assert fmt_ext(INF) == "inf" and fmt_ext(None) == "*"
    assert fmt_ext(F(3**4000, 7**1000 + 1)) == "~2.437692e+1063 (6340 bits)"
