from fractions import Fraction as F

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from biratlab.maps import INF, bind
from biratlab.postcritical import (CLOSED_FORMS, NotAvailable, closed_form_for, closed_form_orbit, pc_direction,
                                   pc_iterate, pc_limit, verified_closed_forms)

nice = st.fractions(min_value=-6, max_value=6, max_denominator=7).filter(lambda x: x not in (0, 1, -1, 2))


def _proper(p):
    return None not in p


def _agree(bm, n_max=12):
    checked = 0
    for comp, cf in verified_closed_forms(bm):
        orbit = pc_iterate(bm, comp, n_max)
        for n in range(max(2, cf.n_min), len(orbit.points) + 1):
            got = orbit.points[n - 1]
            if not _proper(got):
                break  # the exact orbit met an indeterminacy point for this parameter
            assert got == closed_form_orbit(bm, comp, n), (comp.label, n)
            checked += 1
    return checked


@settings(max_examples=12, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(nice)
def test_k1_closed_forms(eps):
    _agree(bind("K1", {"epsilon": eps}))


@settings(max_examples=8, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(nice, nice)
def test_k2_closed_forms(a, b):
    if a + b == 2 or a * b == 0:
        return
    _agree(bind("K2", {"a": a, "b": b}))


@pytest.mark.parametrize("c", [5, F(2, 3), F(-9, 4)])
def test_k3_closed_forms(c):
    assert _agree(bind("K3", {"c": c})) > 30


@pytest.mark.parametrize("a", [2, F(5, 2), F(-7, 3)])
def test_k4_closed_forms_on_the_diagonal(a):
    assert _agree(bind("K4", {"a": a, "b": a})) > 25


def test_k4_closed_forms_need_b_equal_a():
    assert verified_closed_forms(bind("K4", {"a": 3, "b": 5})) == []


def test_k1_orbit_hits_indeterminacy_at_special_epsilon():
    bm = bind("K1", {"epsilon": F(1, 2)})
    comp = next(c for c in bm.exceptional_locus() if c.label == "u = -1")
    orbit = pc_iterate(bm, comp, 10)
    # the sixth point (2, 0) sits on 1 - eps u = 0 and blows up
    assert orbit.points[5] == (2, 0)
    assert not _proper(orbit.points[6])


def test_unverified_k3_form_is_not_an_orbit():
    bm = bind("K3", {"c": 3})
    comp, cf = next((c, closed_form_for(bm, c)) for c in bm.exceptional_locus()
                    if closed_form_for(bm, c) is not None and not closed_form_for(bm, c).verified)
    with pytest.raises(NotAvailable):
        closed_form_orbit(bm, comp, 4)
    printed = [closed_form_orbit(bm, comp, n, include_unverified=True) for n in (3, 4)]
    # an orbit would satisfy K3(F(n)) = F(n+1)
    assert bm.eval_ext(printed[0]) != printed[1]


def test_catalogue_is_indexed_consistently():
    from biratlab.maps import FAMILIES

    for cf in CLOSED_FORMS:
        assert cf.index < len(FAMILIES[cf.family].catalogue_E["forward"])


@pytest.mark.parametrize("map_id, params, expected", [
    ("K", {"b": F(-3, 5)}, ("Short", "Long")),
    ("K6", {}, ("Short", "Short")),
    ("K2", {"a": 3, "b": 5}, ("Long", "Long")),
    ("Hd", {"a": F(7, 5), "b": F(3, 10), "c": F(1, 10)}, ("Short", "Long")),
])
def test_short_long(map_id, params, expected):
    got = tuple(pc_direction(bind(map_id, params, d), n_max=12).length for d in ("forward", "backward"))
    assert got == expected


def test_integrability_verdicts():
    assert pc_direction(bind("K2", {"a": 3, "b": 5}), 12, symbolic_param="a").integrability == "Integrable"
    assert pc_direction(bind("K1", {"epsilon": 2}, "backward"), 12,
                        symbolic_param="epsilon").integrability == "Integrable"
    hd = bind("Hd", {"a": F(7, 5), "b": F(3, 10), "c": F(1, 10)}, "backward")
    assert pc_direction(hd, 12, symbolic_param="c").integrability == "NonIntegrable"


def test_short_direction_terminates_at_a_special_point():
    rep = pc_direction(bind("K6"), n_max=16)
    for orbit in rep.orbits:
        assert orbit.is_short and len(orbit.points) < 16


@pytest.mark.parametrize("map_id, params, limit", [
    ("K1", {"epsilon": 2}, (0.0, 0.0)),
    ("K2", {"a": 3, "b": 5}, (1.0, 1.0)),
])
def test_long_orbits_converge_to_a_fixed_point(map_id, params, limit):
    bm = bind(map_id, params)
    lim = pc_limit(pc_iterate(bm, bm.exceptional_locus()[0], 30), bm)
    assert lim.confirmed
    assert lim.point == pytest.approx(limit, abs=1e-8)


def test_json_round_trip():
    import json

    rep = pc_direction(bind("K", {"b": F(-3, 5)}), n_max=8)
    data = json.loads(json.dumps(rep.to_json(limit=4)))
    assert data["length"] == "Short" and data["map"] == "K"
    assert INF not in data["orbits"][0]["points"][0]


@pytest.mark.parametrize("map_id, params, sym, direction, verdict", [
    ("K5", {"q": 2}, "q", "forward", "NonIntegrable"),
    ("K5", {"q": 2}, "q", "backward", "NonIntegrable"),
    ("K1", {"epsilon": 2}, "epsilon", "forward", "Integrable"),
    ("K4", {"a": 3, "b": F(2, 7)}, "b", "forward", "NonIntegrable"),
])
def test_long_orbit_integrability(map_id, params, sym, direction, verdict):
    rep = pc_direction(bind(map_id, params, direction), 12, symbolic_param=sym)
    assert (rep.length, rep.integrability) == ("Long", verdict)


def test_k4_generic_parameter_degrees_start_one_three():
    rep = pc_direction(bind("K4", {"a": 3, "b": F(2, 7)}), 8, symbolic_param="b")
    v0 = next(o for o in rep.orbits if o.source.label == "v = 0")
    assert v0.param_degrees[:2] == [1, 3]
    assert v0.param_degrees[-1] > 4 * v0.param_degrees[3]
