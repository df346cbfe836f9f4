import random
from fractions import Fraction as F

import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from biratlab.complexity import find_cycles
from biratlab.covariant import (EXTRA_FACTORS, K3_TRUNCATED, TWO_FORMS, CovariantCandidate, ParseError,
                                cofactor_check, fit_algebraic_curve, nonstandard_fixed_census, parse_expression,
                                vanishes_on)
from biratlab.maps import bind
from biratlab.postcritical import pc_iterate

u, v = sp.symbols("u v")


# -- parser ------------------------------------------------------------------

@pytest.mark.parametrize("text, expected", [
    ("u*v*(v-u+u*v)", u * v * (v - u + u * v)),
    ("-u^2*v/3 + 2**3", -u**2 * v / 3 + 8),
    ("(u-1)^-1", 1 / (u - 1)),
    ("2 u", None),
])
def test_parse(text, expected):
    if expected is None:
        with pytest.raises(ParseError):
            parse_expression(text)
        return
    assert sp.simplify(parse_expression(text) - expected) == 0


@pytest.mark.parametrize("bad", ["u+", "u^v", "w+1", "u^(1/2)", "(u", "2..3", "", "u v", "u**"])
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        parse_expression(bad)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(-9, 9), st.integers(0, 3), st.integers(0, 3)), min_size=1, max_size=5))
def test_parse_round_trips_printed_polynomials(terms):
    poly = sum(c * u**i * v**j for c, i, j in terms)
    text = str(poly).replace("**", "^")
    assert sp.expand(parse_expression(text) - poly) == 0


def test_map_parameters_are_names():
    cand = CovariantCandidate.parse("(u-1)*((c+7)*v-c+7)", "K3")
    assert sp.Symbol("c") in cand.numerator.free_symbols


# -- cofactor identity -----------------------------------------------------------

@pytest.mark.parametrize("map_id, params", [
    ("K1", {"epsilon": F(-5, 3)}),
    ("K2", {"a": F(1, 4), "b": -2}),
    ("K3", {"c": F(11, 2)}),
    ("K4", {"a": F(-2, 7), "b": F(-2, 7)}),
])
def test_two_forms_are_exact(map_id, params):
    verdict = cofactor_check(bind(map_id, params), TWO_FORMS[map_id], n_points=80)
    assert verdict.tag == "ExactTwoForm"
    assert verdict.n_tested >= 80


def test_k4_form_needs_b_equal_a():
    verdict = cofactor_check(bind("K4", {"a": 3, "b": 5}), TWO_FORMS["K4"], n_points=60)
    assert verdict.tag == "NotCovariant"


def test_truncated_k3_form_picks_up_the_catalogued_factor():
    verdict = cofactor_check(bind("K3", {"c": 3}), K3_TRUNCATED, n_points=60)
    assert verdict.tag == "CovariantWithExtraFactor"
    assert verdict.extra_factor == EXTRA_FACTORS["K3"][0][0]


def test_wrong_form_is_rejected():
    wrong = CovariantCandidate.parse("u*v", "K2")
    assert cofactor_check(bind("K2", {"a": 3, "b": 5}), wrong, n_points=40).tag == "NotCovariant"


def test_verdict_is_reproducible():
    bm = bind("K2", {"a": 3, "b": 5})
    a = cofactor_check(bm, TWO_FORMS["K2"], n_points=30, seed=4).to_json()
    b = cofactor_check(bm, TWO_FORMS["K2"], n_points=30, seed=4).to_json()
    assert a == b


# -- invariant curves of post-critical orbits ----------------------------------

def _proper_points(bm, comp, n):
    return [p for p in pc_iterate(bm, comp, n).points if None not in p]


def test_k1_orbit_lies_on_a_conic():
    bm = bind("K1", {"epsilon": 2})
    comp = next(c for c in bm.exceptional_locus() if c.label == "u = 1/2")
    pts = _proper_points(bm, comp, 30)
    curve = fit_algebraic_curve(pts[:12], 2)
    assert sp.expand(curve - (u * v - u + v)) == 0
    assert vanishes_on(curve, pts[12:])


def test_k2_orbits_lie_on_lines():
    bm = bind("K2", {"a": 3, "b": 5})
    found = {str(fit_algebraic_curve(_proper_points(bm, c, 25)[:15], 2)) for c in bm.exceptional_locus()}
    assert found == {"u - 1", "v - 1", "u - v"}


def test_random_points_fit_no_curve():
    rng = random.Random(1)
    pts = [(F(rng.randint(-99, 99), rng.randint(1, 50)), F(rng.randint(-99, 99), rng.randint(1, 50)))
           for _ in range(30)]
    assert fit_algebraic_curve(pts, 2) is None


def test_fit_needs_enough_points():
    with pytest.raises(ValueError):
        fit_algebraic_curve([(F(1), F(2))], 2)


# -- non-standard fixed points ---------------------------------------------------

def test_k_fixed_points_are_nonstandard():
    b = F(-3, 5)
    bm = bind("K", {"b": b})
    cycles = [c for n in (1, 2, 3) for c in find_cycles(bm, n)[0]]
    census = nonstandard_fixed_census(bm, cycles)
    exact = {r.order: r.exact for r in census.rows}
    assert exact[1] == 1 - b
    assert complex(census.rows[2].jacobian) == pytest.approx(1 + b + b * b)
    # the 2-cycle is complex, so no exact snap is attempted
    assert exact[2] is None
    assert census.summary == {1: (1, 1), 2: (1, 1), 3: (1, 1)}


def test_k6_five_cycles():
    forward = find_cycles(bind("K6"), 5)[0]
    backward = find_cycles(bind("K6", {}, "backward"), 5)[0]
    assert sorted(round(c.jacobian.real, 8) for c in forward) == [-5, -1]
    assert sorted(round(c.jacobian.real, 8) for c in backward) == [-1, -0.2]


def test_k6_double_fixed_point_is_reported_once():
    cycles, saturated = find_cycles(bind("K6"), 1)
    assert saturated
    assert sorted(round(c.points[0][0].real, 4) for c in cycles) == [-1, 1]
