import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from biratlab import ergodic as eg
from biratlab.maps import bind

HENON = {"a": F(7, 5), "b": F(3, 10), "c": 0}


def _result(s1, s2):
    return eg.LyapunovResult(s1, s2, n_used=1, renormalizations=1, mean_log_j=s1 + s2)


def test_kaplan_yorke():
    assert eg.kaplan_yorke(_result(0.2, -0.5)) == pytest.approx(1.4)
    with pytest.raises(eg.NotApplicable):
        eg.kaplan_yorke(_result(0.2, 0.1))


def test_henon_reference_values():
    r = eg.lyapunov(bind("Hd", HENON), (0.1, 0.1), n=10**6)
    assert r.sigma1 == pytest.approx(0.419, abs=0.005)
    # the Jacobian of the Henon map is the constant -b
    assert r.sigma1 + r.sigma2 == pytest.approx(math.log(0.3), abs=1e-9)
    assert eg.kaplan_yorke(r) == pytest.approx(1.26, abs=0.01)
    s = eg.simulate(bind("Hd", HENON), (0.1, 0.1), n_keep=10**6)
    assert eg.box_counting(s).d_box == pytest.approx(1.26, abs=0.05)


@settings(max_examples=8)
@given(st.fractions(min_value=F(-9, 10), max_value=F(-1, 10), max_denominator=20))
def test_sum_rule(b):
    r = eg.lyapunov(bind("K", {"b": b}), (0.5, 0.7), n=20_000, n_transient=1000)
    assert r.sum_rule_error < 1e-6
    assert r.sigma1 >= r.sigma2


def test_statuses():
    escaped = eg.simulate(bind("K", {"b": F(-3, 2)}), (0.5, 0.7), 1000, 1000).status
    assert isinstance(escaped, eg.EscapedAt) and escaped.step > 0
    s = eg.simulate(bind("K", {"b": F(1, 2)}), (0.5, 0.7), 2000, 10)
    assert isinstance(s.status, eg.Bounded)
    assert s.points[-1] == pytest.approx([2.0, 2.0])


def test_start_on_indeterminacy_point_is_nudged():
    s = eg.simulate(bind("K", {"b": F(-3, 5)}), (0.0, 0.0), 100, 100)
    assert isinstance(s.status, eg.Bounded) and s.restarts >= 1


def test_attractor_does_not_depend_on_start():
    bm = bind("K", {"b": F(-3, 5)})
    rng = np.random.default_rng(7)
    starts = [tuple(p) for p in rng.uniform(-2, 2, size=(5, 2))]
    ky = [eg.kaplan_yorke(eg.lyapunov(bm, p0, n=10**6)) for p0 in starts]
    assert max(ky) - min(ky) < 0.02
    assert np.mean(ky) == pytest.approx(1.37, abs=0.05)


def test_box_counting_filled_square_and_segment():
    rng = np.random.default_rng(0)
    square = rng.uniform(-math.pi / 2, math.pi / 2, size=(10**6, 2))
    assert eg.box_counting(square, coords="arctan").d_box == pytest.approx(2.0, abs=0.05)
    t = rng.uniform(0, 1, size=10**6)
    segment = np.stack([t, 0.3 * t], 1)
    assert eg.box_counting(segment, coords="arctan").d_box == pytest.approx(1.0, abs=0.05)


def test_box_counting_trims_undersampled_levels():
    rng = np.random.default_rng(1)
    bc = eg.box_counting(rng.uniform(-1, 1, size=(2000, 2)), min_points=1000, coords="arctan")
    assert any(reason == "undersampled" for _, reason in bc.trimmed)
    with pytest.raises(ValueError):
        eg.box_counting(np.zeros((10, 2)))


def test_portrait_csv(tmp_path):
    bm = bind("K", {"b": F(-3, 5)})
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    eg.portrait(bm, (0.5, 0.7), 500, coords="arctan", out=a)
    eg.portrait(bm, (0.5, 0.7), 500, coords="arctan", out=b)
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "theta_u,theta_v" and len(lines) == 501
    assert all(abs(float(x)) <= math.pi / 2 for x in lines[1].split(","))
    with pytest.raises(ValueError):
        eg.portrait(bm, (0.5, 0.7), 10, coords="polar")


def test_sweep_values_are_exact_grid():
    assert eg.sweep_values(-0.9, -0.8, 0.05) == pytest.approx([-0.9, -0.85, -0.8])


def test_sweep_is_independent_of_worker_count():
    kw = dict(values=[-0.6, -0.4], n=50_000, n_transient=1000, box=False)
    one = eg.dimension_sweep("K", {"b": F(-3, 5)}, "b", jobs=1, **kw)
    two = eg.dimension_sweep("K", {"b": F(-3, 5)}, "b", jobs=2, **kw)
    assert [r.to_json() for r in one] == [r.to_json() for r in two]


def test_two_form_map_has_zero_exponent():
    r = eg.lyapunov(bind("K2", {"a": 3, "b": 5}), (0.5, 0.7), n=200_000)
    assert isinstance(r.status, eg.Bounded)
    assert abs(r.sigma1) < 5e-3


def test_kaplan_yorke_limits():
    assert eg.kaplan_yorke(_result(-0.1, -0.5)) == 0.0
    assert eg.kaplan_yorke(_result(0.6, -0.5)) == 2.0
