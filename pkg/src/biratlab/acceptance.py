"""Built-in acceptance suite, shared by ``biratlab verify`` and the test-suite."""
from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import complexity as cx
from . import ergodic as eg
from .covariant import K3_TRUNCATED, TWO_FORMS, cofactor_check
from .maps import bind
from .postcritical import closed_form_for, pc_direction, pc_iterate

PISOT = 1.324717957244746


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float
    budget: float

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] #{self.number:<2d} {self.name}: {self.detail} ({self.seconds:.1f}s / {self.budget:.0f}s)"

    def to_json(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": self.passed, "detail": self.detail,
                "seconds": self.seconds, "budget": self.budget}


CRITERIA: dict[int, tuple[str, float, Callable]] = {}


def criterion(number: int, name: str, budget: float):
    def wrap(fn):
        CRITERIA[number] = (name, budget, fn)
        return fn
    return wrap


def run(number: int) -> CriterionResult:
    name, budget, fn = CRITERIA[number]
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failure, reported as such
        ok, detail = False, f"error: {type(exc).__name__}: {exc}"
    dt = time.perf_counter() - t0
    if ok and dt > budget:
        ok, detail = False, f"{detail}; over time budget"
    return CriterionResult(number, name, ok, detail, dt, budget)


def run_all(numbers=None) -> list[CriterionResult]:
    return [run(n) for n in (numbers or sorted(CRITERIA))]


# ---------------------------------------------------------------------------

CLOSED_FORM_CASES = [("K1", {"epsilon": 2}), ("K2", {"a": 3, "b": 5}), ("K3", {"c": 3}), ("K4", {"a": 3, "b": 3})]


@criterion(1, "closed-form PC orbits", 10)
def closed_forms():
    checked, bad = 0, []
    for map_id, params in CLOSED_FORM_CASES:
        bm = bind(map_id, params)
        for comp in bm.exceptional_locus():
            cf = closed_form_for(bm, comp)
            if cf is None or not cf.verified:
                continue
            orbit = pc_iterate(bm, comp, 12)
            for n in range(max(2, cf.n_min), 13):
                checked += 1
                if n > len(orbit.points) or orbit.points[n - 1] != cf.formula(bm.params, n):
                    bad.append(f"{map_id} {comp.label} n={n}")
    return not bad and checked > 0, f"{checked} points compared, mismatches: {bad[:3] or 'none'}"


def _two_form_params(map_id: str, rng: random.Random) -> dict:
    while True:
        x = Fraction(rng.choice([-1, 1]) * rng.randint(1, 60), rng.randint(1, 13))
        y = Fraction(rng.choice([-1, 1]) * rng.randint(1, 60), rng.randint(1, 13))
        params = {"K1": {"epsilon": x}, "K2": {"a": x, "b": y}, "K3": {"c": x}, "K4": {"a": x, "b": x}}[map_id]
        bm = bind(map_id, params)
        if bm.degeneracy() is None:
            return params


@criterion(2, "two-form cofactor identities", 30)
def two_forms():
    rng = random.Random(2024)
    bad = []
    for map_id in ("K1", "K2", "K3", "K4"):
        for draw in range(3):
            params = _two_form_params(map_id, rng)
            v = cofactor_check(bind(map_id, params), TWO_FORMS[map_id], n_points=200, seed=draw)
            if v.tag != "ExactTwoForm":
                bad.append(f"{map_id} {params}: {v}")
    v = cofactor_check(bind("K3", {"c": 3}), K3_TRUNCATED, n_points=200)
    extra_ok = v.tag == "CovariantWithExtraFactor" and v.extra_factor == "28*N/D"
    return not bad and extra_ok, f"12 draws ExactTwoForm: {not bad}; truncated K3 -> {v}"


K_DEGREES = [2, 2, 3, 4, 5, 7, 9, 12, 16, 21]


@criterion(3, "degree growth of K", 60)
def k_degrees():
    bm = bind("K", cx.generic_params("K", seed=3))
    ds = cx.degree_sequence(bm, 10)
    ok = ds.degrees == K_DEGREES and abs(ds.lambda_estimate - PISOT) < 0.02
    return ok, f"b={bm.params['b']}: {ds.degrees}, lambda={ds.lambda_estimate:.4f}"


HD_CASES = [
    ("generic", lambda: cx.generic_params("Hd", seed=5), 3.0),
    ("c=0", lambda: {"a": Fraction(7, 5), "b": Fraction(3, 10), "c": 0}, 2.0),
    ("a=(c-b)c", lambda: {"a": (Fraction(1, 2) - Fraction(3, 10)) / 2, "b": Fraction(3, 10), "c": Fraction(1, 2)},
     1 + math.sqrt(2)),
    ("a=(c-b+1)c", lambda: {"a": (Fraction(1, 2) - Fraction(3, 10) + 1) / 2, "b": Fraction(3, 10),
                            "c": Fraction(1, 2)}, (3 + math.sqrt(5)) / 2),
]


@criterion(4, "Henon-family complexity reductions", 600)
def hd_reductions():
    parts, ok = [], True
    for label, params, target in HD_CASES:
        ds = cx.degree_sequence(bind("Hd", params()), 7)
        ok &= abs(ds.lambda_estimate - target) < 0.1
        parts.append(f"{label} {ds.lambda_estimate:.4f}~{target:.4f}")
    return ok, ", ".join(parts)


K_PRIMITIVE = [1, 1, 1, 0, 1, 0, 1, 1, 1, 1, 2, 2]
_census_cache: dict = {}


def k_census(b=Fraction(-3, 5), n_max: int = 12) -> cx.FixCountLedger:
    key = (b, n_max)
    if key not in _census_cache:
        _census_cache[key] = cx.primitive_counts(bind("K", {"b": b}), n_max)
    return _census_cache[key]


@criterion(5, "cycle census and zeta function of K", 900)
def k_cycles():
    led = k_census()
    counts_ok = led.primitive == K_PRIMITIVE and all(led.saturated)
    exact = [cx.exact_fix_count(bind("K", {"b": Fraction(-3, 5)}), n) for n in range(1, 5)]
    exact_ok = exact == led.total[:4]
    mobius_ok = led.total == cx.fix_from_primitive(led.primitive) and \
        cx.primitive_from_fix(led.total) == led.primitive
    zeta = cx.zeta_check(led.total)
    ok = counts_ok and exact_ok and mobius_ok and zeta.matches
    return ok, (f"c={led.primitive}, saturated={all(led.saturated)}, exact fix(1..4)={exact}, "
                f"fix={led.total}, zeta through t^12: {zeta.matches}")


def p10(b):
    return b**8 - 4 * b**7 + 9 * b**6 - 15 * b**5 + 16 * b**4 - 14 * b**3 + 8 * b**2 - 3 * b + 1


def j10(b):
    return (1 - b**10) * b**10 / ((1 + b) * (1 - b**5) * p10(b))


def p11(b):
    p2 = np.polyval([1, -6, 19, -41, 68, -87, 89, -72, 46, -22, 8, -2], b) * b
    p1 = np.polyval([-1, 2, -5, 10, -19, 22, -34, 21, -38, 13, -35, 16, -25, 14, -8, 8, -2, 5, -1, 1], b)
    p0 = (1 - b**11) * b**15 / (1 - b)
    return p2, p1, p0


@criterion(6, "Jacobians along cycles of K", 1200)
def k_jacobians():
    b = -0.6
    led = k_census()
    J = {n: [c.jacobian for c in led.cycles[n]] for n in (1, 3, 10, 11)}
    e1 = abs(J[1][0] - (1 - b))
    e3 = abs(J[3][0] - (1 + b + b * b))
    e10 = abs(J[10][0] - j10(b))
    roots = np.roots(p11(b))
    e11 = max(min(abs(j - r) for r in roots) for j in J[11])
    distinct = len(J[11]) == 2 and abs(J[11][0] - J[11][1]) > 1e-9
    ok = e1 < 1e-8 and e3 < 1e-8 and e10 < 1e-6 and e11 < 1e-6 and distinct
    return ok, f"errors: n=1 {e1:.1e}, n=3 {e3:.1e}, n=10 {e10:.1e}, n=11 {e11:.1e} (two distinct: {distinct})"


@criterion(7, "stability boundaries of K's fixed point", 60)
def k_stability():
    found = [cx.stability_boundary("K", {"b": Fraction(1, 2)}, "b", lo, hi)
             for lo, hi in ((0.5, 0.9), (0.9, 1.2), (2.0, 4.0))]
    ok = all(abs(f - t) < 1e-3 for f, t in zip(found, (0.75, 1.0, 3.0)))
    return ok, "boundaries " + ", ".join(f"{f:.5f}" for f in found)


REFERENCE_DIMENSIONS = {-0.9: (1.17, 1.34), -0.8: (1.24, 1.36), -0.6: (1.37, 1.44), -0.5: (1.42, 1.52),
          -0.4: (1.47, 1.52), -0.3: (1.51, 1.56), -0.2: (1.57, 1.66)}


@criterion(8, "reference dimensions of K", 1800)
def reference_dimensions():
    reps = eg.dimension_sweep("K", {"b": Fraction(-3, 5)}, "b", list(REFERENCE_DIMENSIONS), n=10**6, box=True)
    ok, parts = True, []
    for r in reps:
        ky, bx = REFERENCE_DIMENSIONS[r.param]
        good = (r.d_ky is not None and r.d_box is not None and abs(r.d_ky - ky) <= 0.05
                and abs(r.d_box - bx) <= 0.10 and r.d_ky <= r.d_box)
        ok &= good
        parts.append(f"{r.param}: {r.d_ky:.3f}/{r.d_box:.3f}")
    return ok, "; ".join(parts)


SUM_RULE_RUNS = [("K", {"b": Fraction(b).limit_denominator(100)}, (0.5, 0.7)) for b in (-0.9, -0.6, -0.3, -0.1)] + [
    ("Hd", {"a": Fraction(7, 5), "b": Fraction(3, 10), "c": Fraction(1, 10)}, (0.1, 0.1)),
    ("Hd", {"a": Fraction(7, 5), "b": Fraction(3, 10), "c": 0}, (0.1, 0.1)),
    ("K2", {"a": 3, "b": 5}, (0.5, 0.7)),
]


@criterion(9, "Lyapunov sum rule", 300)
def sum_rule():
    worst = 0.0
    for map_id, params, p0 in SUM_RULE_RUNS:
        r = eg.lyapunov(bind(map_id, params), p0, n=200_000)
        worst = max(worst, r.sum_rule_error)
    r = eg.lyapunov(bind("Hd", {"a": Fraction(7, 5), "b": Fraction(3, 10), "c": 0}), (0.1, 0.1), n=10**6)
    henon = abs(r.sigma1 + r.sigma2 - math.log(0.3))
    return worst < 1e-3 and henon < 1e-6, f"worst sum-rule error {worst:.1e}; Henon |s1+s2-ln 0.3| = {henon:.1e}"


PC_LEDGER = {"K": ("Short", "Long"), "Hd": ("Short", "Long"), "K6": ("Short", "Short"),
             "K1": ("Long", "Long"), "K2": ("Long", "Long"), "K3": ("Long", "Long"),
             "K4": ("Long", "Long"), "K5": ("Long", "Long")}


@criterion(10, "short/long post-critical matrix", 300)
def pc_matrix():
    bad = []
    for map_id, expected in PC_LEDGER.items():
        tied = ("b",) if map_id == "K4" else ()
        for draw in range(2):
            params = cx.generic_params(map_id, seed=100 + draw, tied=tied)
            got = tuple(pc_direction(bind(map_id, params, d), n_max=12).length for d in ("forward", "backward"))
            if got != expected:
                bad.append(f"{map_id} {params}: {got}")
    return not bad, f"16 classifications, mismatches: {bad or 'none'}"


@criterion(11, "zero Lyapunov exponent for a two-form map", 120)
def two_form_lyapunov():
    r = eg.lyapunov(bind("K2", {"a": 3, "b": 5}), (0.5, 0.7), n=10**6)
    ok = isinstance(r.status, eg.Bounded) and abs(r.sigma1) < 5e-3
    return ok, f"K2 (3,5): sigma1={r.sigma1:.2e}, status {r.status}"
