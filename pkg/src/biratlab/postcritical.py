"""Orbits of the exceptional curves (post-critical set).

An exceptional curve is followed through three generic fibre points at once.
Coordinates that still differ between the fibres are *dependent* (printed
``*``); once all three agree the orbit has blown down to a point.  When an
orbit point is an indeterminacy point, the image is taken as the limit
along a perturbed path ``p(t) + s*w``, iterated as truncated power series in
``s``.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import sympy as sp

from .exactnum import PRIME, cheb, mod_of, to_fraction
from .maps import (
    INF,
    BoundMap,
    ConfigError,
    ExceptionalComponent,
    Indeterminacy,
    U,
    V,
    _canonical,
    _from_p1,
    _p1,
    _symbolic_components,
    bind,
    fmt_ext,
    fmt_point,
    get_family,
)


class NotAvailable(LookupError):
    """No catalogued closed form for the requested orbit or index."""


class NotApplicable(ValueError):
    pass


class NoLimit(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# statuses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShortAtFixedPoint:
    point: tuple

    def __str__(self):
        return f"ShortAtFixedPoint{fmt_point(self.point)}"


@dataclass(frozen=True)
class ShortAtInfinity:
    point: tuple

    def __str__(self):
        return f"ShortAtInfinity{fmt_point(self.point)}"


@dataclass(frozen=True)
class ShortAtCycle:
    period: int
    points: tuple

    def __str__(self):
        return f"ShortAtCycle({self.period})"


@dataclass(frozen=True)
class HitIndeterminacy:
    step: int

    def __str__(self):
        return f"HitIndeterminacy({self.step})"


@dataclass(frozen=True)
class LongOpen:
    n_max: int

    def __str__(self):
        return f"LongOpen({self.n_max})"


@dataclass(frozen=True)
class VariableDependent:
    steps: int

    def __str__(self):
        return "VariableDependent"


SHORT_STATUSES = (ShortAtFixedPoint, ShortAtInfinity, ShortAtCycle, HitIndeterminacy)

MAX_DEPENDENT_STEPS = 3
MAX_PERIOD = 12


@dataclass
class PCOrbit:
    source: ExceptionalComponent
    direction: str
    points: list            # entries are (u, v); a coordinate is None while fibre-dependent
    status: object
    param_degrees: list = field(default_factory=list)
    symbolic_param: str | None = None
    continued: list = field(default_factory=list)  # steps reached through an indeterminacy point
    map_id: str = ""

    @property
    def is_short(self) -> bool:
        return isinstance(self.status, SHORT_STATUSES)

    def exact_points(self) -> list:
        return [p for p in self.points if None not in p]

    def to_json(self, limit: int | None = None) -> dict:
        pts = self.points if limit is None else self.points[:limit]
        cls = classify_pc(self)
        return {
            "component": self.source.label,
            "polynomial": str(self.source.poly),
            "direction": self.direction,
            "points": [[fmt_ext(c) for c in p] for p in pts],
            "status": str(self.status),
            "continued_through_indeterminacy": self.continued,
            "param_degrees": self.param_degrees,
            "symbolic_param": self.symbolic_param,
            "degree_measure": "max degree over numerators and denominators of u_n and v_n",
            "classification": {"length": cls.length, "integrability": cls.integrability},
        }


@dataclass(frozen=True)
class PCClassification:
    length: str          # Short | Long
    integrability: str   # Integrable | NonIntegrable | Undecided | NotApplicable


# ---------------------------------------------------------------------------
# truncated power series in s, for limits through indeterminacy points
# ---------------------------------------------------------------------------

def _smul(a, b):
    n = min(len(a), len(b))
    out = [Fraction(0)] * n
    for i in range(n):
        ai = a[i]
        if ai:
            for j in range(n - i):
                if b[j]:
                    out[i + j] += ai * b[j]
    return out


def _sadd(a, b):
    n = min(len(a), len(b))
    return [a[i] + b[i] for i in range(n)]


def _sscale(a, c):
    return [x * c for x in a]


def _val(a):
    for i, x in enumerate(a):
        if x:
            return i
    return None


def _spows(a, n):
    out = [[Fraction(1)] + [Fraction(0)] * (len(a) - 1)]
    for _ in range(n):
        out.append(_smul(out[-1], a))
    return out


class PrecisionLost(ArithmeticError):
    pass


def _series_step(bm: BoundMap, P):
    """Image of a point of P^1 x P^1 with series coordinates [(A0, A1), (B0, B1)]."""
    (a0, a1), (b0, b1) = P
    out = []
    for nd, dd, du, dv in bm._int_components:
        pa0, pa1 = _spows(a0, du), _spows(a1, du)
        pb0, pb1 = _spows(b0, dv), _spows(b1, dv)
        ln = min(len(a0), len(a1), len(b0), len(b1))
        cache = {}

        def mono(i, j):
            if (i, j) not in cache:
                cache[(i, j)] = _smul(_smul(pa0[i], pa1[du - i]), _smul(pb0[j], pb1[dv - j]))
            return cache[(i, j)]

        n = [Fraction(0)] * ln
        d = [Fraction(0)] * ln
        for (i, j), c in nd.items():
            n = _sadd(n, _sscale(mono(i, j), c))
        for (i, j), c in dd.items():
            d = _sadd(d, _sscale(mono(i, j), c))
        vn, vd = _val(n), _val(d)
        if vn is None and vd is None:
            raise PrecisionLost
        m = min(x for x in (vn, vd) if x is not None)
        n, d = n[m:], d[m:]
        if not n:
            raise PrecisionLost
        out.append((n, d))
    return out


def _series_limit(P):
    res = []
    for n, d in P:
        res.append(_from_p1(*_pair_int(n[0], d[0])))
    return tuple(res)


def _pair_int(x: Fraction, y: Fraction):
    x, y = Fraction(x), Fraction(y)
    m = math.lcm(x.denominator, y.denominator)
    a, b = int(x * m), int(y * m)
    g = math.gcd(a, b)
    a, b = a // g, b // g
    if b < 0:
        a, b = -a, -b
    return a, b


def _series_point(p, w, order):
    out = []
    for x, wx in zip(p, w):
        a, b = _p1(x)
        s0 = [Fraction(0)] * order
        s1 = [Fraction(0)] * order
        if b == 0:
            # infinity approached as 1/(s*w)
            s0[0] = Fraction(1)
            s1[1] = Fraction(wx)
        else:
            s0[0], s0[1] = Fraction(a, b), Fraction(wx)
            s1[0] = Fraction(1)
        out.append((s0, s1))
    return out


def continued_image(bm: BoundMap, start, direction, steps: int, order: int = 24):
    """Limit of the ``steps``-th image of ``start + s*direction`` as s -> 0."""
    while order <= 96:
        try:
            P = _series_point(start, direction, order)
            for _ in range(steps):
                P = _series_step(bm, P)
            return _series_limit(P)
        except PrecisionLost:
            order *= 2
    raise PrecisionLost(f"series continuation lost precision after {steps} steps")


# ---------------------------------------------------------------------------
# orbits
# ---------------------------------------------------------------------------

def _fibre_values(comp: ExceptionalComponent, rng: random.Random, k: int):
    param = comp.parametrization()
    if param is None:
        return None
    out = []
    tries = 0
    while len(out) < k and tries < 1000:
        tries += 1
        t = Fraction(rng.randint(-999, 999), rng.randint(1, 997))
        p = param(t)
        if p is None or p in [q for q, _ in out]:
            continue
        w = (Fraction(rng.randint(1, 50), rng.randint(1, 50)), Fraction(rng.randint(-50, 50) or 1, rng.randint(1, 50)))
        out.append((p, w))
    return out


def blow_down(bm: BoundMap, comp: ExceptionalComponent, seed: int = 0):
    """Image of a generic point of ``comp``; a :class:`VariableDependent` marker if it is not a point."""
    rng = random.Random(seed)
    fib = _fibre_values(comp, rng, 3)
    if fib is None:
        raise NotApplicable(f"{comp.label} has no rational graph parametrisation")
    imgs = []
    for p, w in fib:
        try:
            imgs.append(bm.eval_ext(p))
        except Indeterminacy:
            imgs.append(continued_image(bm, p, w, 1))
    merged = _merge(imgs)
    if None in merged:
        return VariableDependent(1)
    return merged


def _merge(points):
    return tuple(points[0][k] if all(p[k] == points[0][k] for p in points) else None for k in range(2))


def _height(p) -> int:
    bits = 0
    for x in p:
        if x is not None and x is not INF:
            bits = max(bits, x.numerator.bit_length(), x.denominator.bit_length())
    return bits


HEIGHT_CAP = 50_000  # bits; exponential height growth makes further exact steps pointless


def pc_iterate(bm: BoundMap, comp: ExceptionalComponent, n_max: int = 20, seed: int = 0,
               symbolic_param: str | None = None, degree_steps: int | None = None,
               height_cap: int = HEIGHT_CAP, tied: Sequence[str] = ()) -> PCOrbit:
    """Follow the blow-down orbit of ``comp`` for at most ``n_max`` steps.

    A blown-down point that repeats ends the orbit (fixed point or cycle).
    Orbits whose coordinates exceed ``height_cap`` bits stop early as
    ``LongOpen(step)``.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    rng = random.Random(seed)
    fib = _fibre_values(comp, rng, 3)
    if fib is None:
        raise NotApplicable(f"{comp.label} has no rational graph parametrisation")
    starts = [p for p, _ in fib]
    dirs = [w for _, w in fib]
    cur = list(starts)
    orbit = PCOrbit(comp, bm.direction, [], LongOpen(n_max), map_id=bm.id)
    dependent_run = 0
    for step in range(1, n_max + 1):
        nxt = []
        for k in range(3):
            try:
                nxt.append(bm.eval_ext(cur[k]))
            except Indeterminacy:
                try:
                    nxt.append(continued_image(bm, starts[k], dirs[k], step))
                except PrecisionLost:
                    orbit.status = HitIndeterminacy(step)
                    return _finish(orbit, bm, symbolic_param, degree_steps, tied)
                if step not in orbit.continued:
                    orbit.continued.append(step)
        cur = nxt
        merged = _merge(cur)
        orbit.points.append(merged)
        if None in merged:
            dependent_run += 1
            if dependent_run > MAX_DEPENDENT_STEPS:
                orbit.status = VariableDependent(step)
                return _finish(orbit, bm, symbolic_param, degree_steps, tied)
            continue
        dependent_run = 0
        if bm.is_indeterminate(merged):
            # an indeterminacy point that the continuation maps to itself is a fixed point
            img = [continued_image(bm, starts[k], dirs[k], step + 1) for k in range(3)]
            if all(i == merged for i in img):
                orbit.status = (ShortAtInfinity if INF in merged else ShortAtFixedPoint)(merged)
                return _finish(orbit, bm, symbolic_param, degree_steps, tied)
            continue
        for j in range(len(orbit.points) - 2, -1, -1):
            if orbit.points[j] == merged:
                period = len(orbit.points) - 1 - j
                orbit.points.pop()
                if period == 1:
                    orbit.status = (ShortAtInfinity if INF in merged else ShortAtFixedPoint)(merged)
                else:
                    orbit.status = ShortAtCycle(period, tuple(orbit.points[j:]))
                return _finish(orbit, bm, symbolic_param, degree_steps, tied)
        if _height(merged) > height_cap:
            orbit.status = LongOpen(step)
            return _finish(orbit, bm, symbolic_param, degree_steps, tied)
    return _finish(orbit, bm, symbolic_param, degree_steps, tied)


def _finish(orbit, bm, symbolic_param, degree_steps, tied=()):
    if symbolic_param is not None and not isinstance(orbit.status, VariableDependent):
        orbit.symbolic_param = symbolic_param
        n = degree_steps or len(orbit.points)
        orbit.param_degrees = param_degree_sequence(bm, symbolic_param, orbit.source, n, tied=tied)
    return orbit


# ---------------------------------------------------------------------------
# degrees in one parameter, over GF(p)[x]
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _symbolic_locus(map_id: str, direction: str, fixed: tuple, param: str, tied: tuple = ()):
    """Exceptional factors with ``param`` (and the ``tied`` names) symbolic, the rest fixed."""
    values = dict(fixed)
    values[param] = sp.Symbol(param)
    for name in tied:
        values[name] = sp.Symbol(param)
    bm = bind(map_id, values, direction)
    num, den = sp.fraction(sp.cancel(bm.jacobian_expr))
    out = []
    for part in (num, den):
        for f, _ in sp.factor_list(sp.expand(part), U, V, sp.Symbol(param))[1]:
            if f.has(U) or f.has(V):
                out.append(f)
    return tuple(out)


def _match_symbolic(bm: BoundMap, comp: ExceptionalComponent, param: str, tied: tuple = ()):
    fixed = tuple(sorted((k, v) for k, v in bm.params.items() if k != param and k not in tied))
    sym = sp.Symbol(param)
    value = bm.params[param]
    target = _canonical(comp.poly)
    for f in _symbolic_locus(bm.id, bm.direction, fixed, param, tied):
        g = sp.expand(f.subs(sym, sp.Rational(value.numerator, value.denominator)))
        if g != 0 and (g.has(U) or g.has(V)) and _canonical(g) == target:
            return f
    raise NotApplicable(f"no symbolic continuation of {comp.label} in {param}")


def _nmod(coeffs_low_first, p=PRIME):
    import flint
    return flint.nmod_poly([int(c) % p for c in coeffs_low_first], p)


def _sym_to_nmod(expr, x, p=PRIME):
    poly = sp.Poly(sp.expand(expr), x, domain="QQ")
    deg = poly.degree()
    if deg < 0:
        return _nmod([0], p)
    coeffs = [0] * (deg + 1)
    for (k,), c in poly.terms():
        coeffs[k] = mod_of(Fraction(int(c.p), int(c.q)), p)
    return _nmod(coeffs, p)


def _modular_components(bm: BoundMap, param: str, p: int, tied: tuple = ()):
    fixed = {k: v for k, v in bm.params.items() if k != param and k not in tied}
    x = sp.Symbol(param)
    raw = _symbolic_components(bm.id, bm.direction)
    subs = {sp.Symbol(k): sp.Rational(v.numerator, v.denominator) for k, v in fixed.items()}
    subs.update({sp.Symbol(k): x for k in tied})
    out = []
    for i in (0, 2):
        n = sp.Poly(sp.expand(raw[i].subs(subs)), U, V)
        d = sp.Poly(sp.expand(raw[i + 1].subs(subs)), U, V)
        du = max(m[0] for m in n.monoms() + d.monoms())
        dv = max(m[1] for m in n.monoms() + d.monoms())
        nd = {m: _sym_to_nmod(c, x, p) for m, c in n.terms()}
        dd = {m: _sym_to_nmod(c, x, p) for m, c in d.terms()}
        out.append((nd, dd, du, dv))
    return out


def _mod_pows(a, n):
    out = [_one_like(a)]
    for _ in range(n):
        out.append(out[-1] * a)
    return out


def _one_like(a):
    import flint
    return flint.nmod_poly([1], a.modulus())


def param_degree_sequence(bm: BoundMap, symbolic_param: str, comp: ExceptionalComponent, n_max: int,
                          seed: int = 1, p: int = PRIME, tied: Sequence[str] = ()) -> list[int]:
    """Degree in ``symbolic_param`` of the reduced orbit point after each step.

    The degree of a point is the largest degree among the numerators and
    denominators of ``u_n`` and ``v_n``.  The remaining parameters keep their
    bound rational values, except the ``tied`` ones which follow
    ``symbolic_param`` (e.g. K4 with b = a).  Arithmetic is done in
    GF(p)[param] with a random fibre value, so the result is exact with high
    probability.  The list stops early if the whole family lands on an
    indeterminacy point.
    """
    tied = tuple(tied)
    for name in (symbolic_param, *tied):
        if name not in bm.params:
            raise ConfigError(f"{bm.id} has no parameter {name!r}")
    if any(bm.params[t] != bm.params[symbolic_param] for t in tied):
        raise ConfigError("tied parameters must share the symbolic parameter's value")
    f = _match_symbolic(bm, comp, symbolic_param, tied)
    x = sp.Symbol(symbolic_param)
    rng = random.Random(seed)
    t = rng.randrange(2, p - 1)
    zero = _nmod([0], p)
    one = _nmod([1], p)
    fp = sp.Poly(f, U, V)
    if fp.degree(U) == 1:
        a = sp.expand(f).coeff(U, 1)
        b = sp.expand(f - a * U)
        pt = ((_sym_to_nmod(-b.subs(V, t), x, p), _sym_to_nmod(a.subs(V, t), x, p)), (_nmod([t], p), one))
    elif fp.degree(V) == 1:
        a = sp.expand(f).coeff(V, 1)
        b = sp.expand(f - a * V)
        pt = ((_nmod([t], p), one), (_sym_to_nmod(-b.subs(U, t), x, p), _sym_to_nmod(a.subs(U, t), x, p)))
    else:
        raise NotApplicable(f"{comp.label} is not a graph")
    comps = _modular_components(bm, symbolic_param, p, tied)
    degrees = []
    for _ in range(n_max):
        (a0, a1), (b0, b1) = pt
        new = []
        for nd, dd, du, dv in comps:
            pa0, pa1, pb0, pb1 = _mod_pows(a0, du), _mod_pows(a1, du), _mod_pows(b0, dv), _mod_pows(b1, dv)
            n = zero
            d = zero
            for (i, j), c in nd.items():
                n += c * pa0[i] * pa1[du - i] * pb0[j] * pb1[dv - j]
            for (i, j), c in dd.items():
                d += c * pa0[i] * pa1[du - i] * pb0[j] * pb1[dv - j]
            if n == 0 and d == 0:
                return degrees  # the whole family hits an indeterminacy point here
            g = n.gcd(d)
            new.append((n // g, d // g))
        pt = tuple(new)
        degrees.append(max(max(q.degree(), 0) for pair in pt for q in pair))
    return degrees


def classify_degrees(degrees: Sequence[int], window: int = 7) -> str:
    """Polynomial versus exponential growth of a parameter-degree sequence.

    Integrable when the last ``window`` entries form a quasi-polynomial of
    degree <= 2 and period <= 2, i.e. the third difference with step 2
    vanishes exactly (this covers the linear, parity-alternating growth of
    Chebyshev-type orbits).  NonIntegrable when the least-squares slope of
    log d over the second half is at least log(1.2).  Anything else is
    Undecided.
    """
    d = list(degrees)
    if len(d) < window:
        return "Undecided"
    tail = d[-window:]
    for _ in range(3):
        tail = [tail[i] - tail[i - 2] for i in range(2, len(tail))]
    if all(x == 0 for x in tail):
        return "Integrable"
    half = [(n, x) for n, x in enumerate(d, start=1)][len(d) // 2:]
    half = [(n, x) for n, x in half if x > 0]
    if len(half) >= 3:
        ns = [n for n, _ in half]
        ls = [math.log(x) for _, x in half]
        mn, ml = sum(ns) / len(ns), sum(ls) / len(ls)
        slope = sum((n - mn) * (l - ml) for n, l in zip(ns, ls)) / sum((n - mn) ** 2 for n in ns)
        if slope >= math.log(EXPONENTIAL_RATIO):
            return "NonIntegrable"
    return "Undecided"


EXPONENTIAL_RATIO = 1.2


def classify_pc(orbit: PCOrbit) -> PCClassification:
    if orbit.is_short:
        return PCClassification("Short", "NotApplicable")
    if not orbit.param_degrees:
        return PCClassification("Long", "NotApplicable")
    return PCClassification("Long", classify_degrees(orbit.param_degrees))


# ---------------------------------------------------------------------------
# whole-map ledger
# ---------------------------------------------------------------------------

@dataclass
class DirectionReport:
    map_id: str
    direction: str
    params: dict
    orbits: list
    skipped: list
    length: str
    integrability: str

    def to_json(self, limit: int | None = None) -> dict:
        return {
            "map": self.map_id,
            "direction": self.direction,
            "params": {k: str(v) for k, v in self.params.items()},
            "length": self.length,
            "integrability": self.integrability,
            "orbits": [o.to_json(limit) for o in self.orbits],
            "skipped_components": self.skipped,
        }


def pc_direction(bm: BoundMap, n_max: int = 16, seed: int = 0, symbolic_param: str | None = None,
                 degree_steps: int | None = None, tied: Sequence[str] = ()) -> DirectionReport:
    """Orbits of every parametrisable exceptional curve of one direction.

    The direction is Long when some orbit does not terminate within n_max
    (or stays fibre-dependent), Short when all of them terminate.
    """
    orbits, skipped = [], []
    for comp in bm.exceptional_locus():
        if comp.parametrization() is None:
            skipped.append(comp.label)
            continue
        orbits.append(pc_iterate(bm, comp, n_max, seed, symbolic_param, degree_steps, tied=tied))
    long_ = [o for o in orbits if not o.is_short]
    length = "Long" if long_ else "Short"
    integrability = "NotApplicable"
    if long_ and symbolic_param is not None:
        verdicts = {classify_pc(o).integrability for o in long_}
        verdicts.discard("NotApplicable")
        if "NonIntegrable" in verdicts:
            integrability = "NonIntegrable"
        elif "Undecided" in verdicts:
            integrability = "Undecided"
        elif verdicts:
            integrability = "Integrable"
    return DirectionReport(bm.id, bm.direction, dict(bm.params), orbits, skipped, length, integrability)


# ---------------------------------------------------------------------------
# catalogued closed forms
# ---------------------------------------------------------------------------

def _q(num, den):
    """num/den as a point of P^1 (den = 0 gives infinity)."""
    num, den = Fraction(num), Fraction(den)
    if den == 0:
        if num == 0:
            raise ZeroDivisionError("0/0 in closed form")
        return INF
    return num / den


def _sg(n):
    return 1 if n % 2 == 0 else -1


def _k1_minus1(p, n):
    e = p["epsilon"]
    # one coordinate vanishes identically in epsilon; keep it 0 even where the other denominator does
    if n % 2 == 0:
        return _q(2, n - 2 - n * e), Fraction(0)
    return Fraction(0), _q(2, n - 1 - (n + 1) * e)


def _k1_inv_eps(p, n):
    e = p["epsilon"]
    return _q(-1, (n - 1) * e), _q(1, 1 - (n - 1) * e)


def _k2_u0(p, n):
    b = p["b"]
    return _q(n * (b - 1), n * b - (n - 1)), Fraction(1)


def _k2_v0(p, n):
    c = 2 - p["a"] - p["b"]
    return Fraction(1), _q(n * (c - 1), n * c - (n - 1))


def _k2_third(p, n):
    a = p["a"]
    x = _q((n - 1) * a - (n - 2), (n - 1) * (a - 1))
    return x, x


def _alt(n, v):
    # (1/2)(1 + (-1)^n) + (1/2)(1 - (-1)^n) v  for the "u" of K3 orbits
    return Fraction(1) if n % 2 == 0 else v


def _k3_v3(p, n):
    c = p["c"]

    def f(c):
        return (c - 7) * (c - 21 - _sg(n) * (3 * c - 7)) * (c + 1) ** n

    def g(c):
        # (c + 1)^n here; the (c - 1)^n variant agrees only at odd n
        return (c - 7) * (c + 21 - _sg(n) * (3 * c + 7)) * (c + 1) ** n

    v = _q(f(c) - f(-c), g(c) - g(-c))
    return _alt(n, v), v


def _k3_v2(p, n):
    c = p["c"]

    def f(c):
        return (c - 7) * (3 * c + 71 + _sg(n) * (c + 21)) * (c + 1) ** (n - 2)

    def g(c):
        return (c - 7) * (3 * c - 7 + _sg(n) * (c - 21)) * (c - 1) ** (n - 2)

    v = _q(f(c) + f(-c), g(c) + g(-c))
    return (v if n % 2 == 0 else Fraction(1)), v


def _k3_v4(p, n, sign=1):
    c = sign * p["c"]
    v = (c + 7) / (c - 7) if n % 2 else (c - 7) / (c + 7)

    def f(c):
        return (c - 1) * (c + _sg(n) * 7) * (c + 7) ** (n - 1)

    u = _q(((c - 1) * (c + 7) ** n - (c + 1) * (c - 7) ** n) * v, f(c) * v + _sg(n) * f(-c))
    return u, v


def _k3_v5(p, n):
    return _k3_v4(p, n, sign=-1)


def _k3_v6(p, n):
    # orbit point n is the formula at n - 2: V6 -> (inf, inf) -> (1, ...) -> ...
    c = p["c"]
    n = n - 2

    def f(c):
        return (c - 7) * (3 * c + 7 + (c + 21) * _sg(n)) * (c + 1) ** (n + 1)

    def g(c):
        return (c + 7) / (c - 7) if n % 2 else (c - 7) / (c + 7)

    v = _q(f(c) - f(-c), f(c) * g(c) - f(-c) * g(-c))
    return _alt(n, v), v


def _k4_sigma1(a):
    return (3 * a**2 - 4 * a + 2) / (2 * (2 * a - 1))


def _k4_v1(p, n):
    a = p["a"]
    s = _k4_sigma1(a)
    T, Um = cheb("T", n, s), cheb("U", n - 1, s)
    u = _q(2 * (2 * a - 1) * T + (5 * a - 4) * a * Um - 2 * (2 * a - 1),
           2 * (2 * a - 1) * T + (5 * a - 4) * a * Um + 2 * (2 * a - 1))
    if n % 2 == 0:
        m = n // 2
        T, Um = cheb("T", m, s), cheb("U", m - 1, s)
        v = _q(-2 * (2 * a - 1) * (5 * a - 4) * T - 3 * (3 * a - 2) * (a - 2) * a * Um,
               4 * (2 * a - 1) ** 2 * T)
    else:
        m = (n + 1) // 2
        T, Um = cheb("T", m, s), cheb("U", m - 1, s)
        v = _q(2 * (2 * a - 1) * (a**2 + 2 * a - 2) * T - (3 * a - 2) * (a - 2) ** 2 * a * Um,
               -2 * (2 * a - 1) ** 2 * a * T + (a - 2) * (3 * a - 2) * (2 * a - 1) * a * Um)
    return u, v


def _k4_v3(p, n):
    # orbit point n is the formula at n - 2 (V3 -> (inf, inf) first)
    a = p["a"]
    n = n - 2
    s = _k4_sigma1(a)
    T, Um = cheb("T", n, s), cheb("U", n - 1, s)
    u = _q(2 * (2 * a - 1) * T + (3 * a - 4) * a * Um + 2,
           2 * (2 * a - 1) * T + (3 * a - 4) * a * Um - 2)
    if n % 2 == 0:
        m = n // 2
        T, Um = cheb("T", m, s), cheb("U", m - 1, s)
        v = _q(-4 * (2 * a - 1) * T - 6 * (a - 1) * a * Um, 2 * (2 * a - 1) * T + 3 * a**2 * Um)
    else:
        m = (n + 1) // 2
        T, Um = cheb("T", m, s), cheb("U", m - 1, s)
        v = _q(-2 * (2 * a - 1) * T - (5 * a - 4) * a * Um, 2 * (2 * a - 1) * a * Um)
    return u, v


def _k4_v2(p, n):
    a = p["a"]
    s = (3 * a - 4) / 2
    T, Um = cheb("T", n, s), cheb("U", n - 1, s)
    return Fraction(1), _q(2 * (2 * a - 1) * Um, 2 * T - (5 * a - 4) * Um)


def _always(p):
    return True


def _b_eq_a(p):
    return p["a"] == p["b"]


@dataclass(frozen=True)
class ClosedForm:
    family: str
    index: int            # position in the family's forward catalogue of exceptional curves
    formula: Callable
    n_min: int
    applies: Callable = _always
    verified: bool = True
    note: str = ""


CLOSED_FORMS: list[ClosedForm] = [
    ClosedForm("K1", 0, _k1_minus1, 1),
    ClosedForm("K1", 1, _k1_inv_eps, 1),
    ClosedForm("K2", 0, _k2_u0, 1),
    ClosedForm("K2", 1, _k2_v0, 1),
    ClosedForm("K2", 2, _k2_third, 1),
    ClosedForm("K3", 1, _k3_v2, 3, verified=False,
               note="does not satisfy K3(F(n)) = F(n+1); the exact V2 orbit stays fibre-dependent past (1, 1)"),
    ClosedForm("K3", 2, _k3_v3, 1),
    ClosedForm("K3", 3, _k3_v4, 1),
    ClosedForm("K3", 4, _k3_v5, 1),
    ClosedForm("K3", 5, _k3_v6, 3),
    ClosedForm("K4", 0, _k4_v1, 1, _b_eq_a),
    ClosedForm("K4", 1, _k4_v2, 1, _b_eq_a),
    ClosedForm("K4", 2, _k4_v3, 2, _b_eq_a),
]


def _catalogue_component(bm: BoundMap, comp: ExceptionalComponent) -> int | None:
    subs = {sp.Symbol(k): sp.Rational(v.numerator, v.denominator) for k, v in bm.params.items()}
    target = _canonical(comp.poly)
    for i, expr in enumerate(bm.family.catalogue_E.get("forward", [])):
        e = sp.expand(sp.sympify(expr).subs(subs))
        if (e.has(U) or e.has(V)) and _canonical(e) == target:
            return i
    return None


def closed_form_for(bm: BoundMap, comp: ExceptionalComponent) -> ClosedForm | None:
    if bm.direction != "forward":
        return None
    idx = _catalogue_component(bm, comp)
    for cf in CLOSED_FORMS:
        if cf.family == bm.id and cf.index == idx and cf.applies(bm.params):
            return cf
    return None


def verified_closed_forms(bm: BoundMap) -> list:
    """(component, closed form) pairs of the map whose formulas are trusted."""
    out = []
    for comp in bm.exceptional_locus():
        cf = closed_form_for(bm, comp)
        if cf is not None and cf.verified:
            out.append((comp, cf))
    return out


def closed_form_orbit(bm: BoundMap, comp: ExceptionalComponent, n: int, include_unverified: bool = False):
    """Catalogued closed-form value of the n-th orbit point of ``comp``."""
    cf = closed_form_for(bm, comp)
    if cf is None:
        raise NotAvailable(f"no closed form for {comp.label} under {bm!r}")
    if not cf.verified and not include_unverified:
        raise NotAvailable(f"closed form for {comp.label} is catalogued but not an orbit: {cf.note}")
    if n < cf.n_min:
        raise NotAvailable(f"closed form for {comp.label} holds for n >= {cf.n_min}")
    return cf.formula(bm.params, n)


# ---------------------------------------------------------------------------
# limits of long orbits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrbitLimit:
    point: tuple
    confirmed: bool
    method: str
    residual: float


def _richardson(xs: Sequence[Fraction], ns: Sequence[int]) -> Fraction:
    """Value at h = 0 of the polynomial in h = 1/n through (1/n_i, x_i)."""
    hs = [Fraction(1, n) for n in ns]
    total = Fraction(0)
    for i, (hi, xi) in enumerate(zip(hs, xs)):
        w = Fraction(1)
        for j, hj in enumerate(hs):
            if j != i:
                w *= (0 - hj) / (hi - hj)
        total += w * xi
    return total


def _aitken(x0, x1, x2):
    den = x2 - 2 * x1 + x0
    if den == 0:
        return x2
    return x2 - (x2 - x1) ** 2 / den


def _tail_limit(xs: list, ns: list):
    """Best of Richardson (algebraic convergence) and Aitken (geometric) on one coordinate."""
    cands = []
    for order in (4, 6, 8):
        if len(xs) > order + 1:
            r1 = _richardson(xs[-order - 1:], ns[-order - 1:])
            r0 = _richardson(xs[-order - 2:-1], ns[-order - 2:-1])
            cands.append((abs(float(r1 - r0)), float(r1), "richardson"))
    if len(xs) >= 4:
        a1 = _aitken(*xs[-3:])
        a0 = _aitken(*xs[-4:-1])
        cands.append((abs(float(a1 - a0)), float(a1), "aitken"))
    return min(cands)


def pc_limit(orbit: PCOrbit, bm: BoundMap | None = None, tol: float = 1e-9) -> OrbitLimit:
    """Numerical limit of a long orbit's tail, checked against the map's fixed points."""
    pts = orbit.points
    tail = [(i + 1, p) for i, p in enumerate(pts) if None not in p and INF not in p]
    if len(tail) < 20:
        raise NoLimit("need at least 20 proper exact points")
    bm = bm or bind(orbit.map_id, None)  # pragma: no cover - callers pass the map
    best = None
    # some orbits alternate between two sub-sequences (even/odd n) converging to one point
    for stride in (1, 2):
        for start in range(stride):
            sub = tail[start::stride][-16:]
            ns = [n for n, _ in sub]
            coords = []
            for k in range(2):
                coords.append(_tail_limit([p[k] for _, p in sub], ns))
            err = max(c[0] for c in coords)
            point = (coords[0][1], coords[1][1])
            if best is None or err < best[0]:
                best = (err, point, coords[0][2] if stride == 1 else f"{coords[0][2]}/stride2")
    err, point, method = best
    if err > 1e-6:
        raise NoLimit(f"tail does not settle (spread {err:.2e})")
    img = bm.eval_float(*point)
    residual = math.hypot(img.u - point[0], img.v - point[1]) if hasattr(img, "u") else math.inf
    return OrbitLimit(point, residual < tol, method, residual)
