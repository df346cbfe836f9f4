"""Catalogue of birational maps of the plane and their evaluation.

Each family is written once as sympy expressions in the affine coordinates
``(u, v)``.  Binding parameters yields a :class:`BoundMap`, which derives

* exact integer evaluation on points of P^1 x P^1 (the natural home of
  chains such as ``(inf, 0) -> (1, inf) -> (0, 1)``),
* the reduced homogeneous lift to P^2 (used for degree growth),
* exact and floating Jacobians, tangent matrices,
* exceptional curves (factors of the Jacobian) and indeterminacy points,
* numba-compiled float kernels shared by all parameter values.

Affine points with a coordinate at infinity are written with :data:`INF`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Callable, Mapping, Sequence, Union

import numpy as np
import sympy as sp

from .exactnum import (
    HomoPoly3,
    InvalidPoint,
    ProjPoint,
    normalize,
    reduce_triple,
    to_fraction,
)

U, V = sp.symbols("u v")


class ConfigError(ValueError):
    """Unknown family or wrong/missing parameters."""


class DegenerateFamily(ValueError):
    pass


class JacobianPole(ZeroDivisionError):
    pass


# ---------------------------------------------------------------------------
# extended points
# ---------------------------------------------------------------------------

class _Infinity:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "∞"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()
Ext = Union[Fraction, _Infinity]
ExtPoint = tuple  # (Ext, Ext)


def ext(value) -> Ext:
    if value is INF or (isinstance(value, str) and value.strip() in ("inf", "∞", "oo")):
        return INF
    return to_fraction(value)


def ext_point(u, v) -> ExtPoint:
    return (ext(u), ext(v))


FMT_MAX_BITS = 3000


def fmt_ext(x) -> str:
    """Exact text for a coordinate; huge heights are abbreviated to a float and a bit count."""
    if x is INF:
        return "inf"
    if x is None:
        return "*"
    x = Fraction(x)
    bits = max(x.numerator.bit_length(), x.denominator.bit_length())
    if bits <= FMT_MAX_BITS:
        return str(x)
    if x == 0:  # pragma: no cover - zero has height 1
        return "0"
    lg = math.log10(abs(x.numerator)) - math.log10(x.denominator)
    mant = 10 ** (lg - math.floor(lg))
    sign = "-" if x < 0 else ""
    return f"~{sign}{mant:.6f}e{math.floor(lg):+d} ({bits} bits)"


def fmt_point(p) -> str:
    return "(" + ", ".join(fmt_ext(c) for c in p) + ")"


def _p1(x: Ext) -> tuple[int, int]:
    """Integer homogeneous pair [a : b] of a P^1 value, b >= 0, gcd 1."""
    if x is INF:
        return (1, 0)
    return (x.numerator, x.denominator)


def _from_p1(a: int, b: int) -> Ext:
    if b == 0:
        if a == 0:
            raise InvalidPoint("[0:0] is not a point of P^1")
        return INF
    return Fraction(a, b)


# ---------------------------------------------------------------------------
# float evaluation results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Affine:
    u: float
    v: float


@dataclass(frozen=True)
class Infinity:
    """Image left the escape box; the (possibly infinite) coordinates are kept."""
    u: float
    v: float


@dataclass(frozen=True)
class Indeterminate:
    pass


@dataclass(frozen=True)
class Escaped:
    step: int


INDETERMINATE = Indeterminate()

ESCAPE_BOUND = 1e12
INDET_GUARD = 1e-13


# ---------------------------------------------------------------------------
# family definitions
# ---------------------------------------------------------------------------

def _henon(x, y, p):
    return 1 - p["a"] * x**2 + p["b"] * y, x


def _henon_inv(x, y, p):
    return y, (x - 1 + p["a"] * y**2) / p["b"]


def _defU(x, y, p):
    c = p["c"]
    return x / (1 + c * y), y / (1 + c * x)


def _defU_inv(x, y, p):
    c = p["c"]
    den = 1 - c**2 * x * y
    return x * (1 + c * y) / den, y * (1 + c * x) / den


def _defUt(x, y, p):
    c = p["c"]
    return x / (1 + c * x), y / (1 + c * y)


def _defUt_inv(x, y, p):
    c = p["c"]
    return x / (1 - c * x), y / (1 - c * y)


def _compose(outer, inner):
    def f(x, y, p):
        return outer(*inner(x, y, p), p)
    return f


def _k1(u, v, p):
    e = p["epsilon"]
    return (u + 1) * v / (1 - e * u), u / (1 + u - e * u)


def _k1_inv(u, v, p):
    e = p["epsilon"]
    return v / (1 - (1 - e) * v), u * (1 - v) / (1 + e * v)


def _k2(u, v, p):
    a, b = p["a"], p["b"]
    c = 2 - a - b
    den = (a - 1) * u * v + b * v + c * u
    return (a * u * v + (b - 1) * v + c * u) / den, (a * u * v + b * v + (c - 1) * u) / den


def _k2_inv(u, v, p):
    a, b = p["a"], p["b"]
    num = -a * v + a + b * u - b * v + 2 * v - 1
    return (num / (-a * v + a + b * u - b * v - u + 2 * v),
            num / (-a * v + a + b * u - b * v + v))


def _k3_parts(u, v, c):
    n = 3 * u * v + 3 * u + v
    d = -(c**2 + 35) * u * v**2 + 2 * (c**2 + 7) * u * v - 28 * v**2 - (c**2 - 49) * u
    return n, d


def _k3(u, v, p):
    n, d = _k3_parts(u, v, p["c"])
    return 1 + 28 * (v - u) * n / (u * d), 1 + 28 * (v - 1) * n / d


def _k3_inv(u, v, p):
    # conjugate of the forward map by the Cremona inverse (u, v) -> (1/u, 1/v)
    x, y = _k3(1 / u, 1 / v, p)
    return 1 / x, 1 / y


def _k4(u, v, p):
    a, b = p["a"], p["b"]
    c = 2 - a - b
    den = (a - 1) * u * v + a * (u + v)
    return (b * (v + 1) * u + (b - 1) * v) / den, (c * (u + 1) * v + (c - 1) * u) / den


def _k4_inv(u, v, p):
    a, b = p["a"], p["b"]
    num = a * u + a * v + a - 1
    return (num / (b * u + b * v + b - u),
            -num / (a * u + a * v + a + b * u + b * v + b - 2 * u - v - 2))


def _k5(u, v, p):
    q = p["q"]
    d = (q - 1) * u * v - (q + 1) * u + 2 * v
    return (q**2 * (1 + v) * u + 2 * v) / d, 1 - 2 * q * (v - 1) * u / d


def _k5_inv(u, v, p):
    q = p["q"]
    num = -(q**2 * v - q**2 - 2 * q * u + q * v + q + v - 1)
    return (num / (q * (q**2 * v + q**2 + 2 * u)),
            num / (q**2 * v - q**2 + 2 * q * u - q * v - q + v - 1))


def _k6(u, v, p):
    return v, (1 + v - u * v) / (u * v)


def _k6_inv(u, v, p):
    return (1 + u) / (u * (1 + v)), u


def _kk(u, v, p):
    return u / v + p["b"] * u, u


def _kk_inv(u, v, p):
    b = p["b"]
    return v, -v / (b * v - u)


@dataclass(frozen=True)
class MapFamily:
    id: str
    params: tuple[str, ...]
    forward: Callable
    backward: Callable
    description: str
    defaults: Mapping[str, Fraction] = field(default_factory=dict)
    # parameter values excluded from locus computations, with reasons
    degenerate: Callable[[Mapping[str, Fraction]], str | None] = lambda p: None
    # curves as printed in the source formulas: {direction: [sympy expr in u, v, params]}
    catalogue_E: Mapping[str, Sequence] = field(default_factory=dict)
    catalogue_I: Mapping[str, Sequence] = field(default_factory=dict)

    def symbols(self) -> dict[str, sp.Symbol]:
        return {name: sp.Symbol(name) for name in self.params}

    def bind(self, params: Mapping | None = None, direction: str = "forward") -> "BoundMap":
        return bind(self.id, params, direction)


def _F(*xs):
    return {k: Fraction(v) for k, v in xs}


def _degenerate_k(p):
    return "b = 0 makes K periodic of order six" if p["b"] == 0 else None


def _degenerate_hd(p):
    if p["c"] == 0:
        return "c = 0 is the polynomial Henon map: no exceptional curves"
    if p["b"] == 0:
        return "b = 0 is not birational"
    return None


def _degenerate_k1(p):
    e = p["epsilon"]
    return "epsilon in {0, 1} merges exceptional lines" if e in (0, 1) else None


def _degenerate_k2(p):
    a, b = p["a"], p["b"]
    c = 2 - a - b
    return "b = 0 or c = 0 or a = 1 degenerates the map" if 0 in (b, c) or a == 1 else None


def _degenerate_k3(p):
    c = p["c"]
    return "c in {0, +-1, +-7} merges exceptional curves" if c in (0, 1, -1, 7, -7) else None


def _degenerate_k4(p):
    a, b = p["a"], p["b"]
    return "a in {0, 1/2} or a + b = 1 degenerates the map" if a in (0, Fraction(1, 2)) or a + b == 1 else None


def _degenerate_k5(p):
    q = p["q"]
    return "q in {0, +-1} degenerates the map" if q in (0, 1, -1) else None


_s = sp.Symbol
_eps, _a, _b, _c, _q = (_s(n) for n in ("epsilon", "a", "b", "c", "q"))

FAMILIES: dict[str, MapFamily] = {}


def _register(fam: MapFamily):
    FAMILIES[fam.id] = fam


_register(MapFamily(
    "K1", ("epsilon",), _k1, _k1_inv,
    "((u+1) v/(1 - eps u), u/(1 + u - eps u))",
    _F(("epsilon", 2)), _degenerate_k1,
    catalogue_E={"forward": [U + 1, 1 - _eps * U, 1 + U - _eps * U]},
))
_register(MapFamily(
    "K2", ("a", "b"), _k2, _k2_inv,
    "homographic two-form map with c = 2 - a - b",
    _F(("a", 3), ("b", 5)), _degenerate_k2,
    catalogue_E={"forward": [U, V, (_a - 1) * U * V + (2 - _a - _b) * U + _b * V]},
))
_register(MapFamily(
    "K3", ("c",), _k3, _k3_inv,
    "strongly-regular-graph map, a = b = 6, d = c",
    _F(("c", 3)), _degenerate_k3,
    catalogue_E={"forward": [
        U, 3 * U * V + 3 * U + V, V,
        (_c - 1) * U * V - (_c + 1) * U + 2 * V,
        (_c + 1) * U * V - (_c - 1) * U - 2 * V,
        _k3_parts(U, V, _c)[1],
    ]},
))
_register(MapFamily(
    "K4", ("a", "b"), _k4, _k4_inv,
    "two-parameter map with c = 2 - a - b",
    _F(("a", 3), ("b", 3)), _degenerate_k4,
    catalogue_E={"forward": [U, V, U * (_a + (_a - 1) * V) + _a * V]},
))
_register(MapFamily(
    "K5", ("q",), _k5, _k5_inv,
    "collineation-Cremona map with a = b = q^2, c = d = q",
    _F(("q", 2)), _degenerate_k5,
    catalogue_E={"forward": [V, (_q - 1) * U * V - (_q + 1) * U + 2 * V, U]},
))
_register(MapFamily(
    "K6", (), _k6, _k6_inv,
    "parameter-free map (v, (1 + v - u v)/(u v))",
    {}, lambda p: None,
    catalogue_E={"forward": [V + 1, U, V], "backward": [U + 1, U, V + 1]},
))
_register(MapFamily(
    "K", ("b",), _kk, _kk_inv,
    "(u/v + b u, u)",
    _F(("b", Fraction(-3, 5))), _degenerate_k,
    catalogue_E={"forward": [U, V], "backward": [U - _b * V, V]},
    catalogue_I={"forward": [(0, 0), (INF, -1 / _b)], "backward": [(0, 0), (INF, INF)]},
))
_register(MapFamily(
    "Hd", ("a", "b", "c"), _compose(_henon, _defU), _compose(_defU_inv, _henon_inv),
    "Henon map composed with (u/(1 + c v), v/(1 + c u))",
    _F(("a", Fraction(7, 5)), ("b", Fraction(3, 10)), ("c", Fraction(1, 10))), _degenerate_hd,
    catalogue_E={
        "forward": [1 + _c * U, 1 + _c * V, 1 + _c * U + _c * V],
        "backward": [1 + _c * V, _c * U - _c + _b + _a * _c * V**2,
                     _c**2 * V * U - _b - _c**2 * V + _a * _c**2 * V**3],
    },
    catalogue_I={"forward": [(0, -1 / _c), (-1 / _c, 0), (-1 / _c, -1 / _c), (INF, INF)]},
))
_register(MapFamily(
    "HdTilde", ("a", "b", "c"), _compose(_henon, _defUt), _compose(_defUt_inv, _henon_inv),
    "Henon map composed with (u/(1 + c u), v/(1 + c v))",
    _F(("a", Fraction(7, 5)), ("b", Fraction(3, 10)), ("c", Fraction(1, 10))), _degenerate_hd,
))


def get_family(map_id: str) -> MapFamily:
    try:
        return FAMILIES[map_id]
    except KeyError:
        raise ConfigError(f"unknown map {map_id!r}; known: {', '.join(FAMILIES)}") from None


def hd_expanded(u, v, a, b, c):
    """Deformed Henon map written out in one piece (cross-check for the composition)."""
    u1 = (-c * u * v / ((1 + c * u) * (1 + c * v) ** 2)
          * ((b * v - a * u**2) * c**2 * v - (2 * a * u**2 + a * u * v - 2 * b * v) * c - 2 * a * u + b))
    return 1 - a * u**2 + b * v + u1, u - c * u * v / (1 + c * v)


# ---------------------------------------------------------------------------
# bound maps
# ---------------------------------------------------------------------------

def _coerce_params(fam: MapFamily, params) -> dict:
    if params is None:
        params = {}
    if not isinstance(params, Mapping):
        params = list(params)
        if len(params) != len(fam.params):
            raise ConfigError(f"{fam.id} takes {len(fam.params)} parameters {fam.params}, got {len(params)}")
        params = dict(zip(fam.params, params))
    unknown = set(params) - set(fam.params)
    if unknown:
        raise ConfigError(f"{fam.id} has no parameter(s) {sorted(unknown)}")
    missing = [n for n in fam.params if n not in params]
    if missing:
        raise ConfigError(f"{fam.id} is missing parameter(s) {missing}")
    out = {}
    for name, val in params.items():
        out[name] = val if isinstance(val, sp.Basic) and not val.is_Number else to_fraction(val)
    return out


def _sym_value(x):
    if isinstance(x, Fraction):
        return sp.Rational(x.numerator, x.denominator)
    return x


@lru_cache(maxsize=None)
def _symbolic_components(map_id: str, direction: str):
    """(Nu, Du, Nv, Dv) as cancelled sympy expressions with symbolic parameters."""
    fam = get_family(map_id)
    builder = fam.forward if direction == "forward" else fam.backward
    syms = fam.symbols()
    out = []
    for expr in builder(U, V, syms):
        num, den = sp.fraction(sp.cancel(sp.together(sp.sympify(expr))))
        out.extend([sp.expand(num), sp.expand(den)])
    return tuple(out)


def bind(map_id: str, params=None, direction: str = "forward") -> "BoundMap":
    fam = get_family(map_id)
    if direction not in ("forward", "backward"):
        raise ConfigError(f"direction must be forward or backward, not {direction!r}")
    return BoundMap(fam, _coerce_params(fam, params), direction)


class BoundMap:
    """A family with every parameter fixed (rational or one sympy symbol)."""

    def __init__(self, family: MapFamily, params: dict, direction: str = "forward"):
        self.family = family
        self.params = params
        self.direction = direction
        self.symbolic = [n for n, x in params.items() if isinstance(x, sp.Basic)]

    def __repr__(self):
        ps = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"BoundMap({self.family.id}{'^-1' if self.direction == 'backward' else ''}; {ps})"

    @property
    def id(self) -> str:
        return self.family.id

    def inverse(self) -> "BoundMap":
        return BoundMap(self.family, self.params, "backward" if self.direction == "forward" else "forward")

    def degeneracy(self) -> str | None:
        if self.symbolic:
            return None
        return self.family.degenerate(self.params)

    # -- symbolic forms -------------------------------------------------

    @cached_property
    def sym_params(self) -> dict:
        return {sp.Symbol(k): _sym_value(v) for k, v in self.params.items()}

    @cached_property
    def components(self) -> tuple:
        """(Nu, Du, Nv, Dv) sympy polynomials in u, v with parameters substituted."""
        raw = _symbolic_components(self.family.id, self.direction)
        out = []
        for i in (0, 2):
            num, den = (sp.expand(e.subs(self.sym_params)) for e in raw[i: i + 2])
            if not self.symbolic:
                num, den = sp.fraction(sp.cancel(num / den))
            out.extend([sp.expand(num), sp.expand(den)])
        return tuple(out)

    @cached_property
    def exprs(self) -> tuple:
        nu, du, nv, dv = self.components
        return nu / du, nv / dv

    @cached_property
    def _int_components(self):
        """Per output coordinate: integer-coefficient dicts {(i, j): c} for N and D."""
        if self.symbolic:
            raise ConfigError("exact integer evaluation needs numeric parameters")
        nu, du, nv, dv = self.components
        out = []
        for num, den in ((nu, du), (nv, dv)):
            pn, pd = sp.Poly(num, U, V, domain="QQ"), sp.Poly(den, U, V, domain="QQ")
            terms = [(m, Fraction(int(c.p), int(c.q))) for m, c in pn.terms()]
            dterms = [(m, Fraction(int(c.p), int(c.q))) for m, c in pd.terms()]
            lcm = math.lcm(*(c.denominator for _, c in terms + dterms))
            nd = {m: int(c * lcm) for m, c in terms if c}
            dd = {m: int(c * lcm) for m, c in dterms if c}
            du_ = max(m[0] for m in list(nd) + list(dd))
            dv_ = max(m[1] for m in list(nd) + list(dd))
            out.append((nd, dd, du_, dv_))
        return tuple(out)

    # -- exact evaluation -----------------------------------------------

    def eval_ext(self, p: ExtPoint) -> ExtPoint:
        """Exact image of a point of P^1 x P^1; raises InvalidPoint('indeterminate')."""
        (a0, a1), (b0, b1) = _p1(p[0]), _p1(p[1])
        res = []
        for nd, dd, du, dv in self._int_components:
            pa0, pa1 = _pow_list(a0, du), _pow_list(a1, du)
            pb0, pb1 = _pow_list(b0, dv), _pow_list(b1, dv)
            n = sum(c * pa0[i] * pa1[du - i] * pb0[j] * pb1[dv - j] for (i, j), c in nd.items())
            d = sum(c * pa0[i] * pa1[du - i] * pb0[j] * pb1[dv - j] for (i, j), c in dd.items())
            if n == 0 and d == 0:
                raise Indeterminacy(p)
            g = math.gcd(n, d)
            n, d = n // g, d // g
            if d < 0:
                n, d = -n, -d
            res.append(_from_p1(n, d))
        return tuple(res)

    def is_indeterminate(self, p: ExtPoint) -> bool:
        try:
            self.eval_ext(p)
        except Indeterminacy:
            return True
        return False

    def eval_affine(self, u, v) -> ExtPoint:
        return self.eval_ext((ext(u), ext(v)))

    @cached_property
    def lift(self) -> tuple[HomoPoly3, HomoPoly3, HomoPoly3]:
        """Reduced homogeneous lift (x, y, z) -> (X, Y, Z) of degree d on P^2."""
        nu, du, nv, dv = self.components
        L = sp.lcm(du, dv)
        xs = [sp.expand(nu * sp.cancel(L / du)), sp.expand(nv * sp.cancel(L / dv)), sp.expand(L)]
        x, y, z = sp.symbols("x y z")
        deg = max(sp.Poly(e, U, V).total_degree() for e in xs)
        homs = []
        for e in xs:
            poly = sp.Poly(e, U, V, domain="QQ")
            terms = {}
            for (i, j), c in poly.terms():
                terms[(i, j, deg - i - j)] = Fraction(int(c.p), int(c.q))
            homs.append(HomoPoly3(terms, deg))
        return reduce_triple(*homs)

    @property
    def degree(self) -> int:
        return self.lift[0].degree

    def eval_exact(self, p: ProjPoint):
        """Apply the homogeneous lift to a projective point; INDETERMINATE on (0, 0, 0)."""
        X, Y, Z = self.lift
        vals = (X(p.x, p.y, p.z), Y(p.x, p.y, p.z), Z(p.x, p.y, p.z))
        if all(t == 0 for t in vals):
            return INDETERMINATE
        den = math.lcm(*(Fraction(t).denominator for t in vals))
        return normalize([int(Fraction(t) * den) for t in vals])

    # -- Jacobian -------------------------------------------------------

    @cached_property
    def jacobian_expr(self):
        """Jacobian determinant as a cancelled sympy rational function."""
        fu, fv = self.exprs
        det = sp.diff(fu, U) * sp.diff(fv, V) - sp.diff(fu, V) * sp.diff(fv, U)
        return sp.factor(sp.cancel(det))

    @cached_property
    def _jac_parts(self):
        num, den = sp.fraction(sp.cancel(self.jacobian_expr))
        return _qpoly(num), _qpoly(den)

    def jacobian(self, u, v):
        """Exact J at rational (u, v); float J when given floats."""
        if isinstance(u, float) or isinstance(v, float):
            return self.jacobian_float(u, v)
        u, v = to_fraction(u), to_fraction(v)
        jn, jd = self._jac_parts
        d = _eval_q(jd, u, v)
        if d == 0:
            raise JacobianPole(f"J has a pole at ({u}, {v})")
        return _eval_q(jn, u, v) / d

    def jacobian_float(self, u: float, v: float) -> float:
        t = self.tangent(u, v)
        return float(t[0, 0] * t[1, 1] - t[0, 1] * t[1, 0])

    # -- float evaluation -------------------------------------------------

    @property
    def kernels(self) -> "Kernels":
        return compiled_kernels(self.family.id, self.direction)

    @cached_property
    def float_params(self) -> np.ndarray:
        if self.symbolic:
            raise ConfigError("float evaluation needs numeric parameters")
        return np.array([float(self.params[n]) for n in self.family.params] or [0.0])

    def eval_float(self, u: float, v: float):
        if not (math.isfinite(u) and math.isfinite(v)):
            raise InvalidPoint(f"non-finite input ({u}, {v})")
        nu, du, nv, dv = self.kernels.components(float(u), float(v), self.float_params)
        if (abs(nu) < INDET_GUARD and abs(du) < INDET_GUARD) or (abs(nv) < INDET_GUARD and abs(dv) < INDET_GUARD):
            return INDETERMINATE
        x = nu / du if du != 0 else math.copysign(math.inf, nu)
        y = nv / dv if dv != 0 else math.copysign(math.inf, nv)
        if abs(x) > ESCAPE_BOUND or abs(y) > ESCAPE_BOUND:
            return Infinity(x, y)
        return Affine(x, y)

    def tangent(self, u: float, v: float) -> np.ndarray:
        vals = self.kernels.tangent(float(u), float(v), self.float_params)
        m = np.array(vals, dtype=float).reshape(2, 2)
        if not np.all(np.isfinite(m)):
            raise JacobianPole(f"tangent map singular at ({u}, {v})")
        return m

    # -- exceptional curves and indeterminacy ------------------------------

    def exceptional_locus(self) -> list["ExceptionalComponent"]:
        """Irreducible curves where J vanishes or blows up."""
        reason = self.degeneracy()
        if reason:
            raise DegenerateFamily(reason)
        num, den = sp.fraction(sp.cancel(self.jacobian_expr))
        comps = []
        seen = set()
        for part in (num, den):
            _, factors = sp.factor_list(sp.expand(part), U, V)
            for f, _mult in factors:
                if not (f.has(U) or f.has(V)):
                    continue
                key = _canonical(f)
                if key in seen:
                    continue
                seen.add(key)
                comps.append(ExceptionalComponent.from_expr(f))
        return comps

    def indeterminacy_set(self) -> list[ExtPoint]:
        """Rational points of P^1 x P^1 where some output coordinate reads 0/0."""
        reason = self.degeneracy()
        if reason:
            raise DegenerateFamily(reason)
        pts: list[ExtPoint] = []
        for nd, dd, du, dv in self._int_components:
            for p in _common_zeros(nd, dd, du, dv):
                if p not in pts:
                    pts.append(p)
        return pts


class Indeterminacy(InvalidPoint):
    def __init__(self, point):
        super().__init__(f"indeterminate at {fmt_point(point)}")
        self.point = point


def _pow_list(x: int, n: int) -> list[int]:
    out = [1]
    for _ in range(n):
        out.append(out[-1] * x)
    return out


def _qpoly(expr) -> dict:
    poly = sp.Poly(sp.expand(expr), U, V, domain="QQ")
    return {m: Fraction(int(c.p), int(c.q)) for m, c in poly.terms()}


def _eval_q(poly: dict, u, v):
    return sum(c * u**i * v**j for (i, j), c in poly.items())


def _canonical(expr) -> sp.Expr:
    p = sp.Poly(expr, U, V, domain="QQ")
    return p.monic().as_expr()


@dataclass(frozen=True)
class ExceptionalComponent:
    """Irreducible curve ``poly(u, v) = 0`` with a rational graph parametrisation when one exists."""

    poly: sp.Expr
    label: str

    @classmethod
    def from_expr(cls, expr) -> "ExceptionalComponent":
        poly = _canonical(expr)
        return cls(poly, _label(poly))

    def parametrization(self):
        """Callable t -> (u, v) with exact rationals, or None for non-graph curves."""
        return _graph(self.poly)

    def point_at(self, t) -> ExtPoint | None:
        f = self.parametrization()
        if f is None:
            return None
        return f(to_fraction(t))

    def contains(self, u, v) -> bool:
        return sp.simplify(self.poly.subs({U: _sym_value(to_fraction(u)), V: _sym_value(to_fraction(v))})) == 0

    def divides(self, expr) -> bool:
        num, den = sp.fraction(sp.cancel(expr))
        for part in (num, den):
            if sp.rem(sp.Poly(part, U, V), sp.Poly(self.poly, U, V)).is_zero:
                return True
        return False


def _label(poly) -> str:
    p = sp.Poly(poly, U, V)
    if p.degree(V) == 0 and p.degree(U) == 1:
        return f"u = {sp.solve(poly, U)[0]}"
    if p.degree(U) == 0 and p.degree(V) == 1:
        return f"v = {sp.solve(poly, V)[0]}"
    return f"{sp.factor(poly)} = 0"


def _graph(poly):
    p = sp.Poly(poly, U, V, domain="QQ")
    if p.degree(U) == 1:
        # a(v) u + b(v) = 0 -> u = -b(v)/a(v)
        a = p.as_expr().coeff(U, 1)
        b = sp.expand(p.as_expr() - a * U)
        fa, fb = _qpoly_v(a), _qpoly_v(b)

        def f(t):
            den = _eval_v(fa, t)
            if den == 0:
                return None
            return (-_eval_v(fb, t) / den, t)
        return f
    if p.degree(V) == 1:
        a = p.as_expr().coeff(V, 1)
        b = sp.expand(p.as_expr() - a * V)
        fa, fb = _qpoly_u(a), _qpoly_u(b)

        def g(t):
            den = _eval_v(fa, t)
            if den == 0:
                return None
            return (t, -_eval_v(fb, t) / den)
        return g
    return None


def _qpoly_v(expr) -> dict:
    poly = sp.Poly(sp.expand(expr), V, domain="QQ")
    return {m[0]: Fraction(int(c.p), int(c.q)) for m, c in poly.terms()}


def _qpoly_u(expr) -> dict:
    poly = sp.Poly(sp.expand(expr), U, domain="QQ")
    return {m[0]: Fraction(int(c.p), int(c.q)) for m, c in poly.terms()}


def _eval_v(poly: dict, t):
    return sum(c * t**k for k, c in poly.items())


def _bihom(poly: dict, du: int, dv: int, a0, a1, b0, b1):
    return sum(c * a0**i * a1**(du - i) * b0**j * b1**(dv - j) for (i, j), c in poly.items())


def _common_zeros(nd: dict, dd: dict, du: int, dv: int) -> list[ExtPoint]:
    """Rational common zeros of two bihomogeneous forms on P^1 x P^1."""
    s = sp.Symbol("s")
    pts: list[ExtPoint] = []

    def rational_roots(expr, var):
        expr = sp.expand(expr)
        if expr == 0:
            return None  # identically zero
        out = []
        for f, _ in sp.factor_list(expr, var)[1]:
            if sp.Poly(f, var).degree() == 1:
                out.append(Fraction(sp.Rational(sp.solve(f, var)[0]).p, sp.Rational(sp.solve(f, var)[0]).q))
        return out

    # affine chart: resultant in v, then back-substitute
    n_aff = _bihom(nd, du, dv, U, 1, V, 1)
    d_aff = _bihom(dd, du, dv, U, 1, V, 1)
    res = sp.resultant(sp.expand(n_aff), sp.expand(d_aff), V)
    us = rational_roots(res, U)
    if us:
        for u0 in us:
            g = sp.gcd(sp.expand(n_aff.subs(U, _sym_value(u0))), sp.expand(d_aff.subs(U, _sym_value(u0))))
            vs = rational_roots(g, V) if g.has(V) else []
            for v0 in vs or []:
                pts.append((u0, v0))
    # u = infinity, v finite
    n_i = sp.expand(_bihom(nd, du, dv, 1, 0, s, 1))
    d_i = sp.expand(_bihom(dd, du, dv, 1, 0, s, 1))
    g = sp.gcd(n_i, d_i)
    if g.has(s):
        pts.extend((INF, r) for r in rational_roots(g, s))
    n_i = sp.expand(_bihom(nd, du, dv, s, 1, 1, 0))
    d_i = sp.expand(_bihom(dd, du, dv, s, 1, 1, 0))
    g = sp.gcd(n_i, d_i)
    if g.has(s):
        pts.extend((r, INF) for r in rational_roots(g, s))
    if _bihom(nd, du, dv, 1, 0, 1, 0) == 0 and _bihom(dd, du, dv, 1, 0, 1, 0) == 0:
        pts.append((INF, INF))
    return pts


# ---------------------------------------------------------------------------
# compiled float kernels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Kernels:
    components: Callable  # (u, v, P) -> (Nu, Du, Nv, Dv)
    tangent: Callable     # (u, v, P) -> (a11, a12, a21, a22)
    step: Callable        # (u, v, P) -> (Nu, Du, Nv, Dv, a11, a12, a21, a22)


def _kernel_source(name: str, exprs: Sequence, params: Sequence[str]) -> str:
    from sympy.printing.pycode import pycode

    lines = [f"def {name}(u, v, P):"]
    for k, pname in enumerate(params):
        lines.append(f"    {pname} = P[{k}]")
    body = ", ".join(f"float({pycode(e)})" for e in exprs)
    lines.append(f"    return ({body},)")
    return "\n".join(lines) + "\n"


@lru_cache(maxsize=None)
def compiled_kernels(map_id: str, direction: str) -> Kernels:
    import numba

    fam = get_family(map_id)
    nu, du, nv, dv = _symbolic_components(map_id, direction)
    fu, fv = nu / du, nv / dv
    tangent = [sp.cancel(sp.diff(f, x)) for f in (fu, fv) for x in (U, V)]
    comps = [nu, du, nv, dv]
    ns = {"math": math}
    src = (_kernel_source("_components", comps, fam.params)
           + _kernel_source("_tangent", tangent, fam.params)
           + _kernel_source("_step", comps + tangent, fam.params))
    exec(compile(src, f"<kernels {map_id} {direction}>", "exec"), ns)
    jit = numba.njit(cache=False, error_model="numpy")
    return Kernels(jit(ns["_components"]), jit(ns["_tangent"]), jit(ns["_step"]))
