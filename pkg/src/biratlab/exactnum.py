"""Exact arithmetic: rationals, projective points, polynomials.

``BigRational`` is :class:`fractions.Fraction`.  Polynomials come in three
flavours:

* :class:`UniPoly` -- univariate, rational coefficients, one named symbol
  (used for orbit coordinates as functions of a single parameter);
* :class:`HomoPoly3` -- homogeneous in ``(x, y, z)``, coefficients rational or
  :class:`UniPoly`;
* reduction to GF(p) (:func:`mod_of`) for degree bookkeeping where exact
  rationals would explode; the polynomials there are ``flint.nmod_poly``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Mapping, Sequence, Union

BigRational = Fraction

__all__ = [
    "BigRational",
    "InvalidPoint",
    "ProjPoint",
    "normalize",
    "UniPoly",
    "HomoPoly3",
    "reduce_triple",
    "cheb",
    "to_fraction",
]


class InvalidPoint(ValueError):
    pass


def to_fraction(value) -> Fraction:
    """Exact conversion; floats go through their shortest repr (0.1 -> 1/10)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise InvalidPoint(f"non-finite value {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    try:  # sympy Rational and friends
        return Fraction(int(value.p), int(value.q))
    except AttributeError:
        pass
    return Fraction(value)


# ---------------------------------------------------------------------------
# projective points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProjPoint:
    """Point of the projective plane with integer homogeneous coordinates.

    Construct through :func:`normalize` or :meth:`from_values` to get the
    canonical representative; the raw constructor does not normalize.
    """

    x: int
    y: int
    z: int

    @classmethod
    def from_values(cls, x, y, z) -> "ProjPoint":
        fx, fy, fz = (to_fraction(t) for t in (x, y, z))
        den = math.lcm(fx.denominator, fy.denominator, fz.denominator)
        return normalize(cls(int(fx * den), int(fy * den), int(fz * den)))

    @classmethod
    def affine(cls, u, v) -> "ProjPoint":
        return cls.from_values(u, v, 1)

    @property
    def is_finite(self) -> bool:
        return self.z != 0

    def to_affine(self) -> tuple[Fraction, Fraction]:
        if self.z == 0:
            raise InvalidPoint(f"{self} is on the line at infinity")
        return Fraction(self.x, self.z), Fraction(self.y, self.z)

    def __iter__(self):
        return iter((self.x, self.y, self.z))

    def __str__(self) -> str:
        return f"({self.x} : {self.y} : {self.z})"


def normalize(p) -> ProjPoint:
    x, y, z = (int(t) for t in p)
    g = math.gcd(x, y, z)
    if g == 0:
        raise InvalidPoint("all homogeneous coordinates vanish")
    x, y, z = x // g, y // g, z // g
    first = next(t for t in (x, y, z) if t != 0)
    if first < 0:
        x, y, z = -x, -y, -z
    return ProjPoint(x, y, z)


# ---------------------------------------------------------------------------
# Chebyshev polynomials
# ---------------------------------------------------------------------------

def cheb(kind: str, n: int, x):
    """T_n(x) or U_n(x) by the three-term recurrence (exact for Fractions).

    U_{-1} = 0 is allowed; T needs n >= 0.
    """
    kind = kind.upper()
    if kind == "T":
        if n < 0:
            raise ValueError("T_n needs n >= 0")
        prev, cur = 1, x
        if n == 0:
            return x * 0 + 1
    elif kind == "U":
        if n < -1:
            raise ValueError("U_n needs n >= -1")
        if n == -1:
            return x * 0
        prev, cur = 1, 2 * x
    else:
        raise ValueError(f"unknown Chebyshev kind {kind!r}")
    if n == 0:
        return x * 0 + prev
    for _ in range(n - 1):
        prev, cur = cur, 2 * x * cur - prev
    return cur


# ---------------------------------------------------------------------------
# univariate polynomials over Q
# ---------------------------------------------------------------------------

class UniPoly:
    """Dense univariate polynomial with Fraction coefficients (low degree first)."""

    __slots__ = ("coeffs", "symbol")

    def __init__(self, coeffs: Iterable = (), symbol: str = "t"):
        cs = [to_fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)
        self.symbol = symbol

    @classmethod
    def gen(cls, symbol: str = "t") -> "UniPoly":
        return cls((0, 1), symbol)

    @classmethod
    def const(cls, c, symbol: str = "t") -> "UniPoly":
        return cls((c,), symbol)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # zero polynomial -> -1

    def is_zero(self) -> bool:
        return not self.coeffs

    def lc(self) -> Fraction:
        return self.coeffs[-1]

    def _lift(self, other) -> "UniPoly":
        if isinstance(other, UniPoly):
            return other
        return UniPoly((other,), self.symbol)

    def __add__(self, other):
        o = self._lift(other)
        n = max(len(self.coeffs), len(o.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = o.coeffs + (Fraction(0),) * (n - len(o.coeffs))
        return UniPoly((p + q for p, q in zip(a, b)), self.symbol)

    __radd__ = __add__

    def __neg__(self):
        return UniPoly((-c for c in self.coeffs), self.symbol)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, UniPoly):
            c = to_fraction(other)
            return UniPoly((c * a for a in self.coeffs), self.symbol)
        if not self.coeffs or not other.coeffs:
            return UniPoly((), self.symbol)
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return UniPoly(out, self.symbol)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = UniPoly((1,), self.symbol)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __divmod__(self, other):
        other = self._lift(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        inv = 1 / other.lc()
        quo = [Fraction(0)] * max(len(rem) - dq, 0)
        for k in range(len(rem) - 1, dq - 1, -1):
            c = rem[k] * inv
            if c:
                quo[k - dq] = c
                for j, b in enumerate(other.coeffs):
                    rem[k - dq + j] -= c * b
        return UniPoly(quo, self.symbol), UniPoly(rem[:dq] if dq > 0 else (), self.symbol)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __eq__(self, other):
        if isinstance(other, UniPoly):
            return self.coeffs == other.coeffs
        try:
            return self.coeffs == UniPoly((other,)).coeffs
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __call__(self, x):
        acc = x * 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def monic(self) -> "UniPoly":
        if self.is_zero():
            return self
        return self * (1 / self.lc())

    def gcd(self, other: "UniPoly") -> "UniPoly":
        a, b = self, self._lift(other)
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    def content(self) -> Fraction:
        """Positive rational c with self/c primitive integral (0 for zero poly)."""
        if not self.coeffs:
            return Fraction(0)
        num = math.gcd(*(c.numerator for c in self.coeffs))
        den = math.lcm(*(c.denominator for c in self.coeffs))
        return Fraction(num, den)

    def __repr__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for k, c in enumerate(self.coeffs):
            if c:
                mono = "" if k == 0 else (self.symbol if k == 1 else f"{self.symbol}^{k}")
                terms.append(f"{c}" if not mono else (mono if c == 1 else f"{c}*{mono}"))
        return " + ".join(terms)


# ---------------------------------------------------------------------------
# homogeneous polynomials in (x, y, z)
# ---------------------------------------------------------------------------

Monomial = tuple[int, int, int]
Coeff = Union[Fraction, UniPoly]


class HomoPoly3:
    """Homogeneous polynomial in x, y, z stored as {(i, j, k): coeff}."""

    __slots__ = ("terms", "degree")

    def __init__(self, terms: Mapping[Monomial, Coeff], degree: int | None = None):
        clean = {}
        for mono, c in terms.items():
            if not isinstance(c, UniPoly):
                c = to_fraction(c)
            if c != 0:
                clean[tuple(mono)] = c
        degs = {sum(m) for m in clean}
        if len(degs) > 1:
            raise ValueError(f"not homogeneous: degrees {sorted(degs)}")
        if degs:
            d = degs.pop()
            if degree is not None and degree != d:
                raise ValueError(f"declared degree {degree} but terms have {d}")
            degree = d
        self.terms: dict[Monomial, Coeff] = clean
        self.degree: int = degree if degree is not None else 0

    @classmethod
    def var(cls, name: str) -> "HomoPoly3":
        mono = {"x": (1, 0, 0), "y": (0, 1, 0), "z": (0, 0, 1)}[name]
        return cls({mono: 1})

    @classmethod
    def zero(cls, degree: int) -> "HomoPoly3":
        return cls({}, degree)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "HomoPoly3") -> "HomoPoly3":
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if other.degree != self.degree:
            raise ValueError("adding homogeneous polynomials of different degree")
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return HomoPoly3(out, self.degree)

    def __neg__(self):
        return HomoPoly3({m: -c for m, c in self.terms.items()}, self.degree)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, HomoPoly3):
            return HomoPoly3({m: c * other for m, c in self.terms.items()}, self.degree)
        out: dict[Monomial, Coeff] = {}
        for (i, j, k), a in self.terms.items():
            for (p, q, r), b in other.terms.items():
                key = (i + p, j + q, k + r)
                out[key] = out.get(key, 0) + a * b
        return HomoPoly3(out, self.degree + other.degree)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "HomoPoly3":
        out = HomoPoly3({(0, 0, 0): 1})
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        return isinstance(other, HomoPoly3) and self.terms == other.terms and (
            self.degree == other.degree or not self.terms)

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __call__(self, x, y, z):
        """Evaluate at any ring elements supporting + and * (ints, Fractions, UniPolys...)."""
        acc = None
        px, py, pz = _powers(x, self.degree), _powers(y, self.degree), _powers(z, self.degree)
        for (i, j, k), c in self.terms.items():
            term = px[i] * py[j] * pz[k] * c
            acc = term if acc is None else acc + term
        if acc is None:
            return x * 0
        return acc

    def compose(self, fx: "HomoPoly3", fy: "HomoPoly3", fz: "HomoPoly3") -> "HomoPoly3":
        if self.is_zero():
            return HomoPoly3.zero(self.degree * fx.degree)
        return self(fx, fy, fz)

    def nterms(self) -> int:
        return len(self.terms)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for (i, j, k), c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(f"{s}^{e}" if e > 1 else s for s, e in zip("xyz", (i, j, k)) if e)
            parts.append(f"({c})*{mono}" if mono else f"({c})")
        return " + ".join(parts)


def _powers(x, n: int) -> list:
    out = [x * 0 + 1]
    for _ in range(n):
        out.append(out[-1] * x)
    return out


def _ring():
    from sympy.polys.domains import QQ
    from sympy.polys.rings import ring

    R, *_ = ring("x,y,z", QQ)
    return R


_R3 = None


def _to_ring(p: HomoPoly3):
    global _R3
    if _R3 is None:
        _R3 = _ring()
    from sympy import Rational

    return _R3({m: Rational(c.numerator, c.denominator) for m, c in p.terms.items()})


def _from_ring(el, degree: int) -> HomoPoly3:
    return HomoPoly3({m: Fraction(int(c.numerator), int(c.denominator)) for m, c in el.terms()}, degree)


def triple_gcd(fx: HomoPoly3, fy: HomoPoly3, fz: HomoPoly3) -> HomoPoly3:
    """Polynomial gcd (monic in the ring's ordering) of three rational HomoPoly3."""
    elems = [_to_ring(p) for p in (fx, fy, fz) if not p.is_zero()]
    if not elems:
        raise InvalidPoint("all three components vanish identically")
    g = reduce(lambda a, b: a.gcd(b), elems)
    g = g.monic()
    deg = max(sum(m) for m in g.monoms())
    return _from_ring(g, deg)


def reduce_triple(fx: HomoPoly3, fy: HomoPoly3, fz: HomoPoly3):
    """Divide out the common factor of a homogeneous triple, numeric content included.

    Returns the reduced triple; the outputs have integer coefficients with no
    common integer factor and no common polynomial factor.
    """
    if len({p.degree for p in (fx, fy, fz) if not p.is_zero()}) > 1:
        raise ValueError("components must share one degree")
    return reduce_triple_with_factor(fx, fy, fz)[0]


def reduce_triple_with_factor(fx: HomoPoly3, fy: HomoPoly3, fz: HomoPoly3):
    """Like :func:`reduce_triple` but also return the extracted factor g.

    ``g * out_i == in_i`` for each component.
    """
    g = triple_gcd(fx, fy, fz)
    gr = _to_ring(g)
    outs = []
    for p in (fx, fy, fz):
        if p.is_zero():
            outs.append(None)
            continue
        q, r = _to_ring(p).div(gr)
        if r:
            raise ArithmeticError("gcd does not divide component")  # pragma: no cover
        outs.append(_from_ring(q, p.degree - g.degree))
    deg = next(o.degree for o in outs if o is not None)
    outs = [o if o is not None else HomoPoly3.zero(deg) for o in outs]
    coeffs = [c for o in outs for c in o.terms.values()]
    content = Fraction(math.gcd(*(c.numerator for c in coeffs)), math.lcm(*(c.denominator for c in coeffs)))
    sign = -1 if _leading(outs) < 0 else 1
    scale = sign / content
    outs = [o * scale for o in outs]
    return tuple(outs), g * (1 / scale)


def _leading(polys: Sequence[HomoPoly3]) -> Fraction:
    for p in polys:
        if p.terms:
            return p.terms[max(p.terms)]
    return Fraction(0)


# ---------------------------------------------------------------------------
# modular images
# ---------------------------------------------------------------------------

PRIME = 2**31 - 1


def mod_of(value, p: int = PRIME) -> int:
    """Image of a rational in GF(p)."""
    f = to_fraction(value)
    den = f.denominator % p
    if den == 0:
        raise ZeroDivisionError(f"{f} has a denominator divisible by p")
    return f.numerator * pow(den, -1, p) % p
