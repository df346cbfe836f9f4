"""Covariant curves, preserved two-forms and the non-standard fixed point census.

A candidate ``m = N/D`` defines the two-form ``du dv / m``.  It is preserved
when the cofactor ``m(K(p)) / m(p)`` equals the Jacobian ``J(p)``; we test
that identity by exact evaluation at random rational points.

The small expression language accepted by :func:`parse_expression` is::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("+" | "-") unary | power
    power  := atom (("^" | "**") unary)?
    atom   := NUMBER | NAME | "(" expr ")"

NUMBER is an integer or a decimal; ``3/5`` is an ordinary division, so
rational literals come for free.  Exponents must reduce to integers.
"""
from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import sympy as sp

from .exactnum import to_fraction
from .maps import (
    INF,
    BoundMap,
    Indeterminacy,
    JacobianPole,
    U,
    V,
    _eval_q,
    _qpoly,
    fmt_point,
    get_family,
)


class ParseError(ValueError):
    pass


class InconclusiveSampling(RuntimeError):
    """Every sampled point fell on a zero set or a pole."""


# ---------------------------------------------------------------------------
# expression grammar
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")


def _tokenize(text: str) -> list[tuple[str, str]]:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos:].strip()[:1]!r} at offset {pos}")
        num, name, op = m.groups()
        out.append(("num", num) if num else ("name", name) if name else ("op", op))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens, names: dict):
        self.toks = tokens
        self.i = 0
        self.names = names

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, value=None):
        kind, tok = self.peek()
        if kind is None:
            raise ParseError("unexpected end of expression")
        if value is not None and tok != value:
            raise ParseError(f"expected {value!r}, found {tok!r}")
        self.i += 1
        return kind, tok

    def expr(self):
        acc = self.term()
        while self.peek()[1] in ("+", "-"):
            _, op = self.take()
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self):
        acc = self.unary()
        while self.peek()[1] in ("*", "/"):
            _, op = self.take()
            rhs = self.unary()
            if op == "/" and rhs == 0:
                raise ParseError("division by zero")
            acc = acc * rhs if op == "*" else acc / rhs
        return acc

    def unary(self):
        if self.peek()[1] in ("+", "-"):
            _, op = self.take()
            val = self.unary()
            return -val if op == "-" else val
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] in ("^", "**"):
            self.take()
            exp = self.unary()
            if not (exp.is_Integer if isinstance(exp, sp.Basic) else False):
                raise ParseError(f"exponent must be an integer, got {exp}")
            return base ** int(exp)
        return base

    def atom(self):
        kind, tok = self.take()
        if kind == "num":
            f = Fraction(tok)
            return sp.Rational(f.numerator, f.denominator)
        if kind == "name":
            if tok not in self.names:
                raise ParseError(f"unknown name {tok!r}; allowed: {', '.join(self.names)}")
            return self.names[tok]
        if tok == "(":
            val = self.expr()
            self.take(")")
            return val
        raise ParseError(f"unexpected {tok!r}")


def parse_expression(text: str, names: Iterable[str] = ("u", "v")):
    """Parse ``text`` into a sympy expression over the given variable names."""
    toks = _tokenize(text)
    if not toks:
        raise ParseError("empty expression")
    parser = _Parser(toks, {n: sp.Symbol(n) for n in names})
    val = parser.expr()
    if parser.i != len(toks):
        raise ParseError(f"trailing input at {parser.peek()[1]!r}")
    return val


# ---------------------------------------------------------------------------
# candidates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CovariantCandidate:
    numerator: sp.Expr
    denominator: sp.Expr = sp.Integer(1)
    label: str = ""

    def __post_init__(self):
        if sp.expand(self.numerator) == 0:
            raise ValueError("candidate numerator is zero")
        if sp.gcd(self.numerator, self.denominator).has(U, V):
            raise ValueError("numerator and denominator share a factor")

    @classmethod
    def from_expr(cls, expr, label: str = "") -> "CovariantCandidate":
        num, den = sp.fraction(sp.cancel(sp.together(expr)))
        return cls(sp.factor(num), sp.factor(den), label or str(expr))

    @classmethod
    def parse(cls, text: str, map_id: str) -> "CovariantCandidate":
        names = ("u", "v") + tuple(get_family(map_id).params)
        return cls.from_expr(parse_expression(text, names), text)

    @property
    def degree(self) -> int:
        """Degree bound: total degree of numerator plus denominator."""
        return sum(sp.Poly(e, U, V).total_degree() for e in (self.numerator, self.denominator))

    def bind(self, bm: BoundMap) -> "_BoundCandidate":
        subs = bm.sym_params
        return _BoundCandidate(_qpoly(self.numerator.subs(subs)), _qpoly(self.denominator.subs(subs)))

    def __str__(self):
        if self.denominator == 1:
            return str(self.numerator)
        return f"({self.numerator})/({self.denominator})"


@dataclass(frozen=True)
class _BoundCandidate:
    num: dict
    den: dict

    def __call__(self, u, v):
        d = _eval_q(self.den, u, v)
        if d == 0:
            return None
        return _eval_q(self.num, u, v) / d


_c, _a, _eps = sp.symbols("c a epsilon")

TWO_FORMS = {
    "K1": CovariantCandidate(U * V * (V - U + U * V), label="m1"),
    "K2": CovariantCandidate((U - 1) * (V - 1) * (U - V), label="m2"),
    "K3": CovariantCandidate(
        (U - 1) * (V - U) * ((_c + 7) * V - _c + 7) * ((_c - 7) * V - _c - 7), V - 1, label="m3"),
    "K4": CovariantCandidate(
        (U - 1) * (2 * (2 * _a - 1) * (U + V**2) + (5 * _a - 4) * (1 + U) * V), label="m4"),
}

K3_TRUNCATED = CovariantCandidate(
    (U - 1) * (V - U) * ((_c + 7) * V - _c + 7) * ((_c - 7) * V - _c - 7), label="m3 without 1/(v-1)")

# the only catalogued extra factor: K3's cofactor ratio once the line v = 1 is dropped
_K3_N = 3 * U * V + 3 * U + V
_K3_D = -(_c**2 + 35) * U * V**2 + 2 * (_c**2 + 7) * U * V - 28 * V**2 - (_c**2 - 49) * U
EXTRA_FACTORS = {"K3": [("28*N/D", 28 * _K3_N, _K3_D)]}


# ---------------------------------------------------------------------------
# cofactor identity
# ---------------------------------------------------------------------------

@dataclass
class CofactorVerdict:
    tag: str                      # ExactTwoForm | CovariantWithExtraFactor | NotCovariant
    extra_factor: str | None = None
    evidence: list = field(default_factory=list)   # (point, lhs, rhs)
    n_tested: int = 0
    n_skipped: int = 0

    def __str__(self):
        return f"CovariantWithExtraFactor({self.extra_factor})" if self.extra_factor else self.tag

    def to_json(self) -> dict:
        return {
            "verdict": self.tag,
            "extra_factor": self.extra_factor,
            "n_tested": self.n_tested,
            "n_skipped": self.n_skipped,
            "evidence": [{"point": fmt_point(p), "lhs": str(l), "rhs": str(r)} for p, l, r in self.evidence],
        }


def _random_coordinate(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-10**6, 10**6), rng.randint(1, 10**3))


def default_sample_size(bm: BoundMap, m: CovariantCandidate) -> int:
    num, den = sp.fraction(sp.cancel(bm.jacobian_expr))
    deg_j = sp.Poly(num, U, V).total_degree() + sp.Poly(den, U, V).total_degree()
    return (m.degree * bm.degree + deg_j + 4) ** 2


def _sample(bm, mb, n_points, rng, max_tries):
    """Yield (p, ratio, J) for n_points usable points, plus the skip count."""
    out, skipped = [], 0
    while len(out) < n_points:
        if skipped > max_tries:
            break
        u, v = _random_coordinate(rng), _random_coordinate(rng)
        mp = mb(u, v)
        if not mp:
            skipped += 1
            continue
        try:
            q = bm.eval_ext((u, v))
            jac = bm.jacobian(u, v)
        except (Indeterminacy, JacobianPole):
            skipped += 1
            continue
        if INF in q or jac == 0:
            skipped += 1
            continue
        mq = mb(*q)
        if mq is None:
            skipped += 1
            continue
        out.append(((u, v), mq / mp, jac))
    return out, skipped


def cofactor_check(bm: BoundMap, m: CovariantCandidate, n_points: int | None = None,
                   seed: int = 0, cross_check: bool = True) -> CofactorVerdict:
    """Decide whether m(K(p))/m(p) = J(p), exactly, on random rational points."""
    if bm.symbolic:
        raise ValueError("cofactor_check needs numeric parameters")
    n_points = n_points or default_sample_size(bm, m)
    rng = random.Random(seed)
    mb = m.bind(bm)
    factors = [(label, _BoundCandidate(_qpoly(n.subs(bm.sym_params)), _qpoly(d.subs(bm.sym_params))))
               for label, n, d in EXTRA_FACTORS.get(bm.id, []) if bm.direction == "forward"]

    sizes = [n_points] + ([max(50, n_points // 4)] if cross_check else [])
    samples, skipped = [], 0
    for size in sizes:
        pts, sk = _sample(bm, mb, size, rng, max_tries=20 * size)
        samples.extend(pts)
        skipped += sk
    if not samples:
        raise InconclusiveSampling(f"no usable test point for {m} on {bm}")

    if all(ratio == jac for _, ratio, jac in samples):
        ev = [(p, r, j) for p, r, j in samples[:5]]
        return CofactorVerdict("ExactTwoForm", None, ev, len(samples), skipped)
    for label, fb in factors:
        ok = True
        for p, ratio, jac in samples:
            f = fb(*p)
            if f is None or ratio != f * jac:
                ok = False
                break
        if ok:
            ev = [(p, r, fb(*p) * j) for p, r, j in samples[:5]]
            return CofactorVerdict("CovariantWithExtraFactor", label, ev, len(samples), skipped)
    bad = [(p, r, j) for p, r, j in samples if r != j][:5]
    return CofactorVerdict("NotCovariant", None, bad, len(samples), skipped)


# ---------------------------------------------------------------------------
# curve fitting
# ---------------------------------------------------------------------------

def _projective(p):
    """P^1 x P^1 point -> P^2 point [x : y : z], None for (inf, inf) or dependent points."""
    if None in p:
        return None
    pair = []
    for x in p:
        if x is INF:
            pair.append((1, 0))
        else:
            f = to_fraction(x)
            pair.append((f.numerator, f.denominator))
    (a0, a1), (b0, b1) = pair
    xyz = (a0 * b1, b0 * a1, a1 * b1)
    return None if xyz == (0, 0, 0) else xyz


def _monomials(d: int):
    return [(i, j) for tot in range(d + 1) for i in range(tot, -1, -1) for j in [tot - i]]


def _normalize_poly(expr):
    poly = sp.Poly(expr, U, V, domain="QQ")
    _, prim = poly.clear_denoms()
    prim = prim.primitive()[1]
    if prim.LC() < 0:
        prim = -prim
    return prim.as_expr()


def fit_algebraic_curve(points: Sequence, degree: int):
    """Lowest-degree curve of degree <= ``degree`` through all points, or None."""
    proj = [q for q in (_projective(p) for p in points) if q is not None]
    proj = list(dict.fromkeys(proj))
    need = (degree + 1) * (degree + 2) // 2
    if len(proj) < need:
        raise ValueError(f"need at least {need} distinct points for degree {degree}, got {len(proj)}")
    for d in range(1, degree + 1):
        monos = _monomials(d)
        rows = [[sp.Integer(x) ** i * sp.Integer(y) ** j * sp.Integer(z) ** (d - i - j) for i, j in monos]
                for x, y, z in proj]
        basis = sp.Matrix(rows).nullspace()
        if not basis:
            continue
        polys = [sum(c * U**i * V**j for c, (i, j) in zip(vec, monos)) for vec in basis]
        if len(polys) == 1:
            return _normalize_poly(polys[0])
        g = polys[0]
        for q in polys[1:]:
            g = sp.gcd(g, q)
        return _normalize_poly(g if g.has(U, V) else polys[0])
    return None


def vanishes_on(poly, points) -> bool:
    """Exact check that poly (in u, v) is zero at every finite point."""
    q = _qpoly(poly)
    return all(_eval_q(q, to_fraction(p[0]), to_fraction(p[1])) == 0
               for p in points if INF not in p)


# ---------------------------------------------------------------------------
# non-standard fixed points
# ---------------------------------------------------------------------------

@dataclass
class CensusRow:
    order: int
    point: tuple
    jacobian: complex
    nonstandard: bool
    exact: Fraction | None = None


@dataclass
class Census:
    rows: list
    tol: float

    @property
    def summary(self) -> dict:
        out = {}
        for r in self.rows:
            tot, ns = out.get(r.order, (0, 0))
            out[r.order] = (tot + 1, ns + int(r.nonstandard))
        return dict(sorted(out.items()))

    def to_json(self) -> dict:
        def num(z):
            z = complex(z)
            return z.real if abs(z.imag) < 1e-12 else [z.real, z.imag]
        return {
            "tol": self.tol,
            "rows": [{"order": r.order, "point": [num(x) for x in r.point], "J": num(r.jacobian),
                      "nonstandard": r.nonstandard, "exact_J": None if r.exact is None else str(r.exact)}
                     for r in self.rows],
            "summary": {str(k): {"cycles": t, "nonstandard": n} for k, (t, n) in self.summary.items()},
        }


def _snap(x: complex, max_den: int = 10**6) -> Fraction | None:
    if abs(x.imag) > 1e-12:
        return None
    f = Fraction(x.real).limit_denominator(max_den)
    return f if abs(float(f) - x.real) < 1e-9 * max(1.0, abs(x.real)) else None


def _exact_cycle_jacobian(bm: BoundMap, points) -> Fraction | None:
    snapped = []
    for p in points:
        s = (_snap(complex(p[0])), _snap(complex(p[1])))
        if None in s:
            return None
        snapped.append(s)
    try:
        for k, p in enumerate(snapped):
            if bm.eval_ext(p) != snapped[(k + 1) % len(snapped)]:
                return None
        return math.prod((bm.jacobian(*p) for p in snapped), start=Fraction(1))
    except (Indeterminacy, JacobianPole):
        return None


def nonstandard_fixed_census(bm: BoundMap, cycles: Sequence, tol: float = 1e-6) -> Census:
    """Jacobian of K^n along each cycle; non-standard when |J - 1| > tol."""
    rows = []
    for cyc in cycles:
        exact = _exact_cycle_jacobian(bm, cyc.points)
        jac = complex(exact) if exact is not None else complex(cyc.jacobian)
        rows.append(CensusRow(cyc.order, tuple(cyc.points[0]), jac, abs(jac - 1) > tol, exact))
    return Census(rows, tol)
