"""Degree growth, periodic orbits and the dynamical zeta function.

Degrees are measured on the homogeneous lift to P^2, reduced at every step.
The default ``line`` method restricts the iteration to a random line over
GF(p), which keeps the polynomials univariate; the ``homogeneous`` method
iterates the full trivariate triple and is only practical for small n.

Cycles are found by multiple-shooting Newton in complex arithmetic, so
complex cycles are counted too (the zeta function does not care about
realness).
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
import sympy as sp

from .exactnum import PRIME, HomoPoly3, mod_of, reduce_triple, to_fraction
from .maps import BoundMap, ConfigError, U, V, _symbolic_components, bind, get_family

T = sp.Symbol("t")


class Truncated(RuntimeError):
    def __init__(self, n: int):
        super().__init__(f"degree sequence truncated at n={n} (monomial guard)")
        self.n = n


class FixedCurve(RuntimeError):
    """K^n = id along a curve; the fixed-point count is infinite."""


# ---------------------------------------------------------------------------
# degree growth
# ---------------------------------------------------------------------------

@dataclass
class GrowthRate:
    value: float
    residual: float


@dataclass
class DegreeSequence:
    degrees: list
    lambda_estimate: float
    residual: float
    method: str
    params: dict
    truncated_at: int | None = None
    generating_function: str | None = None

    def to_json(self) -> dict:
        return {
            "degrees": self.degrees,
            "lambda": self.lambda_estimate,
            "residual": self.residual,
            "method": self.method,
            "params": {k: str(v) for k, v in self.params.items()},
            "truncated_at": self.truncated_at,
            "generating_function": self.generating_function,
        }


def growth_rate(degrees: Sequence[int]) -> GrowthRate:
    """exp of the least-squares slope of log d(n) over the last half of the sequence."""
    if len(degrees) < 5:
        raise ValueError("growth_rate needs at least 5 degrees")
    n = np.arange(1, len(degrees) + 1, dtype=float)
    y = np.log(np.asarray(degrees, dtype=float))
    lo = len(degrees) // 2
    x, y = n[lo:], y[lo:]
    slope, icpt = np.polyfit(x, y, 1)
    res = float(np.sqrt(np.mean((y - (slope * x + icpt)) ** 2)))
    return GrowthRate(max(1.0, float(math.exp(slope))), res)


def guess_generating_function(degrees: Sequence[int]):
    """Rational g(t) = sum d(n) t^n when the data determine one, else None."""
    from sympy.concrete.guess import guess_generating_function_rational

    if len(degrees) < 6:
        return None
    g = guess_generating_function_rational(list(degrees), X=T)
    return None if g is None else sp.factor(T * g)


def generic_params(map_id: str, seed: int = 0, tied: Sequence[str] = ()) -> dict:
    """Random rational parameter values avoiding the family's degenerate loci."""
    fam = get_family(map_id)
    rng = random.Random(seed)
    for _ in range(100):
        vals = {}
        for name in fam.params:
            vals[name] = Fraction(rng.choice([-1, 1]) * rng.randint(1, 97), rng.randint(2, 41))
        for name in tied:
            vals[name] = vals[fam.params[0]]
        if fam.degenerate(vals) is None:
            return vals
    raise ConfigError(f"could not draw generic parameters for {map_id}")


def _mod_triple(triple: Sequence[HomoPoly3], p: int):
    return [[(m, mod_of(c, p)) for m, c in h.terms.items()] for h in triple], triple[0].degree


def _apply_mod(terms, d, xyz):
    import flint

    p = xyz[0].modulus()
    pows = []
    for f in xyz:
        acc = [flint.nmod_poly([1], p)]
        for _ in range(d):
            acc.append(acc[-1] * f)
        pows.append(acc)
    zero = flint.nmod_poly([0], p)
    out = []
    for comp in terms:
        acc = zero
        for (i, j, k), c in comp:
            acc += c * pows[0][i] * pows[1][j] * pows[2][k]
        out.append(acc)
    return out


def _line_degrees(bm: BoundMap, n_max: int, p: int, seed: int) -> list[int]:
    import flint

    terms, d = _mod_triple(bm.lift, p)
    rng = random.Random(seed)
    xyz = [flint.nmod_poly([rng.randrange(p), rng.randrange(1, p)], p) for _ in range(3)]
    degrees = []
    for _ in range(n_max):
        xyz = _apply_mod(terms, d, xyz)
        g = xyz[0].gcd(xyz[1]).gcd(xyz[2])
        xyz = [f // g for f in xyz]
        degrees.append(max(f.degree() for f in xyz))
    return degrees


def _homogeneous_degrees(bm: BoundMap, n_max: int, max_terms: int) -> tuple[list[int], int | None]:
    F = bm.lift
    cur = F
    degrees = [cur[0].degree]
    for n in range(2, n_max + 1):
        nxt = [h.compose(*cur) for h in F]
        if sum(h.nterms() for h in nxt) > max_terms:
            return degrees, n
        cur = reduce_triple(*nxt)
        degrees.append(cur[0].degree)
    return degrees, None


def degree_sequence(bm: BoundMap, n_max: int = 10, method: str = "line", seed: int = 0,
                    p: int = PRIME, max_terms: int = 10**6) -> DegreeSequence:
    """Reduced degrees d(1..n_max) of the iterates of the homogeneous lift."""
    if n_max < 3:
        raise ValueError("n_max must be at least 3")
    if bm.symbolic:
        raise ConfigError("degree_sequence needs numeric parameters; see generic_params")
    truncated = None
    if method == "line":
        degrees = _line_degrees(bm, n_max, p, seed)
    elif method == "homogeneous":
        degrees, truncated = _homogeneous_degrees(bm, n_max, max_terms)
    else:
        raise ValueError(f"unknown method {method!r}")
    gr = growth_rate(degrees) if len(degrees) >= 5 else GrowthRate(float("nan"), float("nan"))
    g = guess_generating_function(degrees)
    return DegreeSequence(degrees, gr.value, gr.residual, method, dict(bm.params), truncated,
                          None if g is None else str(g))


# ---------------------------------------------------------------------------
# complex evaluation
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _complex_kernel(map_id: str, direction: str):
    fam = get_family(map_id)
    nu, du, nv, dv = _symbolic_components(map_id, direction)
    fu, fv = nu / du, nv / dv
    tangent = [sp.cancel(sp.diff(f, x)) for f in (fu, fv) for x in (U, V)]
    syms = [sp.Symbol(n) for n in fam.params]
    return sp.lambdify((U, V, *syms), [fu, fv, *tangent], "numpy")


def _evaluate(bm: BoundMap, u, v):
    """Complex images and tangent entries, broadcast to the shape of u."""
    f = _complex_kernel(bm.id, bm.direction)
    pars = [float(bm.params[n]) for n in bm.family.params]
    with np.errstate(all="ignore"):
        vals = f(u, v, *pars)
    zero = np.zeros_like(u)
    return [np.asarray(x, dtype=complex) + zero for x in vals]


def _iterate(bm: BoundMap, u, v, n: int):
    for _ in range(n):
        u, v = _evaluate(bm, u, v)[:2]
    return u, v


def _tangent_product(bm: BoundMap, points) -> np.ndarray:
    M = np.eye(2, dtype=complex)
    for u, v in points:
        _, _, a, b, c, d = (complex(x) for x in _evaluate(bm, np.array(u, dtype=complex), np.array(v, dtype=complex)))
        M = np.array([[a, b], [c, d]]) @ M
    return M


# ---------------------------------------------------------------------------
# cycles
# ---------------------------------------------------------------------------

STABILITY_CLASSES = ("StableSpiral", "UnstableSpiral", "StableNode", "UnstableNode", "Saddle", "NonHyperbolic")


@dataclass
class Cycle:
    order: int
    points: list            # [(u, v)] complex
    eigenvalues: tuple
    jacobian: complex
    real: bool
    stability: str
    pole_flag: bool = False
    radius: float = 0.0     # dedup radius; larger near multiple roots where Newton is slow

    @property
    def representative(self):
        return self.points[0]

    def to_json(self) -> dict:
        def num(z):
            z = complex(z)
            return z.real if abs(z.imag) < 1e-12 else [z.real, z.imag]
        return {
            "order": self.order,
            "real": self.real,
            "points": [[num(u), num(v)] for u, v in self.points],
            "eigenvalues": [num(e) for e in self.eigenvalues],
            "jacobian": num(self.jacobian),
            "stability": self.stability,
            "pole_flag": self.pole_flag,
        }


def classify_eigenvalues(eigs, real: bool = True, tol: float = 1e-6) -> str:
    l1, l2 = (complex(e) for e in eigs)
    m1, m2 = abs(l1), abs(l2)
    if abs(m1 - 1) < tol or abs(m2 - 1) < tol:
        return "NonHyperbolic"
    spiral = real and abs(l1.imag) > 1e-10 * max(1.0, m1)
    if spiral:
        return "StableSpiral" if m1 < 1 else "UnstableSpiral"
    if m1 < 1 and m2 < 1:
        return "StableNode"
    if m1 > 1 and m2 > 1:
        return "UnstableNode"
    return "Saddle"


def stability(cycle: Cycle) -> str:
    return classify_eigenvalues(cycle.eigenvalues, cycle.real)


def jacobian_along_cycle(bm: BoundMap, cycle: Cycle, pole_guard: float = 1e10) -> tuple[complex, bool]:
    """Product of the pointwise Jacobians (chain rule); flag set near a pole."""
    total, flag = 1 + 0j, False
    for u, v in cycle.points:
        _, _, a, b, c, d = (complex(x) for x in _evaluate(bm, np.array(u, dtype=complex), np.array(v, dtype=complex)))
        j = a * d - b * c
        if not np.isfinite(j) or abs(j) > pole_guard:
            flag = True
        total *= j
    return total, flag


def _arctan_grid(k: int = 41, box: float = 5.0) -> np.ndarray:
    th = np.linspace(-math.atan(box), math.atan(box), k)
    g = np.tan(th)
    uu, vv = np.meshgrid(g, g)
    return np.column_stack([uu.ravel(), vv.ravel()]).astype(complex)


def _attractor_seeds(bm: BoundMap, count: int, p0=None) -> np.ndarray:
    from .ergodic import simulate

    try:
        sample = simulate(bm, p0 or (0.5, 0.7), n_transient=2000, n_keep=count * 20)
    except Exception:
        return np.zeros((0, 2), dtype=complex)
    pts = sample.points[::20]
    return pts.astype(complex)


def _newton(bm: BoundMap, seeds: np.ndarray, n: int, iters: int = 60):
    """Multiple-shooting Newton from the orbits of the seeds.

    Returns the orbit coordinates, the scaled residuals and the size of the
    last applied step (relative to the orbit scale).
    """
    S = len(seeds)
    Pu = np.empty((S, n), dtype=complex)
    Pv = np.empty((S, n), dtype=complex)
    Pu[:, 0], Pv[:, 0] = seeds[:, 0], seeds[:, 1]
    for k in range(1, n):
        Pu[:, k], Pv[:, k] = _evaluate(bm, Pu[:, k - 1], Pv[:, k - 1])[:2]
    eye = np.broadcast_to(np.eye(2, dtype=complex), (S, 2, 2))
    res = np.full(S, np.inf)
    last = np.full(S, np.inf)
    for _ in range(iters):
        fu, fv, a, b, c, d = _evaluate(bm, Pu, Pv)
        Fu = fu - np.roll(Pu, -1, axis=1)
        Fv = fv - np.roll(Pv, -1, axis=1)
        with np.errstate(all="ignore"):
            scale = 1 + np.maximum(np.abs(Pu), np.abs(Pv)).max(axis=1)
            res = np.maximum(np.abs(Fu), np.abs(Fv)).max(axis=1) / scale
        A = eye.copy()
        B = np.zeros((S, 2), dtype=complex)
        As, Bs = [], []
        for k in range(n):
            As.append(A)
            Bs.append(B)
            Jk = np.stack([np.stack([a[:, k], b[:, k]], -1), np.stack([c[:, k], d[:, k]], -1)], -2)
            A = Jk @ A
            B = (Jk @ B[..., None])[..., 0] + np.stack([Fu[:, k], Fv[:, k]], -1)
        with np.errstate(all="ignore"):
            M = eye - A
            det = M[:, 0, 0] * M[:, 1, 1] - M[:, 0, 1] * M[:, 1, 0]
            ok = np.isfinite(det) & np.isfinite(B).all(axis=1) & (np.abs(det) > 1e-300)
            # closing condition (I - A_n) d0 = B_n, solved by the 2x2 adjugate
            d0 = np.stack([M[:, 1, 1] * B[:, 0] - M[:, 0, 1] * B[:, 1],
                           -M[:, 1, 0] * B[:, 0] + M[:, 0, 0] * B[:, 1]], -1) / det[:, None]
            du = np.stack([As[k][:, 0, 0] * d0[:, 0] + As[k][:, 0, 1] * d0[:, 1] + Bs[k][:, 0] for k in range(n)], 1)
            dv = np.stack([As[k][:, 1, 0] * d0[:, 0] + As[k][:, 1, 1] * d0[:, 1] + Bs[k][:, 1] for k in range(n)], 1)
            step = np.maximum(np.abs(du), np.abs(dv)).max(axis=1)
            damp = np.minimum(1.0, (1 + 0.5 * scale) / np.where(step > 0, step, 1))
            ok &= np.isfinite(step)
        damp = np.where(ok, damp, 0.0)
        Pu = Pu + damp[:, None] * np.where(ok[:, None], du, 0)
        Pv = Pv + damp[:, None] * np.where(ok[:, None], dv, 0)
        res = np.where(ok, res, np.inf)
        last = np.where(ok, damp * step / scale, np.inf)
    return Pu, Pv, res, last


def _dist(z, w) -> float:
    z, w = complex(z), complex(w)
    if abs(z.imag) < 1e-9 and abs(w.imag) < 1e-9:
        return abs(math.atan(z.real) - math.atan(w.real))
    return abs(z - w) / (1 + min(abs(z), abs(w)))


def _pdist(p, q) -> float:
    return max(_dist(p[0], q[0]), _dist(p[1], q[1]))


def _same_cycle(c1: list, c2: list, tol: float) -> bool:
    n = len(c1)
    return any(all(_pdist(c1[(k + r) % n], c2[k]) < tol for k in range(n)) for r in range(n))


def _make_cycle(bm: BoundMap, pts: list) -> Cycle:
    real = all(abs(complex(x).imag) < 1e-8 * (1 + abs(x)) for p in pts for x in p)
    if real:
        pts = [(complex(u.real), complex(v.real)) for u, v in pts]
    M = _tangent_product(bm, pts)
    eigs = tuple(np.linalg.eigvals(M))
    cyc = Cycle(len(pts), pts, eigs, complex(np.linalg.det(M)), real, "")
    cyc.jacobian, cyc.pole_flag = jacobian_along_cycle(bm, cyc)
    cyc.stability = classify_eigenvalues(eigs, real)
    return cyc


def _collect(bm: BoundMap, n: int, seeds: np.ndarray, found: list, tol: float, max_coord: float) -> int:
    if len(seeds) == 0:
        return 0
    Pu, Pv, res, last = _newton(bm, seeds, n)
    added = 0
    good = np.where(res < 1e-11)[0]
    for s in good:
        pts = [(Pu[s, k], Pv[s, k]) for k in range(n)]
        if max(abs(x) for p in pts for x in p) > max_coord:
            continue
        # single-shot return check
        ru, rv = _iterate(bm, np.array(pts[0][0]), np.array(pts[0][1]), n)
        if _pdist((complex(ru), complex(rv)), pts[0]) > 1e-7:
            continue
        # primitivity: no proper divisor already closes the orbit
        if any(n % d == 0 and _pdist(pts[d], pts[0]) < tol for d in range(1, n)):
            continue
        # Newton is only linear at a multiple root, so the last step bounds the error there
        radius = max(tol, 10 * float(last[s]))
        if any(_same_cycle(c.points, pts, max(radius, c.radius)) for c in found):
            continue
        cyc = _make_cycle(bm, pts)
        cyc.radius = radius
        found.append(cyc)
        added += 1
    return added


def find_cycles(bm: BoundMap, n: int, seeds: np.ndarray | None = None, rounds: int = 12,
                batch: int = 1500, seed: int = 0, tol: float = 1e-6, max_coord: float = 1e8,
                complex_seeds: bool = True, p0=None) -> tuple[list[Cycle], bool]:
    """Primitive n-cycles; returns (cycles, saturated).

    Round 0 uses ``seeds`` (default: a 41x41 arctan grid plus 500 points of
    a long orbit).  Further rounds draw random complex seeds; the search is
    saturated once three consecutive rounds add nothing.
    """
    if n < 1:
        raise ValueError("order must be >= 1")
    if bm.symbolic:
        raise ConfigError("find_cycles needs numeric parameters")
    rng = np.random.default_rng(seed)
    if seeds is None:
        seeds = np.vstack([_arctan_grid(), _attractor_seeds(bm, 500, p0)])
    found: list[Cycle] = []
    _collect(bm, n, np.asarray(seeds, dtype=complex), found, tol, max_coord)
    quiet = 0
    saturated = False
    if not complex_seeds:
        return found, False
    for _ in range(rounds):
        re_ = np.tan(rng.uniform(-1.45, 1.45, (batch, 2)))
        im = rng.normal(0, 1, (batch, 2)) * rng.choice([0.1, 1.0, 3.0], (batch, 1))
        added = _collect(bm, n, re_ + 1j * im, found, tol, max_coord)
        quiet = 0 if added else quiet + 1
        if quiet >= 3:
            saturated = True
            break
    return found, saturated


@dataclass
class FixCountLedger:
    primitive: list           # c_n, n = 1..n_max
    total: list               # fix_n
    saturated: list
    cycles: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "primitive": self.primitive,
            "fix": self.total,
            "saturated": self.saturated,
            "real_cycles": [sum(c.real for c in self.cycles.get(n, [])) for n in range(1, len(self.primitive) + 1)],
        }


def fix_from_primitive(c: Sequence[int]) -> list[int]:
    return [sum(d * c[d - 1] for d in sp.divisors(n)) for n in range(1, len(c) + 1)]


def primitive_from_fix(fix: Sequence[int]) -> list[int]:
    return [sum(sp.mobius(n // d) * fix[d - 1] for d in sp.divisors(n)) // n for n in range(1, len(fix) + 1)]


def primitive_counts(bm: BoundMap, n_max: int, seed: int = 0, **kw) -> FixCountLedger:
    cyc, c, sat = {}, [], []
    for n in range(1, n_max + 1):
        found, ok = find_cycles(bm, n, seed=seed + n, **kw)
        cyc[n] = found
        c.append(len(found))
        sat.append(ok)
    return FixCountLedger(c, fix_from_primitive(c), sat, cyc)


# ---------------------------------------------------------------------------
# zeta function
# ---------------------------------------------------------------------------

def zeta_from_fix(fix: Sequence[int]) -> list[Fraction]:
    """Coefficients z_0..z_N of exp(sum fix_n t^n / n)."""
    z = [Fraction(1)]
    for n in range(1, len(fix) + 1):
        z.append(sum(Fraction(fix[k - 1]) * z[n - k] for k in range(1, n + 1)) / n)
    return z


def series_coefficients(expr, n: int) -> list[Fraction]:
    s = sp.series(expr, T, 0, n + 1).removeO()
    poly = sp.Poly(s, T)
    return [Fraction(int(c.p), int(c.q)) for c in (poly.coeff_monomial(T**k) for k in range(n + 1))]


def fix_from_zeta(expr, n: int) -> list[int]:
    """fix_k from t d/dt log zeta."""
    s = series_coefficients(sp.cancel(T * sp.diff(expr, T) / expr), n)
    return [int(x) for x in s[1:]]


K_ZETA = 1 / ((1 - T) * (1 - T**2 - T**3))


@dataclass
class ZetaCheck:
    matches: bool
    observed: list
    expected: list
    first_mismatch: int | None

    def to_json(self) -> dict:
        return {"matches": self.matches, "observed": [str(x) for x in self.observed],
                "expected": [str(x) for x in self.expected], "first_mismatch": self.first_mismatch}


def zeta_check(fix: Sequence[int], zeta=K_ZETA) -> ZetaCheck:
    obs = zeta_from_fix(fix)
    exp = series_coefficients(zeta, len(fix))
    bad = next((k for k, (a, b) in enumerate(zip(obs, exp)) if a != b), None)
    return ZetaCheck(bad is None, obs, exp, bad)


# ---------------------------------------------------------------------------
# exact oracle
# ---------------------------------------------------------------------------

def _standard_monomial_count(G, gens) -> int:
    leads = [sp.Poly(g, *gens).monoms(order=G.order)[0] for g in G.exprs]
    bounds = []
    for i in range(len(gens)):
        pure = [m[i] for m in leads if all(e == 0 for j, e in enumerate(m) if j != i)]
        if not pure:
            raise FixedCurve("ideal is not zero-dimensional")
        bounds.append(min(pure))
    count = 0

    def rec(i, mono):
        nonlocal count
        if i == len(gens):
            if not any(all(a >= b for a, b in zip(mono, m)) for m in leads):
                count += 1
            return
        for e in range(bounds[i]):
            rec(i + 1, mono + (e,))

    rec(0, ())
    return count


def exact_fix_count(bm: BoundMap, n: int) -> int:
    """Number of affine points with K^n(p) = p whose orbit stays affine.

    Solutions are complex and counted with multiplicity: the dimension of
    the quotient ring of the fixed-point ideal, saturated by every
    intermediate denominator through an auxiliary variable.
    """
    if bm.symbolic:
        raise ConfigError("exact_fix_count needs rational parameters")
    if n > 5:
        raise ValueError("exact_fix_count is limited to n <= 5")
    fu, fv = bm.exprs
    cu, cv = U, V
    dens = []
    for _ in range(n):
        cu, cv = (sp.cancel(fu.subs({U: cu, V: cv}, simultaneous=True)),
                  sp.cancel(fv.subs({U: cu, V: cv}, simultaneous=True)))
        dens.extend([sp.fraction(cu)[1], sp.fraction(cv)[1]])
    W = sp.Symbol("w")
    eqs = [sp.fraction(sp.cancel(cu - U))[0], sp.fraction(sp.cancel(cv - V))[0],
           sp.expand(1 - W * sp.prod(dens))]
    if any(sp.expand(e) == 0 for e in eqs[:2]):
        raise FixedCurve(f"K^{n} fixes a whole coordinate equation")
    G = sp.groebner(eqs, W, U, V, order="grevlex")
    if G.exprs == [1]:
        return 0
    return _standard_monomial_count(G, (W, U, V))


# ---------------------------------------------------------------------------
# stability boundaries
# ---------------------------------------------------------------------------

def _order_one_class(map_id: str, params: dict, name: str, value: float, prev):
    pars = dict(params)
    pars[name] = Fraction(value)
    bm = bind(map_id, pars)
    seeds = _arctan_grid(11)
    if prev is not None:
        seeds = np.vstack([np.array([prev], dtype=complex), seeds])
    cycles, _ = find_cycles(bm, 1, seeds=seeds, complex_seeds=False)
    real = [c for c in cycles if c.real]
    if not real:
        return None, prev
    if prev is not None:
        real.sort(key=lambda c: _pdist(c.points[0], prev))
    return real[0].stability, real[0].points[0]


def stability_boundary(map_id: str, params: dict, name: str, lo: float, hi: float,
                       tol: float = 1e-4) -> float:
    """Bisect the parameter where the order-1 cycle changes stability class."""
    c_lo, p_lo = _order_one_class(map_id, params, name, lo, None)
    c_hi, _ = _order_one_class(map_id, params, name, hi, None)
    if c_lo == c_hi:
        raise ValueError(f"no class change on [{lo}, {hi}] ({c_lo})")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        c_mid, p_mid = _order_one_class(map_id, params, name, mid, p_lo)
        if c_mid == c_lo:
            lo, p_lo = mid, p_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
