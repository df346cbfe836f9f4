"""Orbit simulation, Lyapunov exponents and attractor dimensions.

Everything here is floating point.  The inner loops are numba-compiled and
take the map's compiled kernels as first-class arguments.  Box counting is
always done in the compactified coordinates ``(arctan u, arctan v)`` because
the attractors of interest have unbounded branches.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numba
import numpy as np

from .maps import INF, BoundMap, ConfigError, DegenerateFamily, ESCAPE_BOUND, INDET_GUARD, bind


class NotApplicable(ValueError):
    pass


@dataclass(frozen=True)
class Bounded:
    def __str__(self):
        return "Bounded"


@dataclass(frozen=True)
class EscapedAt:
    step: int

    def __str__(self):
        return f"EscapedAt({self.step})"


@dataclass(frozen=True)
class HitIndeterminacyAt:
    step: int

    def __str__(self):
        return f"HitIndeterminacyAt({self.step})"


@dataclass
class OrbitSample:
    points: np.ndarray       # (n, 2) affine points kept after the transient
    status: object
    restarts: int = 0


@dataclass
class LyapunovResult:
    sigma1: float
    sigma2: float
    n_used: int
    renormalizations: int
    mean_log_j: float
    skipped: int = 0
    restarts: int = 0
    status: object = field(default_factory=Bounded)

    @property
    def sum_rule_error(self) -> float:
        return abs(self.sigma1 + self.sigma2 - self.mean_log_j)


@dataclass
class DimensionReport:
    param: object
    sigma1: float
    sigma2: float
    d_ky: float | None
    d_box: float | None
    residual: float | None
    n: int
    status: str

    def to_json(self) -> dict:
        return {"param": self.param, "sigma1": self.sigma1, "sigma2": self.sigma2, "d_ky": self.d_ky,
                "d_box": self.d_box, "residual": self.residual, "n": self.n, "status": self.status}


RESTART_OFFSET = 1e-8
GUARD_RADIUS = 1e-10
POLE_GUARD = 1e12

# status codes shared with the compiled loops
_OK, _ESCAPED, _INDET = 0, 1, 2


def _guard_points(bm: BoundMap) -> np.ndarray:
    pts = []
    try:
        ind = bm.indeterminacy_set()
    except DegenerateFamily:  # polynomial maps have no indeterminacy in the plane
        ind = []
    for p in ind:
        if INF not in p:
            pts.append((float(p[0]), float(p[1])))
    return np.array(pts, dtype=float).reshape(-1, 2)


@numba.njit(cache=False)
def _near(u, v, guard_pts, radius):
    for g in range(guard_pts.shape[0]):
        if abs(u - guard_pts[g, 0]) < radius and abs(v - guard_pts[g, 1]) < radius:
            return True
    return False


@numba.njit(cache=False)
def _run(comp, P, u, v, n_transient, n_keep, out, bound, guard_pts, radius, offset, indet):
    restarts = 0
    for k in range(n_transient + n_keep):
        if _near(u, v, guard_pts, radius):
            u += offset
            v += offset
            restarts += 1
        nu, du, nv, dv = comp(u, v, P)
        if (abs(nu) < indet and abs(du) < indet) or (abs(nv) < indet and abs(dv) < indet):
            return _INDET, k, restarts
        u = nu / du
        v = nv / dv
        if not (abs(u) <= bound and abs(v) <= bound):
            return _ESCAPED, k, restarts
        if k >= n_transient:
            out[k - n_transient, 0] = u
            out[k - n_transient, 1] = v
    return _OK, n_transient + n_keep, restarts


def _status(code: int, step: int):
    return Bounded() if code == _OK else EscapedAt(step) if code == _ESCAPED else HitIndeterminacyAt(step)


def _check_start(bm: BoundMap, p0):
    u, v = float(p0[0]), float(p0[1])
    if not (math.isfinite(u) and math.isfinite(v)):
        raise ValueError("initial point must be finite")
    if bm.symbolic:
        raise ConfigError("simulation needs numeric parameters")
    return u, v


def simulate(bm: BoundMap, p0=(0.5, 0.7), n_transient: int = 10_000, n_keep: int = 100_000) -> OrbitSample:
    """Iterate from p0, drop the transient, keep n_keep points (fewer if the orbit stops)."""
    u, v = _check_start(bm, p0)
    out = np.empty((n_keep, 2))
    code, step, restarts = _run(bm.kernels.components, bm.float_params, u, v, n_transient, n_keep, out,
                                ESCAPE_BOUND, _guard_points(bm), GUARD_RADIUS, RESTART_OFFSET, INDET_GUARD)
    kept = max(0, min(n_keep, step - n_transient))
    return OrbitSample(out[:kept].copy(), _status(code, step), restarts)


@numba.njit(cache=False)
def _lyap(step_fn, P, u, v, n_transient, n, bound, guard_pts, radius, offset, indet, pole):
    restarts = 0
    for k in range(n_transient):
        if _near(u, v, guard_pts, radius):
            u += offset
            v += offset
            restarts += 1
        r = step_fn(u, v, P)
        if (abs(r[0]) < indet and abs(r[1]) < indet) or (abs(r[2]) < indet and abs(r[3]) < indet):
            return 0.0, 0.0, 0.0, 0, 0, _INDET, k, restarts
        u = r[0] / r[1]
        v = r[2] / r[3]
        if not (abs(u) <= bound and abs(v) <= bound):
            return 0.0, 0.0, 0.0, 0, 0, _ESCAPED, k, restarts
    e11, e12, e21, e22 = 1.0, 0.0, 0.0, 1.0
    s1 = 0.0
    s2 = 0.0
    sj = 0.0
    used = 0
    skipped = 0
    for k in range(n):
        if _near(u, v, guard_pts, radius):
            u += offset
            v += offset
            restarts += 1
        r = step_fn(u, v, P)
        if (abs(r[0]) < indet and abs(r[1]) < indet) or (abs(r[2]) < indet and abs(r[3]) < indet):
            return s1, s2, sj, used, skipped, _INDET, n_transient + k, restarts
        a, b, c, d = r[4], r[5], r[6], r[7]
        det = a * d - b * c
        if not (math.isfinite(det) and abs(det) < pole and det != 0.0
                and math.isfinite(a) and math.isfinite(b) and math.isfinite(c) and math.isfinite(d)):
            skipped += 1
        else:
            w11 = a * e11 + b * e21
            w21 = c * e11 + d * e21
            w12 = a * e12 + b * e22
            w22 = c * e12 + d * e22
            r11 = math.sqrt(w11 * w11 + w21 * w21)
            e11, e21 = w11 / r11, w21 / r11
            proj = e11 * w12 + e21 * w22
            w12 -= proj * e11
            w22 -= proj * e21
            r22 = math.sqrt(w12 * w12 + w22 * w22)
            e12, e22 = w12 / r22, w22 / r22
            s1 += math.log(r11)
            s2 += math.log(r22)
            sj += math.log(abs(det))
            used += 1
        u = r[0] / r[1]
        v = r[2] / r[3]
        if not (abs(u) <= bound and abs(v) <= bound):
            return s1, s2, sj, used, skipped, _ESCAPED, n_transient + k, restarts
    return s1, s2, sj, used, skipped, _OK, n_transient + n, restarts


def lyapunov(bm: BoundMap, p0=(0.5, 0.7), n: int = 1_000_000, n_transient: int = 10_000) -> LyapunovResult:
    """Both exponents (nats/iteration) from per-step Gram-Schmidt renormalisation."""
    u, v = _check_start(bm, p0)
    s1, s2, sj, used, skipped, code, step, restarts = _lyap(
        bm.kernels.step, bm.float_params, u, v, n_transient, n, ESCAPE_BOUND, _guard_points(bm),
        GUARD_RADIUS, RESTART_OFFSET, INDET_GUARD, POLE_GUARD)
    if used == 0:
        return LyapunovResult(math.nan, math.nan, 0, 0, math.nan, skipped, restarts, _status(code, step))
    a, b = s1 / used, s2 / used
    return LyapunovResult(max(a, b), min(a, b), used, used, sj / used, skipped, restarts, _status(code, step))


def kaplan_yorke(r: LyapunovResult) -> float:
    """1 - sigma1/sigma2 for a chaotic attractor; 0 for an attracting cycle (sigma1 < 0)."""
    if not r.sigma2 < 0:
        raise NotApplicable(f"Kaplan-Yorke needs sigma2 < 0, got {r.sigma2}")
    if r.sigma1 < 0:
        return 0.0
    if r.sigma1 + r.sigma2 >= 0:
        return 2.0
    return 1 - r.sigma1 / r.sigma2


# ---------------------------------------------------------------------------
# box counting
# ---------------------------------------------------------------------------

DEFAULT_LADDER = tuple(math.pi * 2.0**-k for k in range(3, 12))


@dataclass
class BoxCount:
    d_box: float
    residual: float
    ladder: list          # epsilons used in the fit
    counts: list          # N(eps) for the full ladder
    trimmed: list         # epsilons dropped, with reason

    def to_json(self) -> dict:
        return {"d_box": self.d_box, "residual": self.residual, "ladder": self.ladder,
                "counts": self.counts, "trimmed": self.trimmed}


def to_arctan(points: np.ndarray) -> np.ndarray:
    return np.arctan(np.asarray(points, dtype=float))


def box_counting(sample, ladder: Sequence[float] = DEFAULT_LADDER, min_points: int = 100_000,
                 coords: str = "affine") -> BoxCount:
    """Slope of ln N(eps) against ln(1/eps) for boxes in the (arctan u, arctan v) square.

    ``sample`` is an OrbitSample or an (n, 2) array of affine points (or of
    angles when ``coords='arctan'``).  Levels with N > n/5 (too few points
    per box) are dropped, as are coarse levels where N is flat (grows by
    less than 10% into the next level).
    """
    pts = sample.points if isinstance(sample, OrbitSample) else np.asarray(sample, dtype=float)
    if len(pts) < min_points:
        raise ValueError(f"box counting needs at least {min_points} points, got {len(pts)}")
    th = pts if coords == "arctan" else to_arctan(pts)
    shifted = th + math.pi / 2
    n = len(th)
    ladder = sorted(ladder, reverse=True)
    counts = []
    for eps in ladder:
        cells = int(math.ceil(math.pi / eps)) + 1
        idx = np.floor(shifted / eps).astype(np.int64)
        counts.append(int(np.unique(idx[:, 0] * cells + idx[:, 1]).size))
    trimmed = [(eps, "undersampled") for eps, N in zip(ladder, counts) if N > n / 5]
    usable = [(eps, N) for eps, N in zip(ladder, counts) if N <= n / 5]
    lo = 0
    while lo + 1 < len(usable) and usable[lo + 1][1] < 1.1 * usable[lo][1]:
        trimmed.append((usable[lo][0], "saturated"))
        lo += 1
    keep = usable[lo:]
    if len(keep) < 2:
        raise ValueError("fewer than two usable ladder levels")
    x = np.log([1 / e for e, _ in keep])
    y = np.log([N for _, N in keep])
    slope, icpt = np.polyfit(x, y, 1)
    res = float(np.sqrt(np.mean((y - (slope * x + icpt)) ** 2)))
    return BoxCount(float(slope), res, [e for e, _ in keep], counts, trimmed)


# ---------------------------------------------------------------------------
# portraits and sweeps
# ---------------------------------------------------------------------------

def portrait(bm: BoundMap, p0, n: int, coords: str = "affine", out=None, n_transient: int = 10_000):
    """Point cloud (optionally written as CSV with 17 significant digits)."""
    if coords not in ("affine", "arctan"):
        raise ValueError("coords must be 'affine' or 'arctan'")
    sample = simulate(bm, p0, n_transient, n)
    pts = sample.points if coords == "affine" else to_arctan(sample.points)
    if out is not None:
        header = "u,v" if coords == "affine" else "theta_u,theta_v"
        np.savetxt(out, pts, fmt="%.17g", delimiter=",", header=header, comments="")
    return pts, sample.status


def dimension_report(bm: BoundMap, p0=(0.5, 0.7), n: int = 1_000_000, n_transient: int = 10_000,
                     box: bool = True, param=None) -> DimensionReport:
    r = lyapunov(bm, p0, n, n_transient)
    if not isinstance(r.status, Bounded):
        return DimensionReport(param, r.sigma1, r.sigma2, None, None, None, r.n_used, str(r.status))
    try:
        dky = kaplan_yorke(r)
    except NotApplicable:
        dky = None
    dbox = res = None
    if box:
        sample = simulate(bm, p0, n_transient, n)
        if isinstance(sample.status, Bounded):
            bc = box_counting(sample)
            dbox, res = bc.d_box, bc.residual
    return DimensionReport(param, r.sigma1, r.sigma2, dky, dbox, res, r.n_used, "Bounded")


def _sweep_one(args):
    map_id, params, name, value, p0, n, n_transient, box, direction = args
    pars = dict(params)
    pars[name] = Fraction(value).limit_denominator(10**9) if isinstance(value, float) else value
    bm = bind(map_id, pars, direction)
    return dimension_report(bm, p0, n, n_transient, box, param=float(value))


def sweep_values(start: float, stop: float, step: float) -> list[float]:
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(count)]


def dimension_sweep(map_id: str, params: dict, name: str, values: Sequence[float], p0=(0.5, 0.7),
                    n: int = 1_000_000, n_transient: int = 10_000, box: bool = False,
                    jobs: int = 1, direction: str = "forward") -> list[DimensionReport]:
    """One DimensionReport per parameter value, in the order given."""
    tasks = [(map_id, params, name, v, p0, n, n_transient, box, direction) for v in values]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            return list(ex.map(_sweep_one, tasks))
    return [_sweep_one(t) for t in tasks]
