"""Command-line front end.  Every subcommand prints (or writes) one JSON report.

Exit codes: 0 success, 1 usage error, 2 computation failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

from .covariant import ParseError, parse_expression
from .exactnum import to_fraction
from .maps import FAMILIES, ConfigError, bind, get_family

EXACT_COMMANDS = {"pc", "covariant-check", "degrees"}
FLOAT_DIGITS = 12


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# config and serialisation
# ---------------------------------------------------------------------------

def parse_param(text: str, exact: bool) -> tuple[str, Fraction]:
    if "=" not in text:
        raise UsageError(f"--param expects name=value, got {text!r}")
    name, raw = (s.strip() for s in text.split("=", 1))
    if exact and any(ch in raw.lower() for ch in ".e"):
        raise UsageError(f"exact subcommands need rational parameters like 3/10, got {name}={raw}")
    try:
        return name, to_fraction(raw)
    except (ValueError, ZeroDivisionError, TypeError):
        raise UsageError(f"malformed number {raw!r} for parameter {name}") from None


def resolve_params(map_id: str, items, exact: bool, allow_missing=()) -> dict:
    try:
        fam = get_family(map_id)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    params = dict(parse_param(t, exact) for t in items or [])
    unknown = set(params) - set(fam.params)
    if unknown:
        raise UsageError(f"{map_id} has no parameter(s) {sorted(unknown)}; expected {list(fam.params)}")
    missing = [n for n in fam.params if n not in params and n not in allow_missing]
    if missing:
        raise UsageError(f"{map_id} is missing parameter(s) {missing} (use --param name=value)")
    return params


def _point(text: str) -> tuple[float, float]:
    try:
        u, v = (float(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"expected a point 'u,v', got {text!r}") from None
    return u, v


def canonical(obj):
    """Make a report JSON-safe with floats at fixed precision."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        if math.isnan(obj):
            return None
        if math.isinf(obj):
            return str(obj)
        return float(f"{obj:.{FLOAT_DIGITS}g}")
    if isinstance(obj, complex):
        if abs(obj.imag) < 1e-12:
            return canonical(obj.real)
        return [canonical(obj.real), canonical(obj.imag)]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(x) for x in obj]
    if hasattr(obj, "item"):  # numpy scalars
        return canonical(obj.item())
    return str(obj)


def emit(kind: str, config: dict, result, out=None) -> str:
    text = json.dumps(canonical({"kind": kind, "config": config, "result": result}), indent=2, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return text


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_pc(args, params):
    from .postcritical import pc_direction

    directions = ["forward", "backward"] if args.direction == "both" else [args.direction]
    reports = {}
    for d in directions:
        bm = bind(args.map, params, d)
        rep = pc_direction(bm, n_max=args.nmax, seed=args.seed, symbolic_param=args.symbolic,
                           tied=tuple(args.tie or ()))
        reports[d] = rep.to_json(limit=args.nmax)
    return reports


def cmd_covariant(args, params):
    from .covariant import CovariantCandidate, cofactor_check

    m = CovariantCandidate.parse(args.m, args.map)
    v = cofactor_check(bind(args.map, params), m, n_points=args.points, seed=args.seed)
    return {"candidate": str(m), **v.to_json()}


def cmd_degrees(args, params):
    from .complexity import degree_sequence, generic_params

    if args.generic:
        params = generic_params(args.map, args.seed, tied=tuple(args.tie or ()))
    ds = degree_sequence(bind(args.map, params), args.nmax, method=args.method, seed=args.seed)
    return ds.to_json()


def cmd_cycles(args, params):
    from .complexity import find_cycles

    bm = bind(args.map, params, args.direction)
    cycles, saturated = find_cycles(bm, args.order, seed=args.seed)
    return {"order": args.order, "saturated": saturated, "count": len(cycles),
            "cycles": [c.to_json() for c in cycles]}


def cmd_zeta(args, params):
    from .complexity import exact_fix_count, primitive_counts, zeta_check

    bm = bind(args.map, params, args.direction)
    led = primitive_counts(bm, args.nmax, seed=args.seed)
    out = led.to_json()
    if args.zeta:
        expr = parse_expression(args.zeta, ("t",))  # Symbol("t") is T
        out["zeta"] = {"candidate": args.zeta, **zeta_check(led.total, expr).to_json()}
    if args.exact_upto:
        out["exact_fix"] = [exact_fix_count(bm, n) for n in range(1, args.exact_upto + 1)]
    return out


def cmd_lyapunov(args, params):
    from .ergodic import kaplan_yorke, lyapunov, NotApplicable

    r = lyapunov(bind(args.map, params, args.direction), _point(args.p0), args.n, args.transient)
    try:
        dky = kaplan_yorke(r)
    except NotApplicable:
        dky = None
    return {"sigma1": r.sigma1, "sigma2": r.sigma2, "mean_log_j": r.mean_log_j, "sum_rule_error": r.sum_rule_error,
            "n": r.n_used, "renormalizations": r.renormalizations, "skipped": r.skipped, "restarts": r.restarts,
            "d_ky": dky, "status": str(r.status)}


def cmd_dimension(args, params):
    from .ergodic import dimension_report

    bm = bind(args.map, params, args.direction)
    return dimension_report(bm, _point(args.p0), args.n, args.transient, box=not args.no_box).to_json()


def cmd_portrait(args, params):
    from .ergodic import portrait

    pts, status = portrait(bind(args.map, params, args.direction), _point(args.p0), args.n,
                           args.coords, args.csv, args.transient)
    return {"csv": args.csv, "points": len(pts), "coords": args.coords, "status": str(status)}


def cmd_sweep(args, params):
    from .ergodic import dimension_sweep, sweep_values

    values = sweep_values(args.start, args.stop, args.step)
    reps = dimension_sweep(args.map, params, args.vary, values, _point(args.p0), args.n, args.transient,
                           box=args.box, jobs=args.jobs, direction=args.direction)
    return [r.to_json() for r in reps]


def cmd_verify(args, params):
    from .acceptance import CRITERIA, run

    numbers = sorted(CRITERIA) if not args.only else [int(x) for x in args.only.split(",")]
    results = []
    for n in numbers:
        if n not in CRITERIA:
            raise UsageError(f"no acceptance criterion #{n}")
        r = run(n)
        print(r.line(), file=sys.stderr, flush=True)
        results.append(r.to_json())
    return results


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="biratlab", description="Exact and ergodic analysis of planar birational maps.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp_, needs_map=True, direction=False):
        if needs_map:
            sp_.add_argument("--map", required=True, help=f"one of {', '.join(FAMILIES)}")
            sp_.add_argument("--param", action="append", default=[], metavar="NAME=VALUE",
                             help="parameter value, e.g. b=-3/5 (repeatable)")
        sp_.add_argument("--seed", type=int, default=0)
        sp_.add_argument("--out", help="write the JSON report here instead of stdout")
        sp_.add_argument("--jobs", type=int, default=1, help="worker processes where supported")
        if direction:
            sp_.add_argument("--direction", choices=["forward", "backward"], default="forward")

    s = sub.add_parser("pc", help="post-critical orbits and short/long classification")
    common(s)
    s.add_argument("--nmax", type=int, default=16)
    s.add_argument("--direction", choices=["forward", "backward", "both"], default="both")
    s.add_argument("--symbolic", metavar="NAME", help="also track degrees in this parameter")
    s.add_argument("--tie", action="append", metavar="NAME", help="parameter that follows --symbolic (K4: b)")

    s = sub.add_parser("covariant-check", help="test m(K(p))/m(p) = J(p) exactly")
    common(s)
    s.add_argument("--m", required=True, help='candidate, e.g. "u*v*(v-u+u*v)"')
    s.add_argument("--points", type=int, default=None, help="test points (default from degree bounds)")

    s = sub.add_parser("degrees", help="degree growth of the iterates")
    common(s)
    s.add_argument("--nmax", type=int, default=10)
    s.add_argument("--method", choices=["line", "homogeneous"], default="line")
    s.add_argument("--generic", action="store_true", help="draw random rational parameters")
    s.add_argument("--tie", action="append", metavar="NAME")

    s = sub.add_parser("cycles", help="primitive cycles of one order")
    common(s, direction=True)
    s.add_argument("--order", type=int, required=True)

    s = sub.add_parser("zeta", help="cycle counts up to nmax and zeta-function check")
    common(s, direction=True)
    s.add_argument("--nmax", type=int, default=12)
    s.add_argument("--zeta", default="1/((1-t)*(1-t^2-t^3))", help="candidate zeta function in t ('' to skip)")
    s.add_argument("--exact-upto", type=int, default=0, help="confirm fix_n exactly for n up to this")

    for name, hlp in (("lyapunov", "Lyapunov exponents"), ("dimension", "Kaplan-Yorke and box dimensions")):
        s = sub.add_parser(name, help=hlp)
        common(s, direction=True)
        s.add_argument("--p0", default="0.5,0.7")
        s.add_argument("--n", type=int, default=1_000_000)
        s.add_argument("--transient", type=int, default=10_000)
        if name == "dimension":
            s.add_argument("--no-box", action="store_true")

    s = sub.add_parser("portrait", help="phase-portrait point cloud as CSV")
    common(s, direction=True)
    s.add_argument("--p0", default="0.5,0.7")
    s.add_argument("--n", type=int, default=1_000_000)
    s.add_argument("--transient", type=int, default=10_000)
    s.add_argument("--coords", choices=["affine", "arctan"], default="affine")
    s.add_argument("--csv", help="CSV path (defaults to --out, the report then goes to stdout)")

    s = sub.add_parser("sweep", help="dimension report over a parameter range")
    common(s, direction=True)
    s.add_argument("--vary", required=True, metavar="NAME")
    s.add_argument("--start", type=float, required=True)
    s.add_argument("--stop", type=float, required=True)
    s.add_argument("--step", type=float, required=True)
    s.add_argument("--p0", default="0.5,0.7")
    s.add_argument("--n", type=int, default=200_000)
    s.add_argument("--transient", type=int, default=10_000)
    s.add_argument("--box", action="store_true")

    s = sub.add_parser("verify", help="run the built-in acceptance suite")
    common(s, needs_map=False)
    s.add_argument("--only", help="comma-separated criterion numbers")
    return p


COMMANDS = {
    "pc": cmd_pc, "covariant-check": cmd_covariant, "degrees": cmd_degrees, "cycles": cmd_cycles,
    "zeta": cmd_zeta, "lyapunov": cmd_lyapunov, "dimension": cmd_dimension, "portrait": cmd_portrait,
    "sweep": cmd_sweep, "verify": cmd_verify,
}


def _config(args, params) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("param", "out")}
    if params is not None:
        cfg["params"] = {k: str(v) for k, v in params.items()}
    return cfg


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        params = None
        if getattr(args, "map", None):
            allow = tuple(get_family(args.map).params) if getattr(args, "generic", False) else ()
            if getattr(args, "vary", None):
                allow += (args.vary,)
            params = resolve_params(args.map, args.param, args.command in EXACT_COMMANDS, allow)
            for name in [getattr(args, "symbolic", None), getattr(args, "vary", None), *(getattr(args, "tie", None) or [])]:
                if name and name not in get_family(args.map).params:
                    raise UsageError(f"{args.map} has no parameter {name!r}")
            if getattr(args, "vary", None):
                params.setdefault(args.vary, Fraction(0))
        if args.command == "portrait":
            if not (args.csv or args.out):
                raise UsageError("portrait needs --csv or --out")
            if not args.csv:
                args.csv, args.out = args.out, None
        if args.command == "pc" and args.tie and not args.symbolic:
            raise UsageError("--tie needs --symbolic")
    except (UsageError, ConfigError) as exc:
        print(f"biratlab: usage error: {exc}", file=sys.stderr)
        return 1

    try:
        result = COMMANDS[args.command](args, params)
    except (UsageError, ConfigError, ParseError) as exc:
        print(f"biratlab: usage error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"biratlab: computation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    emit(args.command, _config(args, params), result, args.out)
    if args.command == "verify":
        return 0 if all(r["passed"] for r in result) else 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
