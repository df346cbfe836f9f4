"""Dimension of the deformed Henon attractor versus c at a = 1.4, b = 0.3.

c = 0 is the classical Henon map.  Parameters whose orbit escapes are
reported with their escape step instead of a dimension; with the default
start point the orbit at c = -0.05 leaves after a few thousand steps.
"""
import argparse
import json
from fractions import Fraction

from biratlab.ergodic import dimension_sweep, sweep_values


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--start", type=float, default=-0.05)
    ap.add_argument("--stop", type=float, default=0.38)
    ap.add_argument("--step", type=float, default=0.01)
    ap.add_argument("--n", type=int, default=200_000)
    ap.add_argument("--box", action="store_true", help="also box-count (needs --n >= 100000)")
    ap.add_argument("--jobs", type=int, default=4)
    ap.add_argument("--out", default="hd_sweep.json")
    args = ap.parse_args()

    params = {"a": Fraction(7, 5), "b": Fraction(3, 10), "c": Fraction(0)}
    values = sweep_values(args.start, args.stop, args.step)
    reports = dimension_sweep("Hd", params, "c", values, p0=(0.1, 0.1), n=args.n, box=args.box, jobs=args.jobs)
    for r in reports:
        if r.d_ky is None:
            print(f"c={r.param:+.2f}  {r.status}")
        else:
            box = f"  D_box={r.d_box:.3f}" if r.d_box is not None else ""
            print(f"c={r.param:+.2f}  sigma1={r.sigma1:.4f}  D_KY={r.d_ky:.3f}{box}")
    with open(args.out, "w") as fh:
        json.dump([r.to_json() for r in reports], fh, indent=2)


if __name__ == "__main__":
    main()
