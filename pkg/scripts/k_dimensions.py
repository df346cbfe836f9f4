"""Kaplan-Yorke and box-counting dimensions of K for b = -0.9 .. -0.2.

Prints a table next to the published values and writes the raw reports as
JSON.  About five seconds with the defaults.
"""
import argparse
import json
from fractions import Fraction

from biratlab.acceptance import REFERENCE_DIMENSIONS
from biratlab.ergodic import dimension_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=10**6)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="k_dimensions.json")
    args = ap.parse_args()

    reports = dimension_sweep("K", {"b": Fraction(-3, 5)}, "b", list(REFERENCE_DIMENSIONS), n=args.n, box=True, jobs=args.jobs)
    print(f"{'b':>5} {'D_KY':>7} {'pub':>5} {'D_box':>7} {'pub':>5}  sigma1    sigma2")
    for r in reports:
        ky, bx = REFERENCE_DIMENSIONS[r.param]
        print(f"{r.param:5.1f} {r.d_ky:7.3f} {ky:5.2f} {r.d_box:7.3f} {bx:5.2f}  {r.sigma1:.5f} {r.sigma2:.5f}")
    with open(args.out, "w") as fh:
        json.dump([r.to_json() for r in reports], fh, indent=2)


if __name__ == "__main__":
    main()
