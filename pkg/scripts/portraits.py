"""Phase portraits as CSV point clouds.

* K at b = -3/5 in arctan coordinates (unbounded branches pile up at the
  corners theta = +-pi/2);
* Hd at (1.4, 0.3, 0.1) forward, in affine coordinates;
* Hd backward, in arctan coordinates.

Pass --plot to also render PNGs with matplotlib if it is installed.
"""
import argparse
from fractions import Fraction
from pathlib import Path

from biratlab.ergodic import portrait
from biratlab.maps import bind

HD = {"a": Fraction(7, 5), "b": Fraction(3, 10), "c": Fraction(1, 10)}
JOBS = [
    ("k_arctan", "K", {"b": Fraction(-3, 5)}, "forward", (0.5, 0.7), "arctan"),
    ("hd_forward", "Hd", HD, "forward", (0.1, 0.1), "affine"),
    ("hd_backward", "Hd", HD, "backward", (0.1, 0.1), "arctan"),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=10**6)
    ap.add_argument("--dir", default="portraits")
    ap.add_argument("--plot", action="store_true")
    args = ap.parse_args()
    out = Path(args.dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, map_id, params, direction, p0, coords in JOBS:
        pts, status = portrait(bind(map_id, params, direction), p0, args.n, coords=coords, out=out / f"{name}.csv")
        print(f"{name}: {len(pts)} points, {status}")
        if args.plot:
            import matplotlib

            matplotlib.use("Agg")
            import matplotlib.pyplot as plt

            fig, ax = plt.subplots(figsize=(6, 6))
            ax.plot(pts[:, 0], pts[:, 1], ",k", alpha=0.3)
            ax.set_title(name)
            fig.savefig(out / f"{name}.png", dpi=150)
            plt.close(fig)


if __name__ == "__main__":
    main()
