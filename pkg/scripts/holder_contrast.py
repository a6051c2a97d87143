"""Seminorm of f' against truncation depth, powers-of-two schedule vs the linear one.

Also prints the per-level proxy lambda^(2+alpha) / |u_{k+1} v_{k+1}|^alpha, which
tracks the linear sweep closely and explains its polynomial growth in k.
"""
import argparse

from levels_lab.bridge import GridSpec
from levels_lab.partition import Params, Schedule, build_partition
from levels_lab.regularity import empirical_holder_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--depths", type=int, nargs="+", default=list(range(6, 13)))
    ap.add_argument("--samples", type=int, default=64)
    args = ap.parse_args()

    grid = GridSpec(samples=args.samples)
    top = max(args.depths)
    rows = {}
    for sched in Schedule:
        params = Params.with_defaults(args.alpha, k_max=top, schedule=sched)
        rows[sched] = dict(empirical_holder_sweep(params, args.depths, grid))
    lin = build_partition(Params.with_defaults(args.alpha, k_max=top, schedule=Schedule.LINEAR))

    print(f"{'depth':>5} {'pow2':>14} {'linear':>14} {'linear proxy':>14}")
    for d in args.depths:
        k = d - 1
        proxy = lin.lam[k] ** (2 + args.alpha) / lin.uv[k + 1] ** args.alpha
        print(f"{d:>5} {rows[Schedule.POW2][d]:>14.6g} {rows[Schedule.LINEAR][d]:>14.6g} {proxy:>14.6g}")
    p, l = rows[Schedule.POW2], rows[Schedule.LINEAR]
    lo, hi = min(args.depths), max(args.depths)
    print(f"pow2 max/min {max(p.values()) / min(p.values()):.3f}; linear growth {l[hi] / l[lo]:.2f}x")


if __name__ == "__main__":
    main()
