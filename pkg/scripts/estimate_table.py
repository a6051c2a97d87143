"""Per-level maxima of the three piece estimates and their successive ratios."""
import argparse

from levels_lab.partition import Params, build_partition
from levels_lab.regularity import estimate_quantities


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--epsilon", type=float, help="default: largest admissible 2^-j")
    ap.add_argument("--k-max", type=int, default=12)
    args = ap.parse_args()

    if args.epsilon is None:
        params = Params.with_defaults(args.alpha, k_max=args.k_max)
    else:
        params = Params(args.alpha, args.epsilon, args.alpha + args.epsilon, k_max=args.k_max)
    model = build_partition(params)
    rep = estimate_quantities(model)
    q4 = {r["k"]: r["quantity4"] for r in rep.level_records}
    print(f"alpha={params.alpha} eps={params.epsilon} theta={params.theta}")
    print(f"{'k':>3} {'max q2':>12} {'ratio':>7} {'max q3':>12} {'ratio':>7} {'q4':>12}")
    ks = sorted(rep.max2)
    for k in ks:
        r2 = rep.max2[k] / rep.max2[k - 1] if k - 1 in rep.max2 else float("nan")
        r3 = rep.max3[k] / rep.max3[k - 1] if k - 1 in rep.max3 else float("nan")
        print(f"{k:>3} {rep.max2[k]:>12.5g} {r2:>7.3f} {rep.max3[k]:>12.5g} {r3:>7.3f} {q4[k]:>12.5g}")
    print(f"fitted M: {rep.fitted_M2:.4g} {rep.fitted_M3:.4g} {rep.fitted_M4:.4g}")
    print(f"bound exponents: {rep.exponents}")
    print(f"pieces outside the ratio hypothesis: {len(rep.lemma_exceptions)}")


if __name__ == "__main__":
    main()
