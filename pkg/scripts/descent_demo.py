"""Descent certificates, a cascade and an orbit sample for the default model."""
import argparse

from levels_lab.dynamics import descent_cascade, descent_certificate, g_inverse_approach, level_of, orbit_explore
from levels_lab.generators import GroupAction
from levels_lab.partition import Params, build_partition


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k-max", type=int, default=12)
    ap.add_argument("--orbit-length", type=int, default=8)
    args = ap.parse_args()

    model = build_partition(Params.with_defaults(0.5, k_max=args.k_max))
    action = GroupAction(model)
    for k in range(1, args.k_max):
        cert = descent_certificate(action, k)
        print(f"k={k:>2} m={cert.m} word={cert.word}  margin/bc_(k+1)={cert.margin / model.bc[k + 1]:.6f}")

    cascade = descent_cascade(action, 1, min(4, args.k_max - 1))
    end = action.apply_word(cascade.word, model.uv_points(1)[0])
    print(f"cascade word {cascade.word} -> {level_of(model, end)}")

    # g^-1 creeps towards b_k with cubic tangency
    for k in (1, 2):
        steps, monotone = g_inverse_approach(action, k, 1e-3 * model.bc[k])
        print(f"g^-1 from u_{k} reaches 1e-3 bc_{k} of b_{k} after {steps} steps (monotone: {monotone})")

    rep = orbit_explore(action, model.uv_points(1)[0], args.orbit_length)
    print(f"orbit of u_1, words up to {args.orbit_length}: {rep.to_json()}")


if __name__ == "__main__":
    main()
