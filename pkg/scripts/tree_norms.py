"""Ball lower bounds for ||Gamma|| of T(r+, r-) against the closed form."""
import argparse
import math

from bgpa.spectral import tree_ball_sequence, tree_norm_closed_form


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--rplus", type=int, default=3)
    p.add_argument("--rminus", type=int, default=3)
    p.add_argument("--radii", type=int, nargs="+", default=list(range(2, 19, 2)))
    args = p.parse_args()
    closed = tree_norm_closed_form(args.rplus, args.rminus)
    delta = math.sqrt(args.rplus * args.rminus) if args.rplus == args.rminus else None
    print(f"closed form {closed:.12f}" + (f", delta {delta:g}" if delta else ""))
    print(f"{'radius':>6} {'lower bound':>16} {'gap':>10} {'gap*r^2':>9}")
    for r, low in tree_ball_sequence(args.rplus, args.rminus, args.radii):
        print(f"{r:>6} {low:>16.12f} {closed - low:>10.6f} {(closed - low) * r * r:>9.3f}")


if __name__ == "__main__":
    main()
