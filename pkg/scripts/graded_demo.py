"""Graded algebra property suite on the finite builders."""
import argparse

from bgpa import builders
from bgpa.graded import property_suite

EXAMPLES = {"diagonal": lambda: builders.diagonal("Z2"), "diagonal_s3": lambda: builders.diagonal("S3"),
            "bh": builders.bh_s3, "multi_edge": lambda: builders.multi_edge(3, True)}


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--nmax", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    for name, make in EXAMPLES.items():
        res = property_suite(make(), n_max=args.nmax, samples=args.samples, seed=args.seed)
        bad = [k for k, v in res.items() if isinstance(v, bool) and not v]
        print(f"{name:<12} ok={res['ok']} loops={res['n_loops']} gram_min={res['gram_min_eig']:.3g}"
              + (f" failing={bad}" if bad else ""))


if __name__ == "__main__":
    main()
