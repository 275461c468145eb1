"""Bratteli diagrams of P_n in P_{n+1} and Q_n in Q_{n+1}, with the norm chain."""
import argparse

from bgpa import builders
from bgpa.spectral import bratteli_P, bratteli_Q, graph_norm

EXAMPLES = {"diagonal": lambda: builders.diagonal("Z2"), "bh": builders.bh_s3,
            "multi_edge": lambda: builders.multi_edge(3, True),
            "tree": lambda: builders.biregular_tree(3, 3, 6)}


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("example", choices=sorted(EXAMPLES))
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    b = EXAMPLES[args.example]()
    gamma = graph_norm(b.graph, b.info)
    print(f"||Gamma|| in [{gamma.lower:.9f}, {gamma.upper:.9f}] ({gamma.method})")
    for n in range(args.n + 1):
        bp = bratteli_P(b.graph, n)
        bq = bratteli_Q(b.graph, b.action, n, seed=args.seed)
        print(f"n={n}: P dims {[s['dim'] for s in bp.level_np1]}, Q dims {[s['dim'] for s in bq.level_np1]}")
        print(f"      ||Gamma(Q)_n|| = {bq.norm():.9f} <= ||Delta_n|| = {bp.norm():.9f}")


if __name__ == "__main__":
    main()
