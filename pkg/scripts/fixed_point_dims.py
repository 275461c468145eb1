"""Fixed-point dimensions dim Q_n^+ for the builders, next to the TL count."""
import argparse

from bgpa import builders
from bgpa.symmetry import fixed_point_dim

EXAMPLES = {
    "diagonal(Z2)": lambda: builders.diagonal("Z2"),
    "diagonal(S3)": lambda: builders.diagonal("S3"),
    "bh(S3)": builders.bh_s3,
    "multi_edge(3,S3)": lambda: builders.multi_edge(3, True),
    "tree(3,3) r=6": lambda: builders.biregular_tree(3, 3, 6),
}


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, default=3)
    args = p.parse_args()
    ns = range(1, args.n + 1)
    print(f"{'example':<18}" + "".join(f"{'n=' + str(n):>8}" for n in ns))
    print(f"{'TL oracle':<18}" + "".join(f"{builders.tl_dim_oracle(n):>8}" for n in ns))
    for name, make in EXAMPLES.items():
        b = make()
        print(f"{name:<18}" + "".join(f"{fixed_point_dim(b.graph, b.action, n):>8}" for n in ns))


if __name__ == "__main__":
    main()
