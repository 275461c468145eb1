"""Hecke algebra tables and crossed-product checks for named pairs."""
import argparse
import time

from bgpa.hecke import crossed_product, hecke_table, named_pair, permutation_action


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("pairs", nargs="*", default=["S3/S2", "Z4/Z2", "S4/S3"])
    args = p.parse_args()
    for name in args.pairs:
        t0 = time.perf_counter()
        ctx = named_pair(name)
        print(f"{name}: {len(ctx.double_cosets)} double cosets, indices {sorted(ctx.indices)}")
        print(hecke_table(ctx))
        cp = crossed_product(ctx, permutation_action(ctx), False)
        checks = {**cp.verify(), **cp.verify_phi()}
        failed = [k for k, v in checks.items() if k != "dim" and not v]
        print(f"  crossed product dim {cp.dim}: {'all checks pass' if not failed else failed}"
              f" ({time.perf_counter() - t0:.1f}s)")


if __name__ == "__main__":
    main()
