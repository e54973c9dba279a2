"""Write the deterministic stand-in corpora used by the mock configs."""

import argparse

from reqgrid.synthetic import write_synthetic_corpora


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    for name, path in write_synthetic_corpora(args.out, seed=args.seed).items():
        print(f"{name:20s} {path}")


if __name__ == "__main__":
    main()
