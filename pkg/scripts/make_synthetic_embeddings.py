#!/usr/bin/env python3
"""Generate a synthetic random embedding file for pipeline experiments.

Words are w000000, w000001, ...; vectors are iid standard normal.
"""

import argparse

import numpy as np


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out", help="output embedding file")
    ap.add_argument("--words", type=int, default=10_000)
    ap.add_argument("--dim", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--header", action="store_true", help="emit a 'count dim' first line")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    with open(args.out, "w", encoding="utf-8") as fh:
        if args.header:
            fh.write(f"{args.words} {args.dim}\n")
        for i in range(args.words):
            vec = rng.standard_normal(args.dim)
            fh.write(f"w{i:06d} " + " ".join(f"{v:.6f}" for v in vec) + "\n")
    print(f"wrote {args.words} x {args.dim} embeddings to {args.out}")


if __name__ == "__main__":
    main()
