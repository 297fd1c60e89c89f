#!/usr/bin/env python3
"""Write a synthetic 6-column CSV whose Markov network is a known
3rd-order cherry tree (clusters {1,2,3}, {2,3,4}, {2,3,6}, {3,4,5}).

Columns 2 and 3 are independent hubs; 1, 4 and 6 load on both, and 5
loads on 3 and 4.  Useful as a quick input for the `cherrywine` CLI.
"""

import argparse

import numpy as np


def simulate(rng: np.random.Generator, n: int) -> np.ndarray:
    x2 = rng.normal(size=n)
    x3 = rng.normal(size=n)
    x1 = x2 + x3 + 0.4 * rng.normal(size=n)
    x4 = 0.9 * (x2 + x3) + 0.55 * rng.normal(size=n)
    x6 = 0.8 * (x2 + x3) + 0.8 * rng.normal(size=n)
    x5 = 0.9 * x4 + 0.5 * x3 + 0.7 * rng.normal(size=n)
    return np.column_stack([x1, x2, x3, x4, x5, x6])


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--output", default="synthetic.csv")
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    np.savetxt(args.output, simulate(rng, args.samples), delimiter=",")
    print(f"wrote {args.samples} rows to {args.output}")


if __name__ == "__main__":
    main()
