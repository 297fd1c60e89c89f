#!/usr/bin/env python3
"""Structure-recovery experiment: how often does the greedy search find the
generating cherry tree, and how large is its weight gap to the exhaustive
optimum, as functions of sample size?

Simulates from the known 6-variable order-3 model of make_synthetic.py,
fits with k=3 over many seeds, and prints a per-sample-size summary.
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))
from make_synthetic import simulate

from cherrywine import (
    Dataset,
    build_tcherry_greedy,
    discretize,
    exhaustive_tcherry,
    uniform_partition,
)

TRUE_CLUSTERS = {(1, 2, 3), (2, 3, 4), (2, 3, 6), (3, 4, 5)}


def run(n: int, trials: int, bins: int, base_seed: int, with_oracle: bool):
    hits = 0
    gaps = []
    t0 = time.time()
    for t in range(trials):
        rng = np.random.default_rng(base_seed + t)
        data = Dataset(simulate(rng, n), tuple(f"x{i}" for i in range(1, 7)))
        ds = discretize(data, uniform_partition(data, bins))
        result = build_tcherry_greedy(ds, 3)
        if set(result.tree.clusters) == TRUE_CLUSTERS:
            hits += 1
        if with_oracle:
            _, opt = exhaustive_tcherry(ds, 3)
            gaps.append(opt - result.total_weight)
    elapsed = time.time() - t0
    line = f"N={n:>6}  recovered {hits}/{trials}"
    if gaps:
        line += f"  weight gap mean={np.mean(gaps):.4f} max={np.max(gaps):.4f}"
    line += f"  ({elapsed:.1f}s)"
    print(line)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--bins", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument(
        "--sizes", type=int, nargs="+", default=[250, 500, 1000, 2000, 5000]
    )
    ap.add_argument(
        "--oracle",
        action="store_true",
        help="also run the exhaustive oracle and report weight gaps",
    )
    args = ap.parse_args()
    for n in args.sizes:
        run(n, args.trials, args.bins, args.seed, args.oracle)


if __name__ == "__main__":
    main()
