#!/usr/bin/env python3
"""Constrained K-NN versus plain K-NN on the pca-split index.

For each generator, calibrates a radius so range results average ~5*K
points, then replays the same uniform queries in both modes and prints the
average visited-node counts side by side.  The constrained traversal prunes
with the radius and the K-th best distance at once, so its counts should
sit well below plain K-NN everywhere.
"""

import argparse

from balltrees.bench import BenchConfig, WorkloadSpec, run_benchmark
from balltrees.datagen import GenSpec

FAMILIES = ("latin_center", "highleyman", "lithuanian", "sobol")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=2**16)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--k", type=int, default=10)
    parser.add_argument("--queries", type=int, default=1000)
    args = parser.parse_args()

    for family in FAMILIES:
        config = BenchConfig(
            data=GenSpec(family=family, n=args.n, dim=2, seed=args.seed),
            indexes=("pca",),
            workloads=(
                WorkloadSpec(mode="knn", k=args.k, query_count=args.queries, query_seed=12),
                WorkloadSpec(mode="cnn", k=args.k, radius=None,
                             query_count=args.queries, query_seed=12),
            ),
            repetitions=1,
        )
        report = run_benchmark(config)
        by_mode = {w.mode: w for w in report.workloads}
        knn = by_mode["knn"].avg_visited_nodes
        cnn = by_mode["cnn"].avg_visited_nodes
        print(
            f"{family:<14} knn={knn:8.1f}  cnn={cnn:8.1f}  "
            f"(r={by_mode['cnn'].radius:.4g}, {cnn / knn:.0%} of plain)"
        )


if __name__ == "__main__":
    main()
