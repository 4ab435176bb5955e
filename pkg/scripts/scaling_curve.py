#!/usr/bin/env python3
"""Total search time versus dataset size for the pca-split index.

Runs the same fixed-radius range workload over ascending Sobol datasets and
prints total time per size plus consecutive ratios; with a fixed radius the
result mass grows with n, so the totals should climb near-linearly across
decades.
"""

import argparse

from balltrees.bench import BenchConfig, WorkloadSpec, scalability_sweep
from balltrees.datagen import GenSpec


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="1e3,1e4,1e5")
    parser.add_argument("--radius", type=float, default=0.2)
    parser.add_argument("--queries", type=int, default=100)
    parser.add_argument("--repetitions", type=int, default=3)
    args = parser.parse_args()

    sizes = [int(float(s)) for s in args.sizes.split(",")]
    config = BenchConfig(
        data=GenSpec(family="sobol", n=sizes[0], dim=2),
        indexes=("pca",),
        workloads=(WorkloadSpec(mode="range", radius=args.radius,
                                query_count=args.queries, query_seed=21),),
        repetitions=args.repetitions,
    )
    reports = scalability_sweep(config, sizes)
    previous = None
    for n, report in zip(sizes, reports):
        total = report.workloads[0].total_time_us
        ratio = "" if previous is None else f"  x{total / previous:.1f} vs previous"
        print(f"n={n:>9}  total={total / 1e6:8.3f}s  "
              f"avg_visited={report.workloads[0].avg_visited_nodes:9.1f}{ratio}")
        previous = total


if __name__ == "__main__":
    main()
