#!/usr/bin/env python3
"""Average visited nodes per query for the three indexes on each generator.

Replays one uniform range-query workload (radius calibrated per dataset)
against all indexes and prints the per-index averages, mirroring the depth
experiment at query time.  Checksum agreement across indexes is enforced by
the harness.
"""

import argparse

from balltrees.bench import BenchConfig, WorkloadSpec, calibrate_radius, run_benchmark
from balltrees.datagen import GenSpec, generate

FAMILIES = ("latin_center", "highleyman", "lithuanian", "sobol")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=2**16)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--queries", type=int, default=1000)
    parser.add_argument("--target-hits", type=float, default=1000.0,
                        help="range radius is calibrated to average this many hits")
    args = parser.parse_args()

    for family in FAMILIES:
        spec = GenSpec(family=family, n=args.n, dim=2, seed=args.seed)
        ds = generate(spec)
        radius = calibrate_radius(ds, args.target_hits, seed=0)
        config = BenchConfig(
            data=spec,
            indexes=("pca", "moore", "kd"),
            workloads=(WorkloadSpec(mode="range", radius=radius,
                                    query_count=args.queries, query_seed=11),),
            repetitions=1,
        )
        report = run_benchmark(config, dataset=ds)
        cells = "  ".join(f"{w.index}={w.avg_visited_nodes:.0f}" for w in report.workloads)
        print(f"{family:<14} r={radius:.4g}  visited: {cells}")


if __name__ == "__main__":
    main()
