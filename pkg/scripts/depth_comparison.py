#!/usr/bin/env python3
"""Average tree depth of the three splitters over the synthetic generators.

Builds every index over every generator at the requested size and prints a
depth table; the pca splitter should stay near log2(n) while farthest-pair
splits drift deeper on skewed data.
"""

import argparse
import math

from balltrees.datagen import GenSpec, generate
from balltrees.partition import SplitConfig, build_tree

FAMILIES = ("latin_center", "highleyman", "lithuanian", "sobol")
SPLITTERS = ("pca", "moore", "kd")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=2**16)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--leaf-size", type=int, default=1)
    args = parser.parse_args()

    print(f"n = {args.n} (log2 = {math.log2(args.n):.2f}), leaf capacity {args.leaf_size}")
    header = f"{'generator':<14}" + "".join(f"{s:>10}" for s in SPLITTERS)
    print(header)
    for family in FAMILIES:
        ds = generate(GenSpec(family=family, n=args.n, dim=2, seed=args.seed))
        depths = []
        for splitter in SPLITTERS:
            tree = build_tree(ds, SplitConfig(splitter=splitter, leaf_capacity=args.leaf_size))
            depths.append(tree.build_stats.avg_depth)
        print(f"{family:<14}" + "".join(f"{d:>10.4f}" for d in depths))


if __name__ == "__main__":
    main()
