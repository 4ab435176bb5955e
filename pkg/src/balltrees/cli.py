"""Command-line frontend: dataset generation, tree stats, queries, benchmarks.

Subcommands: ``gen``, ``build-stats``, ``query``, ``bench``, ``sweep``.
Exit codes: 0 success, 2 usage error, 3 exactness violation, 1 other
runtime failure.  Every random choice is controlled by an explicit seed
flag, so reruns with identical flags reproduce identical outputs (timing
fields aside).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .bench import (
    BenchConfig,
    ExactnessViolation,
    WorkloadSpec,
    emit_report,
    run_benchmark,
    scalability_sweep,
)
from .datagen import (
    FAMILIES,
    CsvParseError,
    GenSpec,
    generate,
    load_csv,
    subsample,
    write_csv,
)
from .partition import SPLITTERS, SplitConfig, build_tree
from .search import (
    constrained_nn,
    knn_search,
    oracle_constrained,
    oracle_knn,
    oracle_range,
    range_search,
)


class UsageError(ValueError):
    """Bad flag combination or out-of-domain parameter value."""


def _parse_point(text: str) -> np.ndarray:
    try:
        return np.array([float(c) for c in text.split(",")])
    except ValueError:
        raise UsageError(f"cannot parse point {text!r}: expected comma-separated reals") from None


def _parse_cnn(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"--cnn expects K,R, got {text!r}")
    try:
        k, r = int(parts[0]), float(parts[1])
    except ValueError:
        raise UsageError(f"--cnn expects K,R, got {text!r}") from None
    return k, r


def _parse_sizes(text: str) -> list:
    try:
        sizes = [int(float(s)) for s in text.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse sizes {text!r}") from None
    if any(s < 1 for s in sizes):
        raise UsageError("sizes must be positive")
    return sizes


def _parse_columns(text: str) -> list:
    try:
        return [int(c) for c in text.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse column selection {text!r}") from None


def _add_dataset_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", help="CSV dataset file to load")
    p.add_argument("--family", choices=[f for f in FAMILIES if f != "csv"],
                   help="synthetic dataset family to generate")
    p.add_argument("--n", type=int, default=0, help="point count (generators; also csv subsample size)")
    p.add_argument("--dim", type=int, default=2, help="dimension (latin_center / sobol)")
    p.add_argument("--seed", type=int, default=0, help="dataset / subsample seed")
    p.add_argument("--columns", help="comma-separated 0-based CSV columns to keep")
    p.add_argument("--skip-header", action="store_true", help="skip the first CSV row")
    p.add_argument("--sample", type=int, default=0, help="subsample the CSV to this many rows")


def _add_split_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=0.5,
                   help="balance-vs-evenness weight of the pca splitter objective")
    p.add_argument("--sections", type=int, default=32,
                   help="candidate thresholds scanned per pca split")
    p.add_argument("--leaf-size", type=int, default=1, help="leaf capacity")
    p.add_argument("--f2", choices=["midpoint", "offset", "paper"], default="midpoint",
                   help="pca evenness objective variant ('paper' is an alias for 'offset')")


def _f2_variant(args) -> str:
    return "offset" if args.f2 == "paper" else args.f2


def _dataset_from_args(args):
    if args.data and args.family:
        raise UsageError("--data and --family are mutually exclusive")
    if args.data:
        columns = _parse_columns(args.columns) if args.columns else None
        ds = load_csv(args.data, columns=columns, skip_header=args.skip_header)
        if args.sample:
            ds = subsample(ds, args.sample, args.seed)
        return ds
    if not args.family:
        raise UsageError("one of --data or --family is required")
    if args.n < 1:
        raise UsageError("--n is required with --family")
    spec = GenSpec(family=args.family, n=args.n, dim=args.dim, seed=args.seed)
    return generate(spec)


def _genspec_from_args(args) -> GenSpec:
    if args.data:
        return GenSpec(family="csv", n=args.sample or 0, dim=args.dim,
                       seed=args.seed, path=args.data)
    if not args.family:
        raise UsageError("one of --data or --family is required")
    if args.n < 1:
        raise UsageError("--n is required with --family")
    return GenSpec(family=args.family, n=args.n, dim=args.dim, seed=args.seed)


def cmd_gen(args) -> int:
    if args.family in ("highleyman", "lithuanian"):
        args.dim = 2
    spec = GenSpec(family=args.family, n=args.n, dim=args.dim, seed=args.seed)
    ds = generate(spec)
    write_csv(ds, args.out)
    print(f"wrote {ds.count} rows x {ds.dim} columns to {args.out}")
    return 0


def _workloads_from_args(args) -> list:
    chosen = [name for name, given in
              [("range", args.range is not None), ("knn", args.knn is not None),
               ("cnn", args.cnn is not None)] if given]
    if len(chosen) > 1:
        raise UsageError("give at most one of --range / --knn / --cnn")
    k = 10
    radius = None
    if args.cnn is not None:
        k, radius = _parse_cnn(args.cnn)
    elif args.knn is not None:
        k = args.knn
    elif args.range is not None:
        radius = args.range
    if radius is not None and radius < 0:
        raise UsageError("radius must be nonnegative")
    if k < 1:
        raise UsageError("K must be at least 1")
    modes = [m.strip() for m in args.compare_modes.split(",")] if args.compare_modes \
        else (chosen or ["knn"])
    workloads = []
    for mode in modes:
        if mode not in ("range", "knn", "cnn"):
            raise UsageError(f"unknown mode {mode!r} in --compare-modes")
        workloads.append(WorkloadSpec(mode=mode, k=k, radius=radius if mode != "knn" else None,
                                      query_count=args.queries, query_seed=args.query_seed))
    return workloads


def cmd_build_stats(args) -> int:
    ds = _dataset_from_args(args)
    indexes = _parse_indexes(args.indexes)
    config = BenchConfig(
        data=_genspec_from_args(args),
        indexes=indexes,
        alpha=args.alpha,
        sections=args.sections,
        leaf_capacity=args.leaf_size,
        f2_variant=_f2_variant(args),
        workloads=(),
        repetitions=1,
    )
    report = run_benchmark(config, dataset=ds)
    for ir in report.indexes:
        print(f"{ir.index}: avg_depth={ir.avg_depth:.4f} nodes={ir.node_count} "
              f"leaves={ir.leaf_count} build={ir.build_time_us / 1e6:.3f}s")
    if args.out:
        emit_report(report, args.format, args.out)
        print(f"report written to {args.out}")
    return 0


def cmd_query(args) -> int:
    ds = _dataset_from_args(args)
    q = _parse_point(args.point)
    if q.shape[0] != ds.dim:
        raise UsageError(f"--point is {q.shape[0]}-D but the dataset is {ds.dim}-D")
    given = [args.range is not None, args.knn is not None, args.cnn is not None]
    if sum(given) != 1:
        raise UsageError("give exactly one of --range / --knn / --cnn")
    split = SplitConfig(
        splitter=args.index,
        alpha=args.alpha,
        sections=args.sections,
        leaf_capacity=args.leaf_size,
        f2_variant=_f2_variant(args),
    )
    tree = build_tree(ds, split)
    if args.range is not None:
        if args.range < 0:
            raise UsageError("radius must be nonnegative")
        result = range_search(tree, q, args.range)
        expected = oracle_range(ds, q, args.range)
        label = f"range r={args.range}"
    elif args.knn is not None:
        if args.knn < 1:
            raise UsageError("K must be at least 1")
        result = knn_search(tree, q, args.knn)
        expected = oracle_knn(ds, q, args.knn)
        label = f"knn K={args.knn}"
    else:
        k, r = _parse_cnn(args.cnn)
        if r < 0:
            raise UsageError("radius must be nonnegative")
        if k < 1:
            raise UsageError("K must be at least 1")
        result = constrained_nn(tree, q, k, r)
        expected = oracle_constrained(ds, q, k, r)
        label = f"cnn K={k} r={r}"
    print(f"{label} on {args.index} index: {len(result.hits)} hits, "
          f"visited {result.visited_nodes} nodes, {result.elapsed * 1e6:.1f} us")
    for i, d in result.hits:
        print(f"  {i}\t{d!r}")
    if args.verify:
        got = np.array([h[1] for h in result.hits])
        want = np.array([h[1] for h in expected])
        if got.shape != want.shape or not np.allclose(got, want, rtol=1e-9, atol=1e-9):
            print("VERIFY FAILED: tree result disagrees with the linear-scan oracle",
                  file=sys.stderr)
            return 3
        print("verified against linear scan: OK")
    return 0


def _parse_indexes(text: str) -> tuple:
    indexes = tuple(i.strip() for i in text.split(","))
    for index in indexes:
        if index not in SPLITTERS:
            raise UsageError(f"unknown index {index!r}, expected from {SPLITTERS}")
    return indexes


def cmd_bench(args) -> int:
    config = BenchConfig(
        data=_genspec_from_args(args),
        indexes=_parse_indexes(args.indexes),
        alpha=args.alpha,
        sections=args.sections,
        leaf_capacity=args.leaf_size,
        f2_variant=_f2_variant(args),
        workloads=() if args.stats_only else tuple(_workloads_from_args(args)),
        repetitions=args.repetitions,
        parallel=args.parallel,
    )
    dataset = _dataset_from_args(args)
    report = run_benchmark(config, dataset=dataset)
    for ir in report.indexes:
        print(f"{ir.index}: avg_depth={ir.avg_depth:.4f} nodes={ir.node_count} "
              f"build={ir.build_time_us / 1e6:.3f}s")
    for w in report.workloads:
        extra = f" k={w.k}" if w.k is not None else ""
        extra += f" r={w.radius:.6g}" if w.radius is not None else ""
        print(f"{w.index} {w.mode}{extra}: avg_visited={w.avg_visited_nodes:.1f} "
              f"avg_query={w.avg_query_time_us:.1f}us total={w.total_time_us / 1e6:.3f}s "
              f"checksum={w.result_checksum[:12]}")
    if args.out:
        emit_report(report, args.format, args.out)
        print(f"report written to {args.out}")
    return 0


def cmd_sweep(args) -> int:
    sizes = _parse_sizes(args.sizes)
    if args.data and (args.columns or args.skip_header):
        raise UsageError("sweep regenerates the dataset per size and only supports "
                         "plain numeric CSV files (no --columns / --skip-header)")
    if args.family and args.n < 1:
        args.n = sizes[0]
    config = BenchConfig(
        data=_genspec_from_args(args),
        indexes=_parse_indexes(args.indexes),
        alpha=args.alpha,
        sections=args.sections,
        leaf_capacity=args.leaf_size,
        f2_variant=_f2_variant(args),
        workloads=tuple(_workloads_from_args(args)),
        repetitions=args.repetitions,
    )
    reports = scalability_sweep(config, sizes)
    for n, report in zip(sizes, reports):
        for w in report.workloads:
            print(f"n={n} {w.index} {w.mode}: total={w.total_time_us:.0f}us "
                  f"avg_visited={w.avg_visited_nodes:.1f}")
    if args.out:
        emit_report(reports, args.format, args.out)
        print(f"reports written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="balltrees",
        description="Exact nearest-neighbor indexes (ball trees and a KD baseline) "
                    "with a benchmark harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic dataset as CSV")
    p.add_argument("--family", required=True, choices=[f for f in FAMILIES if f != "csv"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("build-stats", help="build indexes and print tree statistics")
    _add_dataset_flags(p)
    _add_split_flags(p)
    p.add_argument("--indexes", default="moore,pca,kd")
    p.add_argument("--out")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_build_stats)

    p = sub.add_parser("query", help="run one query against one index")
    _add_dataset_flags(p)
    _add_split_flags(p)
    p.add_argument("--index", choices=list(SPLITTERS), default="pca")
    p.add_argument("--point", required=True, help='query point, e.g. "0.5,0.5"')
    p.add_argument("--range", type=float, help="range search radius")
    p.add_argument("--knn", type=int, help="K for nearest-neighbor search")
    p.add_argument("--cnn", help="K,R for range-constrained nearest-neighbor search")
    p.add_argument("--verify", action="store_true",
                   help="cross-check the result against a linear scan")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("bench", help="benchmark workloads across indexes")
    _add_dataset_flags(p)
    _add_split_flags(p)
    p.add_argument("--indexes", default="moore,pca,kd")
    p.add_argument("--range", type=float, help="range workload radius")
    p.add_argument("--knn", type=int, help="K for a knn workload")
    p.add_argument("--cnn", help="K,R for a range-constrained nearest-neighbor workload")
    p.add_argument("--compare-modes", help="comma list of modes replayed with the same parameters")
    p.add_argument("--queries", type=int, default=1000)
    p.add_argument("--query-seed", type=int, default=0)
    p.add_argument("--repetitions", type=int, default=3)
    p.add_argument("--stats-only", action="store_true", help="skip workloads, report tree stats")
    p.add_argument("--parallel", action="store_true",
                   help="replay queries on a thread pool (times not comparable)")
    p.add_argument("--out")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep", help="rerun one benchmark over ascending dataset sizes")
    _add_dataset_flags(p)
    _add_split_flags(p)
    p.add_argument("--indexes", default="pca")
    p.add_argument("--sizes", required=True, help='comma list, e.g. "1e3,1e4,1e5"')
    p.add_argument("--range", type=float)
    p.add_argument("--knn", type=int)
    p.add_argument("--cnn")
    p.add_argument("--compare-modes")
    p.add_argument("--queries", type=int, default=1000)
    p.add_argument("--query-seed", type=int, default=0)
    p.add_argument("--repetitions", type=int, default=3)
    p.add_argument("--out")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ExactnessViolation as exc:
        print(f"exactness violation: {exc}", file=sys.stderr)
        return 3
    except CsvParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entrypoint()
