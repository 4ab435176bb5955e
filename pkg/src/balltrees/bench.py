"""Experiment runner: build indexes, replay query workloads, report metrics.

A benchmark builds each requested index once over one dataset, replays an
identical uniform-query workload against every index, and aggregates the
tree and traversal metrics (average depth, visited nodes, wall times).
Every per-query hit list is digested, and the order-independent checksum of
those digests must agree across indexes; any divergence is an exactness
violation and aborts the run naming the first offending query.

Report schema (JSON mirrors the dataclasses below; CSV is one row per
(index, workload) pair with the column order in ``CSV_COLUMNS``):

* per index    - avg_depth, node_count, leaf_count, build_time_us
* per workload - avg_visited_nodes, avg_query_time_us, total_time_us,
                 result_checksum (times are medians over ``repetitions``
                 replays, reported in microseconds)
* environment  - config echo, seeds, calibrated radii, timestamp

Timing fields and the timestamp are the only nondeterministic content; two
runs with identical seeds agree byte-for-byte after ``strip_volatile``.
"""

from __future__ import annotations

import hashlib
import json
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .core import Dataset, distances_to
from .datagen import GenSpec, bounds_of, gen_uniform_queries, generate
from .partition import SplitConfig, build_tree
from .search import constrained_nn, knn_search, range_search

__all__ = [
    "WORKLOAD_MODES",
    "CSV_COLUMNS",
    "ExactnessViolation",
    "WorkloadSpec",
    "BenchConfig",
    "IndexReport",
    "WorkloadReport",
    "BenchReport",
    "calibrate_radius",
    "run_benchmark",
    "scalability_sweep",
    "emit_report",
    "strip_volatile",
]

WORKLOAD_MODES = ("range", "knn", "cnn")

CSV_COLUMNS = [
    "n",
    "index",
    "mode",
    "k",
    "radius",
    "query_count",
    "avg_depth",
    "node_count",
    "leaf_count",
    "build_time_us",
    "avg_visited_nodes",
    "avg_query_time_us",
    "total_time_us",
    "result_checksum",
]


class ExactnessViolation(RuntimeError):
    """Two indexes disagreed on a query's results; names the first query."""

    def __init__(self, message: str, query_id: int):
        super().__init__(message)
        self.query_id = query_id


@dataclass
class WorkloadSpec:
    """One replayed query workload.

    ``radius=None`` asks for calibration: the radius is tuned on the target
    dataset until range results average about ``target_hits`` points (for
    cnn workloads ``target_hits`` defaults to 5*k).  The calibrated value is
    echoed into the report.
    """

    mode: str
    k: int = 10
    radius: Optional[float] = None
    query_count: int = 1000
    query_seed: int = 0

    def __post_init__(self) -> None:
        if self.mode not in WORKLOAD_MODES:
            raise ValueError(f"unknown workload mode {self.mode!r}, expected one of {WORKLOAD_MODES}")
        if self.query_count < 1:
            raise ValueError("query_count must be at least 1")
        if self.mode in ("knn", "cnn") and self.k < 1:
            raise ValueError("k must be at least 1")
        if self.radius is not None and self.radius < 0:
            raise ValueError("radius must be nonnegative")


@dataclass
class BenchConfig:
    data: GenSpec
    indexes: Sequence[str] = ("pca",)
    alpha: float = 0.5
    sections: int = 32
    leaf_capacity: int = 1
    f2_variant: str = "midpoint"
    workloads: Sequence[WorkloadSpec] = field(default_factory=tuple)
    repetitions: int = 3
    parallel: bool = False

    def __post_init__(self) -> None:
        if not self.indexes:
            raise ValueError("at least one index is required")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        for index in self.indexes:
            self.split_for(index)  # validates splitter names and knobs

    def split_for(self, index: str) -> SplitConfig:
        return SplitConfig(
            splitter=index,
            alpha=self.alpha,
            sections=self.sections,
            leaf_capacity=self.leaf_capacity,
            f2_variant=self.f2_variant,
        )


@dataclass
class IndexReport:
    index: str
    avg_depth: float
    node_count: int
    leaf_count: int
    build_time_us: float


@dataclass
class WorkloadReport:
    index: str
    mode: str
    k: Optional[int]
    radius: Optional[float]
    query_count: int
    avg_visited_nodes: float
    avg_query_time_us: float
    total_time_us: float
    result_checksum: str


@dataclass
class BenchReport:
    environment: dict
    indexes: list
    workloads: list

    def to_dict(self) -> dict:
        return {
            "environment": self.environment,
            "indexes": [asdict(r) for r in self.indexes],
            "workloads": [asdict(r) for r in self.workloads],
        }


def calibrate_radius(dataset: Dataset, target_hits: float, seed: int = 0) -> float:
    """Radius whose average range-result size is roughly ``target_hits``.

    Starts from the 1st percentile of sampled pairwise distances and scales
    multiplicatively (dim-th root of the count ratio) against a seeded probe
    query set until the average count lands within 20% of the target.
    Deterministic for fixed inputs.
    """
    if dataset.count < 2:
        raise ValueError("calibration needs at least 2 points")
    rng = np.random.default_rng(seed)
    pairs = rng.integers(0, dataset.count, size=(4096, 2))
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    gaps = np.sqrt(
        ((dataset.points[pairs[:, 0]] - dataset.points[pairs[:, 1]]) ** 2).sum(axis=1)
    )
    positive = gaps[gaps > 0]
    if positive.size == 0:
        raise ValueError("cannot calibrate a radius: all sampled points coincide")
    radius = float(np.percentile(positive, 1.0))
    probes = gen_uniform_queries(64, bounds_of(dataset), seed=seed + 1).points
    target = max(target_hits, 1.0)
    for _ in range(30):
        counts = [(distances_to(dataset.points, q) <= radius).sum() for q in probes]
        avg = float(np.mean(counts))
        if avg == 0.0:
            radius *= 2.0
            continue
        ratio = target / avg
        if 0.8 <= ratio <= 1.25:
            break
        radius *= float(np.clip(ratio ** (1.0 / dataset.dim), 0.25, 4.0))
    return radius


def _query_digest(query_id: int, hits: list) -> int:
    """128-bit digest of one query's hit list (indexes + rounded distances)."""
    h = hashlib.blake2b(digest_size=16)
    h.update(query_id.to_bytes(8, "little"))
    if hits:
        arr = np.asarray(hits, dtype=np.float64)
        arr[:, 1] = np.round(arr[:, 1], 9)
        h.update(arr.tobytes())
    return int.from_bytes(h.digest(), "little")


def _checksum(digests: Sequence[int]) -> str:
    return f"{sum(digests) % (1 << 128):032x}"


def _search_fn(mode: str, wl: WorkloadSpec, radius: Optional[float]):
    if mode == "range":
        return lambda tree, q: range_search(tree, q, radius)
    if mode == "knn":
        return lambda tree, q: knn_search(tree, q, wl.k)
    return lambda tree, q: constrained_nn(tree, q, wl.k, radius)


def _replay(tree, queries: np.ndarray, fn, repetitions: int, parallel: bool):
    """Replay a workload ``repetitions`` times; record metrics on the first.

    Returns (digests, visited list, median total seconds).  Timing runs are
    sequential unless ``parallel`` is set, in which case wall times measure
    the thread-pool replay and are not comparable to sequential numbers.
    """
    digests = []
    visited = []
    times = []
    for rep in range(repetitions):
        started = time.perf_counter()
        if parallel:
            with ThreadPoolExecutor() as pool:
                results = list(pool.map(lambda q: fn(tree, q), queries))
            if rep == 0:
                for qid, res in enumerate(results):
                    visited.append(res.visited_nodes)
                    digests.append(_query_digest(qid, res.hits))
        elif rep == 0:
            for qid, q in enumerate(queries):
                res = fn(tree, q)
                visited.append(res.visited_nodes)
                digests.append(_query_digest(qid, res.hits))
        else:
            for q in queries:
                fn(tree, q)
        times.append(time.perf_counter() - started)
    return digests, visited, statistics.median(times)


def run_benchmark(config: BenchConfig, dataset: Optional[Dataset] = None) -> BenchReport:
    """Build every requested index, replay the workloads, aggregate a report.

    A precomputed ``dataset`` skips generation (it must match ``config.data``).
    Raises :class:`ExactnessViolation` if any two indexes disagree on any
    query of any workload.
    """
    ds = generate(config.data) if dataset is None else dataset
    box = bounds_of(ds)

    resolved = []
    for wl in config.workloads:
        radius = wl.radius
        if wl.mode in ("range", "cnn") and radius is None:
            target = 5.0 * wl.k if wl.mode == "cnn" else 20.0
            radius = calibrate_radius(ds, target, seed=wl.query_seed)
        queries = gen_uniform_queries(wl.query_count, box, wl.query_seed).points
        resolved.append((wl, radius, queries))

    index_reports = []
    workload_reports = []
    reference: dict = {}  # workload position -> (index name, digests)
    for index in config.indexes:
        started = time.perf_counter()
        tree = build_tree(ds, config.split_for(index))
        build_seconds = time.perf_counter() - started
        stats = tree.build_stats
        index_reports.append(
            IndexReport(
                index=index,
                avg_depth=stats.avg_depth,
                node_count=stats.node_count,
                leaf_count=stats.leaf_count,
                build_time_us=build_seconds * 1e6,
            )
        )
        for pos, (wl, radius, queries) in enumerate(resolved):
            fn = _search_fn(wl.mode, wl, radius)
            digests, visited, seconds = _replay(
                tree, queries, fn, config.repetitions, config.parallel
            )
            if pos not in reference:
                reference[pos] = (index, digests)
            else:
                ref_index, ref_digests = reference[pos]
                for qid, (a, b) in enumerate(zip(ref_digests, digests)):
                    if a != b:
                        raise ExactnessViolation(
                            f"workload {wl.mode}: query {qid} differs between "
                            f"indexes {ref_index!r} and {index!r}",
                            query_id=qid,
                        )
            workload_reports.append(
                WorkloadReport(
                    index=index,
                    mode=wl.mode,
                    k=wl.k if wl.mode in ("knn", "cnn") else None,
                    radius=radius if wl.mode in ("range", "cnn") else None,
                    query_count=wl.query_count,
                    avg_visited_nodes=float(np.mean(visited)),
                    avg_query_time_us=seconds * 1e6 / wl.query_count,
                    total_time_us=seconds * 1e6,
                    result_checksum=_checksum(digests),
                )
            )

    environment = {
        "dataset": asdict(config.data),
        "n": ds.count,
        "dim": ds.dim,
        "indexes": list(config.indexes),
        "alpha": config.alpha,
        "sections": config.sections,
        "leaf_capacity": config.leaf_capacity,
        "f2_variant": config.f2_variant,
        "workloads": [
            {**asdict(wl), "radius": radius if wl.mode != "knn" else None}
            for wl, radius, _ in resolved
        ],
        "repetitions": config.repetitions,
        "parallel": config.parallel,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    return BenchReport(environment, index_reports, workload_reports)


def scalability_sweep(config: BenchConfig, sizes: Sequence[int]) -> list:
    """One report per dataset size, same generator family, fresh workloads.

    Query seeds are offset per size so each sweep point replays a newly
    drawn workload; everything else follows ``config``.
    """
    sizes = [int(s) for s in sizes]
    if sizes != sorted(sizes):
        raise ValueError("sizes must be ascending")
    if not sizes:
        raise ValueError("at least one size is required")
    reports = []
    for i, n in enumerate(sizes):
        data = replace(config.data, n=n)
        workloads = tuple(
            replace(wl, query_seed=wl.query_seed + i) for wl in config.workloads
        )
        reports.append(run_benchmark(replace(config, data=data, workloads=workloads)))
    return reports


def strip_volatile(report_dict: dict) -> dict:
    """Drop timing fields and the timestamp: what's left is seed-reproducible."""
    volatile = {"timestamp", "build_time_us", "total_time_us", "avg_query_time_us"}

    def scrub(obj):
        if isinstance(obj, dict):
            return {k: scrub(v) for k, v in obj.items() if k not in volatile}
        if isinstance(obj, list):
            return [scrub(v) for v in obj]
        return obj

    return scrub(report_dict)


def _csv_rows(report: BenchReport) -> list:
    by_index = {r.index: r for r in report.indexes}
    n = report.environment.get("n", "")
    rows = []
    if report.workloads:
        for w in report.workloads:
            ir = by_index[w.index]
            rows.append(
                [
                    n,
                    w.index,
                    w.mode,
                    "" if w.k is None else w.k,
                    "" if w.radius is None else repr(float(w.radius)),
                    w.query_count,
                    repr(float(ir.avg_depth)),
                    ir.node_count,
                    ir.leaf_count,
                    repr(float(ir.build_time_us)),
                    repr(float(w.avg_visited_nodes)),
                    repr(float(w.avg_query_time_us)),
                    repr(float(w.total_time_us)),
                    w.result_checksum,
                ]
            )
    else:
        for ir in report.indexes:
            rows.append(
                [
                    n,
                    ir.index,
                    "",
                    "",
                    "",
                    "",
                    repr(float(ir.avg_depth)),
                    ir.node_count,
                    ir.leaf_count,
                    repr(float(ir.build_time_us)),
                    "",
                    "",
                    "",
                    "",
                ]
            )
    return rows


def emit_report(report, fmt: str, destination) -> None:
    """Serialize one report (or a list from a sweep) to JSON or CSV.

    JSON is a self-contained document mirroring the report structure; CSV is
    one row per (index, workload) with the stable ``CSV_COLUMNS`` order.
    Floats keep shortest round-trip repr, so at least 12 significant digits
    survive serialization.
    """
    if fmt not in ("json", "csv"):
        raise ValueError(f"unknown report format {fmt!r}, expected 'json' or 'csv'")
    reports = report if isinstance(report, list) else [report]
    with open(destination, "w", encoding="utf-8") as out:
        if fmt == "json":
            payload = [r.to_dict() for r in reports]
            json.dump(payload[0] if not isinstance(report, list) else payload, out, indent=2)
            out.write("\n")
        else:
            out.write(",".join(CSV_COLUMNS) + "\n")
            for r in reports:
                for row in _csv_rows(r):
                    out.write(",".join(str(cell) for cell in row) + "\n")
