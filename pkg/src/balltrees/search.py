"""Range, K-NN and range-constrained K-NN queries, plus linear-scan oracles.

All three searches run the same ball-based traversal over any built tree,
whichever splitter produced it.  ``visited_nodes`` counts every node whose
prune test was evaluated, including nodes the test rejected; the root is
always counted.  The constrained search prunes with the radius *and* the
current K-th best distance, so per query it never visits more nodes than
either plain search on the same tree.

Radius pruning is tolerance-hardened: a node is only skipped when the query
ball misses its ball by more than a relative float-noise margin.  Leaf-level
filters stay exact and share one distance routine with the oracles, so a
point at distance exactly ``r`` is treated identically by tree search and
linear scan.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass

import numpy as np

from .core import Dataset, Node, Point, Tree, distances_to

__all__ = [
    "QueryResult",
    "KnnState",
    "node_lower_bound",
    "range_search",
    "knn_search",
    "constrained_nn",
    "oracle_range",
    "oracle_knn",
    "oracle_constrained",
]

# Relative margin absorbing the worst-case rounding of the dist/radius
# pruning chain; far below any meaningful point separation.
_PRUNE_SLACK = 1e-12


@dataclass
class QueryResult:
    """Hits as (point index, distance) sorted by distance then index."""

    hits: list
    visited_nodes: int
    elapsed: float  # seconds


class KnnState:
    """Bounded accumulator of the K best (smallest-distance) candidates.

    ``bound`` is the current pruning distance: the K-th best distance once
    the list is full, otherwise ``init_bound`` (infinity for plain K-NN, the
    query radius for constrained search).  It never increases during one
    traversal.  A full list accepts a candidate only when it strictly beats
    the current worst, which is then evicted.
    """

    __slots__ = ("capacity", "init_bound", "_heap")

    def __init__(self, capacity: int, init_bound: float = math.inf):
        if capacity < 1:
            raise ValueError("capacity must be at least 1")
        self.capacity = capacity
        self.init_bound = init_bound
        self._heap: list = []  # max-heap via (-distance, -index)

    @property
    def full(self) -> bool:
        return len(self._heap) >= self.capacity

    @property
    def bound(self) -> float:
        if len(self._heap) >= self.capacity:
            return -self._heap[0][0]
        return self.init_bound

    def add(self, index: int, dist: float) -> None:
        if len(self._heap) < self.capacity:
            heapq.heappush(self._heap, (-dist, -index))
        elif dist < -self._heap[0][0]:
            heapq.heapreplace(self._heap, (-dist, -index))

    def sorted_hits(self) -> list:
        out = [(-ni, -nd) for nd, ni in self._heap]
        out.sort(key=lambda h: (h[1], h[0]))
        return out


def _point_dist(q: np.ndarray, center: np.ndarray) -> float:
    # Same squared-sum formula as distances_to, so node tests and leaf scans
    # can never disagree on the last ulp (BLAS dot may round differently).
    diff = q - center
    return math.sqrt(float((diff * diff).sum()))


def node_lower_bound(q: Point, node: Node, parent_bound: float) -> float:
    """Admissible lower bound on the distance from ``q`` to the node's points.

    Takes the max with the parent's bound, so bounds never decrease along a
    root-to-leaf path.
    """
    ball = node.ball
    return max(parent_bound, _point_dist(q, ball.center) - ball.radius, 0.0)


def _within_reach(dist: float, radius: float, r: float) -> bool:
    """Hardened ball-overlap test: keep the node unless it clearly misses."""
    limit = radius + r
    return dist <= limit + _PRUNE_SLACK * (dist + limit + 1.0)


def _as_query(q, dim: int) -> np.ndarray:
    qa = np.asarray(q, dtype=np.float64)
    if qa.ndim != 1 or qa.shape[0] != dim:
        raise ValueError(f"query must be a {dim}-D point, got shape {qa.shape}")
    if not np.isfinite(qa).all():
        raise ValueError("query coordinates must be finite")
    return qa


def range_search(tree: Tree, q: Point, r: float) -> QueryResult:
    """All points within distance ``r`` of ``q``.

    Descends only where the query ball reaches a node's ball; reached
    leaves are scanned linearly with the exact ``d <= r`` filter.
    """
    if r < 0:
        raise ValueError("radius must be nonnegative")
    qa = _as_query(q, tree.dataset.dim)
    started = time.perf_counter()
    points = tree.dataset.points
    hits: list = []
    visited = 0
    stack = [tree.root]
    while stack:
        node = stack.pop()
        visited += 1
        ball = node.ball
        if not _within_reach(_point_dist(qa, ball.center), ball.radius, r):
            continue
        idx = node.point_indices
        if idx is not None:
            dists = distances_to(points[idx], qa)
            inside = dists <= r
            hits.extend(zip(idx[inside].tolist(), dists[inside].tolist()))
        else:
            stack.append(node.right)
            stack.append(node.left)
    hits.sort(key=lambda h: (h[1], h[0]))
    return QueryResult(hits, visited, time.perf_counter() - started)


def knn_search(tree: Tree, q: Point, k: int) -> QueryResult:
    """The K points nearest to ``q`` (every point when the dataset is smaller).

    A node is expanded only while its lower bound beats the current K-th
    best distance; children are visited nearer-first.  At equal distances
    the candidate already held wins, so which of several tied boundary
    points lands in the result depends on traversal order; the distances
    are exact either way.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    qa = _as_query(q, tree.dataset.dim)
    started = time.perf_counter()
    points = tree.dataset.points
    state = KnnState(k)
    visited = 0
    stack = [(tree.root, node_lower_bound(qa, tree.root, 0.0))]
    while stack:
        node, bound = stack.pop()
        visited += 1
        if bound >= state.bound:
            continue
        idx = node.point_indices
        if idx is not None:
            dists = distances_to(points[idx], qa)
            for i, d in zip(idx.tolist(), dists.tolist()):
                state.add(i, d)
        else:
            left, right = node.left, node.right
            lbound = max(bound, _point_dist(qa, left.ball.center) - left.ball.radius, 0.0)
            rbound = max(bound, _point_dist(qa, right.ball.center) - right.ball.radius, 0.0)
            if lbound <= rbound:
                stack.append((right, rbound))
                stack.append((left, lbound))
            else:
                stack.append((left, lbound))
                stack.append((right, rbound))
    return QueryResult(state.sorted_hits(), visited, time.perf_counter() - started)


def constrained_nn(tree: Tree, q: Point, k: int, r: float) -> QueryResult:
    """The K nearest points among those within distance ``r`` of ``q``.

    Combines both prune rules: a node is dropped when the query ball cannot
    reach its ball, or, once K candidates are held, when its lower bound
    cannot beat the current K-th distance.  The pruning distance starts at
    ``r`` instead of infinity, and child order matches ``knn_search``
    (nearer-first), which keeps the visited set a subset of both plain
    searches on the same query.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if r < 0:
        raise ValueError("radius must be nonnegative")
    qa = _as_query(q, tree.dataset.dim)
    started = time.perf_counter()
    points = tree.dataset.points
    state = KnnState(k, init_bound=float(r))
    visited = 0
    root = tree.root
    rdist = _point_dist(qa, root.ball.center)
    stack = [
        (
            root,
            max(rdist - root.ball.radius, 0.0),
            _within_reach(rdist, root.ball.radius, r),
        )
    ]
    while stack:
        node, bound, reachable = stack.pop()
        visited += 1
        if not reachable:
            continue
        if state.full and bound >= state.bound:
            continue
        idx = node.point_indices
        if idx is not None:
            dists = distances_to(points[idx], qa)
            for i, d in zip(idx.tolist(), dists.tolist()):
                if d <= r:
                    state.add(i, d)
        else:
            left, right = node.left, node.right
            ldist = _point_dist(qa, left.ball.center)
            rdist = _point_dist(qa, right.ball.center)
            lbound = max(bound, ldist - left.ball.radius, 0.0)
            rbound = max(bound, rdist - right.ball.radius, 0.0)
            lkeep = _within_reach(ldist, left.ball.radius, r)
            rkeep = _within_reach(rdist, right.ball.radius, r)
            if lbound <= rbound:
                stack.append((right, rbound, rkeep))
                stack.append((left, lbound, lkeep))
            else:
                stack.append((left, lbound, lkeep))
                stack.append((right, rbound, rkeep))
    return QueryResult(state.sorted_hits(), visited, time.perf_counter() - started)


def _sorted_hits(dataset: Dataset, qa: np.ndarray) -> list:
    dists = distances_to(dataset.points, qa)
    order = np.lexsort((np.arange(dists.shape[0]), dists))
    return list(zip(order.tolist(), dists[order].tolist()))


def oracle_range(dataset: Dataset, q: Point, r: float) -> list:
    """Ground truth for range_search by full linear scan."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    qa = _as_query(q, dataset.dim)
    return [(i, d) for i, d in _sorted_hits(dataset, qa) if d <= r]


def oracle_knn(dataset: Dataset, q: Point, k: int) -> list:
    """Ground truth for knn_search by full sort."""
    if k < 1:
        raise ValueError("k must be at least 1")
    qa = _as_query(q, dataset.dim)
    return _sorted_hits(dataset, qa)[:k]


def oracle_constrained(dataset: Dataset, q: Point, k: int, r: float) -> list:
    """Ground truth for constrained_nn: radius filter, then truncate to K."""
    return oracle_range(dataset, q, r)[:k]
