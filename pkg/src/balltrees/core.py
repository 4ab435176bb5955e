"""Euclidean geometry primitives and the point/ball/tree data model.

Points are plain 1-D numpy float64 arrays; a :class:`Dataset` wraps an
immutable (N, d) coordinate matrix whose row indices are stable point
identities.  Trees built over a dataset store only indices into it, so a
single dataset can back several indexes at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

__all__ = [
    "Point",
    "DegenerateData",
    "Dataset",
    "Ball",
    "Node",
    "TreeStats",
    "BuildStats",
    "Tree",
    "as_point",
    "distance",
    "distances_to",
    "bounding_ball",
    "ball_intersects",
    "containment_tolerance",
    "iter_nodes",
]

# A point is simply a 1-D float64 coordinate vector.
Point = np.ndarray


class DegenerateData(Exception):
    """A point set has no usable spread.

    Raised when all points coincide, the covariance carries no signal, or a
    projection collapses to a single value.  Tree construction reacts by
    keeping the offending points together in a leaf instead of splitting.
    """


def as_point(coords) -> Point:
    """Coerce a coordinate sequence into a validated point."""
    p = np.asarray(coords, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ValueError(
            f"a point must be a non-empty 1-D coordinate vector, got shape {p.shape}"
        )
    if not np.isfinite(p).all():
        raise ValueError("point coordinates must be finite")
    return p


def distance(a: Point, b: Point) -> float:
    """Euclidean distance between two points of equal dimension."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    diff = a - b
    return float(np.sqrt((diff * diff).sum()))


def distances_to(points: np.ndarray, q: Point) -> np.ndarray:
    """Distances from every row of ``points`` to the query point ``q``.

    Leaf scans and the linear-scan oracles share this routine so that both
    sides of an exactness comparison see bit-identical floats.
    """
    diff = points - q
    return np.sqrt((diff * diff).sum(axis=1))


@dataclass(eq=False)
class Dataset:
    """Immutable (N, d) matrix of points; the row index is a point's identity.

    The coordinate array is copied on construction and marked read-only:
    indexes assume the corpus never changes underneath them, which also makes
    concurrent read access from multiple threads safe.
    """

    points: np.ndarray

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim != 2:
            raise ValueError(f"dataset must be a 2-D array, got shape {pts.shape}")
        if pts.shape[1] < 1:
            raise ValueError("dataset dimension must be at least 1")
        if pts.size and not np.isfinite(pts).all():
            raise ValueError("dataset coordinates must be finite")
        pts.flags.writeable = False
        self.points = pts

    @property
    def count(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.count


@dataclass(eq=False)
class Ball:
    """A closed hypersphere bounding the points of one tree node."""

    center: Point
    radius: float


def containment_tolerance(radius: float) -> float:
    """Slack allowed when checking that a ball contains its points."""
    return 1e-9 * (1.0 + radius)


def bounding_ball(points) -> Ball:
    """Ball centered at the centroid with radius reaching the farthest point.

    Not the minimal enclosing ball, but O(n*d), and containment is all the
    search pruning needs.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("bounding_ball requires a non-empty 2-D point array")
    center = pts.mean(axis=0)
    radius = float(distances_to(pts, center).max())
    return Ball(center, radius)


def ball_intersects(ball: Ball, q: Point, r: float) -> bool:
    """True when some point of the closed ball lies within ``r`` of ``q``."""
    return distance(ball.center, q) <= ball.radius + r


@dataclass(eq=False)
class Node:
    """One tree node: a bounding ball plus either children or leaf indices.

    ``point_indices`` is set exactly on leaves.  Leaves normally hold at most
    ``leaf_capacity`` points, except when a degenerate split (all points
    identical) stops the recursion early.
    """

    ball: Ball
    left: Optional["Node"] = None
    right: Optional["Node"] = None
    point_indices: Optional[np.ndarray] = None
    depth: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.point_indices is not None


@dataclass
class TreeStats:
    node_count: int
    leaf_count: int
    max_depth: int
    avg_depth: float


@dataclass
class BuildStats(TreeStats):
    build_time: float  # seconds


@dataclass(eq=False)
class Tree:
    """A built index: binary hierarchy of balls over one dataset.

    Immutable after construction; queries never mutate it, so any number of
    searches may run concurrently against the same tree.
    """

    root: Node
    dataset: Dataset
    splitter: str
    build_stats: BuildStats


def iter_nodes(root: Node) -> Iterator[Node]:
    """Yield every node reachable from ``root`` (pre-order, iterative)."""
    stack = [root]
    while stack:
        node = stack.pop()
        yield node
        if not node.is_leaf:
            stack.append(node.right)
            stack.append(node.left)
