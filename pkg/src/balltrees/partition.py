"""Node splitting strategies and recursive tree construction.

Three splitters are available:

* ``moore``  - farthest-point pivots: the point farthest from the node
  centroid and the point farthest from it become pivots, and every point
  joins the side of its closer pivot.
* ``pca``    - project points onto their first principal direction and cut
  at the threshold minimizing a weighted balance/evenness objective.
* ``kd``     - median cut on the coordinate with the largest spread
  (textbook KD baseline; its nodes still carry bounding balls so all three
  indexes share one search implementation).
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    Ball,
    BuildStats,
    Dataset,
    DegenerateData,
    Node,
    Tree,
    TreeStats,
    distances_to,
    iter_nodes,
)
from .pca import Projection, _direction_from_centered

__all__ = [
    "SPLITTERS",
    "F2_VARIANTS",
    "SplitConfig",
    "SplitOutcome",
    "split_moore",
    "choose_threshold",
    "split_pca",
    "split_kd",
    "build_tree",
    "tree_stats",
]

SPLITTERS = ("moore", "pca", "kd")
# f2 scores how evenly a threshold cuts the projected range: "midpoint" is
# the distance from the range center, "offset" the raw normalized offset from
# the low end (kept selectable for comparison runs).
F2_VARIANTS = ("midpoint", "offset")


@dataclass
class SplitConfig:
    """Knobs for tree construction.

    ``alpha`` trades child balance against geometric evenness in the pca
    splitter's objective; ``sections`` is how many candidate thresholds are
    scanned per split.
    """

    splitter: str = "pca"
    alpha: float = 0.5
    sections: int = 32
    leaf_capacity: int = 1
    f2_variant: str = "midpoint"

    def __post_init__(self) -> None:
        if self.splitter not in SPLITTERS:
            raise ValueError(f"unknown splitter {self.splitter!r}, expected one of {SPLITTERS}")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.sections < 1:
            raise ValueError("sections must be at least 1")
        if self.leaf_capacity < 1:
            raise ValueError("leaf_capacity must be at least 1")
        if self.f2_variant not in F2_VARIANTS:
            raise ValueError(f"unknown f2 variant {self.f2_variant!r}, expected one of {F2_VARIANTS}")


@dataclass
class SplitOutcome:
    """Disjoint, nonempty partition of an index set into two sides."""

    left_indices: np.ndarray
    right_indices: np.ndarray
    threshold: Optional[float] = None  # pca only
    pivots: Optional[tuple] = None  # moore only


def _as_indices(indices) -> np.ndarray:
    idx = np.asarray(indices, dtype=np.intp)
    if idx.ndim != 1:
        raise ValueError("indices must be a 1-D sequence")
    return idx


def _moore_sides(pts: np.ndarray, dists_to_centroid: Optional[np.ndarray] = None):
    """Left-side mask plus pivot positions for the farthest-point split.

    Ties: argmax picks the first (lowest) position, and points equidistant
    from both pivots go left, so the split is deterministic.
    """
    if dists_to_centroid is None:
        dists_to_centroid = distances_to(pts, pts.mean(axis=0))
    i_left = int(np.argmax(dists_to_centroid))
    d_left = distances_to(pts, pts[i_left])
    i_right = int(np.argmax(d_left))
    if d_left[i_right] == 0.0:
        raise DegenerateData("all points coincide; no farthest pair")
    d_right = distances_to(pts, pts[i_right])
    return d_left <= d_right, i_left, i_right


def split_moore(dataset: Dataset, indices) -> SplitOutcome:
    idx = _as_indices(indices)
    if idx.shape[0] < 2:
        raise ValueError("need at least 2 points to split")
    pts = dataset.points[idx]
    left_mask, i_left, i_right = _moore_sides(pts)
    return SplitOutcome(
        left_indices=idx[left_mask],
        right_indices=idx[~left_mask],
        pivots=(pts[i_left].copy(), pts[i_right].copy()),
    )


def choose_threshold(proj: Projection, alpha: float, sections: int, f2_variant: str = "midpoint") -> float:
    """Pick the cut value minimizing F = |N2-N1|/N + alpha * f2.

    Candidates are the midpoints of ``sections`` equal slices of
    [t_min, t_max]; N1 counts values strictly below a candidate.  Ties on F
    go to the candidate closest to the median value, then to the smaller
    candidate.
    """
    values = np.asarray(proj.values, dtype=np.float64)
    n = values.shape[0]
    if n < 2:
        raise ValueError("need at least 2 projected values")
    if sections < 1:
        raise ValueError("sections must be at least 1")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if f2_variant not in F2_VARIANTS:
        raise ValueError(f"unknown f2 variant {f2_variant!r}")
    t_min, t_max = proj.t_min, proj.t_max
    if not t_max > t_min:
        raise DegenerateData("projection range collapsed to a single value")

    width = t_max - t_min
    candidates = t_min + (np.arange(sections) + 0.5) * (width / sections)
    ordered = np.sort(values)
    n_below = np.searchsorted(ordered, candidates, side="left")
    f1 = np.abs(n - 2 * n_below) / n
    if f2_variant == "offset":
        f2 = (candidates - t_min) / width
    else:
        f2 = np.abs(candidates - (t_min + t_max) * 0.5) / width
    score = f1 + alpha * f2

    if n % 2:
        median = ordered[n // 2]
    else:
        median = (ordered[n // 2 - 1] + ordered[n // 2]) * 0.5
    # lexsort: last key is primary.
    best = np.lexsort((candidates, np.abs(candidates - median), score))[0]
    return float(candidates[best])


def _pca_sides(pts: np.ndarray, centered: np.ndarray, config: SplitConfig):
    direction = _direction_from_centered(pts, centered)
    values = pts @ direction
    proj = Projection(values, float(values.min()), float(values.max()))
    threshold = choose_threshold(proj, config.alpha, config.sections, config.f2_variant)
    left_mask = values >= threshold
    if left_mask.all() or not left_mask.any():
        # Candidate rounded onto the range edge; only possible when the
        # projected spread is at float noise level.
        raise DegenerateData("projection too narrow to separate")
    return left_mask, threshold


def split_pca(dataset: Dataset, indices, config: SplitConfig) -> SplitOutcome:
    idx = _as_indices(indices)
    if idx.shape[0] < 2:
        raise ValueError("need at least 2 points to split")
    pts = dataset.points[idx]
    centered = pts - pts.mean(axis=0)
    left_mask, threshold = _pca_sides(pts, centered, config)
    return SplitOutcome(
        left_indices=idx[left_mask],
        right_indices=idx[~left_mask],
        threshold=threshold,
    )


def _kd_sides(pts: np.ndarray):
    spread = pts.max(axis=0) - pts.min(axis=0)
    if float(spread.max()) == 0.0:
        raise DegenerateData("all points coincide; no spread on any axis")
    dim = int(np.argmax(spread))
    column = pts[:, dim]
    order = np.argsort(column, kind="stable")
    mid = pts.shape[0] // 2
    pivot_value = column[order[mid]]
    left_mask = column < pivot_value
    if not left_mask.any():
        # Duplicates fill the low half; fall back to a positional cut at the
        # median rank so both sides stay nonempty.
        left_mask = np.zeros(pts.shape[0], dtype=bool)
        left_mask[order[:mid]] = True
    return left_mask


def split_kd(dataset: Dataset, indices) -> SplitOutcome:
    idx = _as_indices(indices)
    if idx.shape[0] < 2:
        raise ValueError("need at least 2 points to split")
    left_mask = _kd_sides(dataset.points[idx])
    return SplitOutcome(left_indices=idx[left_mask], right_indices=idx[~left_mask])


def build_tree(dataset: Dataset, config: SplitConfig) -> Tree:
    """Recursively partition the dataset into a tree of bounding balls.

    Index sets larger than ``leaf_capacity`` are split with the configured
    strategy; a degenerate split ends the recursion in a leaf regardless of
    capacity.  Uses an explicit stack, so adversarially deep trees cannot
    overflow Python's recursion limit.
    """
    if dataset.count < 1:
        raise ValueError("cannot build a tree over an empty dataset")
    started = time.perf_counter()
    points = dataset.points
    splitter = config.splitter
    capacity = config.leaf_capacity

    node_count = 0
    leaf_count = 0
    leaf_depth_total = 0
    max_depth = 0

    # Work stack holds build frames and join markers; finished subtrees pile
    # up on `done` until their parent's join marker consumes them.
    stack: list = [(np.arange(dataset.count, dtype=np.intp), 0)]
    done: list = []
    while stack:
        frame = stack.pop()
        if frame[0] is None:
            _, ball, depth = frame
            right = done.pop()
            left = done.pop()
            done.append(Node(ball=ball, left=left, right=right, depth=depth))
            node_count += 1
            continue

        indices, depth = frame
        pts = points[indices]
        centroid = pts.mean(axis=0)
        centered = pts - centroid
        radii = np.sqrt((centered * centered).sum(axis=1))
        ball = Ball(centroid, float(radii.max()) if radii.size else 0.0)

        left_idx = None
        if indices.shape[0] > capacity:
            try:
                if splitter == "pca":
                    left_mask, _ = _pca_sides(pts, centered, config)
                elif splitter == "moore":
                    left_mask, _, _ = _moore_sides(pts, radii)
                else:
                    left_mask = _kd_sides(pts)
                left_idx = indices[left_mask]
                right_idx = indices[~left_mask]
            except DegenerateData:
                left_idx = None

        if left_idx is None:
            done.append(Node(ball=ball, point_indices=indices, depth=depth))
            node_count += 1
            leaf_count += 1
            leaf_depth_total += depth
            if depth > max_depth:
                max_depth = depth
        else:
            stack.append((None, ball, depth))
            stack.append((right_idx, depth + 1))
            stack.append((left_idx, depth + 1))

    root = done.pop()
    stats = BuildStats(
        node_count=node_count,
        leaf_count=leaf_count,
        max_depth=max_depth,
        avg_depth=leaf_depth_total / leaf_count,
        build_time=time.perf_counter() - started,
    )
    return Tree(root=root, dataset=dataset, splitter=splitter, build_stats=stats)


def tree_stats(tree: Tree) -> TreeStats:
    """Recount nodes, leaves and depths by walking the tree."""
    node_count = 0
    leaf_count = 0
    leaf_depth_total = 0
    max_depth = 0
    for node in iter_nodes(tree.root):
        node_count += 1
        if node.is_leaf:
            leaf_count += 1
            leaf_depth_total += node.depth
            if node.depth > max_depth:
                max_depth = node.depth
    return TreeStats(
        node_count=node_count,
        leaf_count=leaf_count,
        max_depth=max_depth,
        avg_depth=leaf_depth_total / leaf_count,
    )
