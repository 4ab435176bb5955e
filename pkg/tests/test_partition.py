import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import balltrees.partition as partition
from balltrees.core import Dataset, DegenerateData, distances_to, iter_nodes
from balltrees.partition import (
    SplitConfig,
    build_tree,
    choose_threshold,
    split_kd,
    split_moore,
    split_pca,
    tree_stats,
)
from balltrees.pca import Projection


def make_dataset(rows):
    return Dataset(np.asarray(rows, dtype=float))


def all_indices(n):
    return np.arange(n)


class TestSplitMoore:
    def test_collinear_hand_simulation(self):
        # centroid of {0,1,2,9} is 3; farthest is 9, then 0 is farthest from 9
        ds = make_dataset([[0.0], [1.0], [2.0], [9.0]])
        out = split_moore(ds, all_indices(4))
        assert sorted(out.left_indices.tolist()) == [3]
        assert sorted(out.right_indices.tolist()) == [0, 1, 2]
        assert out.pivots[0][0] == 9.0 and out.pivots[1][0] == 0.0

    def test_two_points(self):
        ds = make_dataset([[0.0, 0.0], [1.0, 1.0]])
        out = split_moore(ds, all_indices(2))
        assert len(out.left_indices) == 1 and len(out.right_indices) == 1

    def test_sides_follow_closer_pivot(self):
        rng = np.random.default_rng(21)
        ds = Dataset(rng.normal(size=(60, 2)))
        out = split_moore(ds, all_indices(60))
        left_pivot, right_pivot = out.pivots
        for i in out.left_indices:
            p = ds.points[i]
            assert distances_to(p[None], left_pivot)[0] <= distances_to(p[None], right_pivot)[0]
        for i in out.right_indices:
            p = ds.points[i]
            assert distances_to(p[None], right_pivot)[0] < distances_to(p[None], left_pivot)[0]

    def test_equidistant_point_goes_left(self):
        # pivots become (4,0) and (0,0); (2,1) is exactly equidistant
        ds = make_dataset([[0.0, 0.0], [4.0, 0.0], [2.0, 1.0]])
        out = split_moore(ds, all_indices(3))
        assert 2 in out.left_indices.tolist()

    def test_identical_points_degenerate(self):
        ds = make_dataset([[1.0, 1.0]] * 4)
        with pytest.raises(DegenerateData):
            split_moore(ds, all_indices(4))


class TestChooseThreshold:
    def test_four_values_balanced(self):
        proj = Projection(np.array([1.0, 2.0, 3.0, 4.0]), 1.0, 4.0)
        t_c = choose_threshold(proj, alpha=0.0, sections=4)
        assert 2.0 < t_c < 3.0
        # both middle candidates split 2/2; the tie resolves to the smaller
        assert t_c == pytest.approx(2.125)

    def test_even_split_when_available(self):
        values = np.array([-3.0, -1.0, 1.0, 3.0])
        proj = Projection(values, -3.0, 3.0)
        t_c = choose_threshold(proj, alpha=0.0, sections=8)
        n1 = int((values < t_c).sum())
        assert abs((len(values) - n1) - n1) == 0

    @pytest.mark.parametrize("variant", ["midpoint", "offset"])
    def test_duplicate_mass_matches_bruteforce(self, variant):
        values = np.array([0.0] * 9 + [10.0])
        proj = Projection(values, 0.0, 10.0)
        got = choose_threshold(proj, alpha=1.0, sections=8, f2_variant=variant)
        # exhaustive candidate evaluation
        width = 10.0
        best = None
        for s in range(8):
            cand = 0.0 + (s + 0.5) * (width / 8)
            n1 = int((values < cand).sum())
            f1 = abs(len(values) - 2 * n1) / len(values)
            f2 = (cand - 0.0) / width if variant == "offset" else abs(cand - 5.0) / width
            score = f1 + 1.0 * f2
            if best is None or score < best[0]:
                best = (score, cand)
        assert got == pytest.approx(best[1])

    def test_collapsed_projection_degenerate(self):
        with pytest.raises(DegenerateData):
            choose_threshold(Projection(np.array([2.0, 2.0]), 2.0, 2.0), 0.0, 4)

    @given(st.integers(0, 2**32 - 1), st.integers(1, 64), st.floats(0.0, 2.0))
    @settings(max_examples=120, deadline=None)
    def test_returns_argmin_over_candidates(self, seed, sections, alpha):
        rng = np.random.default_rng(seed)
        values = rng.normal(size=int(rng.integers(2, 40)))
        if values.max() == values.min():
            return
        proj = Projection(values, float(values.min()), float(values.max()))
        t_c = choose_threshold(proj, alpha=alpha, sections=sections)
        width = proj.t_max - proj.t_min
        candidates = proj.t_min + (np.arange(sections) + 0.5) * (width / sections)
        assert any(t_c == c for c in candidates)

        def score(c):
            n1 = int((values < c).sum())
            f1 = abs(len(values) - 2 * n1) / len(values)
            return f1 + alpha * abs(c - (proj.t_min + proj.t_max) / 2) / width

        best = min(score(c) for c in candidates)
        assert score(t_c) <= best + 1e-12


class TestSplitPca:
    def test_symmetric_diagonal_line(self):
        t = np.array([-2.0, -1.0, 1.0, 2.0])
        ds = Dataset(np.column_stack([t, t]) / np.sqrt(2))
        out = split_pca(ds, all_indices(4), SplitConfig(splitter="pca", alpha=0.0))
        assert {len(out.left_indices), len(out.right_indices)} == {2}
        assert -1.0 < out.threshold < 1.0

    def test_membership_consistent_with_projection(self):
        rng = np.random.default_rng(22)
        ds = Dataset(rng.normal(size=(200, 2)))
        config = SplitConfig(splitter="pca", alpha=0.0, sections=32)
        out = split_pca(ds, all_indices(200), config)
        # recover the direction deterministically and re-check every side
        from balltrees.pca import principal_direction

        w = principal_direction(ds.points)
        t = ds.points @ w
        for i in out.left_indices:
            assert t[i] >= out.threshold
        for i in out.right_indices:
            assert t[i] < out.threshold

    def test_more_balanced_than_moore_on_skewed_cloud(self):
        # elongated cloud plus a far outlier pair drags the moore pivots
        rng = np.random.default_rng(23)
        cloud = rng.normal(size=(400, 2)) * np.array([10.0, 1.0])
        outliers = np.array([[120.0, 40.0], [125.0, 42.0]])
        ds = Dataset(np.vstack([cloud, outliers]))
        idx = all_indices(402)
        pca_out = split_pca(ds, idx, SplitConfig(splitter="pca", alpha=0.0))
        moore_out = split_moore(ds, idx)
        pca_gap = abs(len(pca_out.left_indices) - len(pca_out.right_indices))
        moore_gap = abs(len(moore_out.left_indices) - len(moore_out.right_indices))
        assert pca_gap < moore_gap

    def test_sign_of_direction_is_immaterial(self, monkeypatch):
        rng = np.random.default_rng(24)
        ds = Dataset(rng.normal(size=(50, 3)))
        config = SplitConfig(splitter="pca")
        out_plus = split_pca(ds, all_indices(50), config)

        from balltrees import pca as pca_module

        original = pca_module._direction_from_centered
        monkeypatch.setattr(
            partition, "_direction_from_centered", lambda p, c: -original(p, c)
        )
        out_minus = split_pca(ds, all_indices(50), config)
        plus = {frozenset(out_plus.left_indices.tolist()), frozenset(out_plus.right_indices.tolist())}
        minus = {frozenset(out_minus.left_indices.tolist()), frozenset(out_minus.right_indices.tolist())}
        assert plus == minus

    def test_identical_points_degenerate(self):
        ds = make_dataset([[2.0, 2.0]] * 6)
        with pytest.raises(DegenerateData):
            split_pca(ds, all_indices(6), SplitConfig(splitter="pca"))


class TestSplitKd:
    def test_uniform_line(self):
        ds = make_dataset([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]])
        out = split_kd(ds, all_indices(4))
        assert sorted(out.left_indices.tolist()) == [0, 1]
        assert sorted(out.right_indices.tolist()) == [2, 3]

    def test_picks_widest_dimension(self):
        ds = make_dataset([[0.0, 0.0], [0.0, 5.0]])
        out = split_kd(ds, all_indices(2))
        assert ds.points[out.left_indices[0], 1] == 0.0
        assert ds.points[out.right_indices[0], 1] == 5.0

    def test_duplicates_still_split(self):
        ds = make_dataset([[1.0], [1.0], [1.0], [5.0]])
        out = split_kd(ds, all_indices(4))
        assert len(out.left_indices) > 0 and len(out.right_indices) > 0

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_distinct_coordinates_halve(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 50))
        d = int(rng.integers(1, 4))
        ds = Dataset(rng.normal(size=(n, d)))
        out = split_kd(ds, all_indices(n))
        assert abs(len(out.left_indices) - len(out.right_indices)) <= 1
        # sort-based oracle: the left side is exactly the low half of the
        # widest coordinate
        spread = ds.points.max(axis=0) - ds.points.min(axis=0)
        dim = int(np.argmax(spread))
        order = np.argsort(ds.points[:, dim], kind="stable")
        assert sorted(out.left_indices.tolist()) == sorted(order[: n // 2].tolist())

    def test_identical_points_degenerate(self):
        ds = make_dataset([[3.0, 3.0]] * 5)
        with pytest.raises(DegenerateData):
            split_kd(ds, all_indices(5))


class TestBuildTree:
    def test_single_point(self):
        tree = build_tree(make_dataset([[1.0, 2.0]]), SplitConfig(splitter="pca"))
        assert tree.root.is_leaf
        assert tree.build_stats.avg_depth == 0.0
        assert tree.build_stats.node_count == 1

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError):
            build_tree(Dataset(np.empty((0, 2))), SplitConfig(splitter="kd"))

    def test_power_of_two_kd_is_perfectly_balanced(self):
        rng = np.random.default_rng(25)
        k = 6
        ds = Dataset(rng.normal(size=(2**k, 3)))
        tree = build_tree(ds, SplitConfig(splitter="kd", leaf_capacity=1))
        stats = tree_stats(tree)
        assert stats.avg_depth == k
        assert stats.max_depth == k
        assert stats.leaf_count == 2**k

    @pytest.mark.parametrize("splitter", ["moore", "pca", "kd"])
    def test_partition_integrity_and_containment(self, splitter):
        rng = np.random.default_rng(26)
        ds = Dataset(rng.normal(size=(300, 3)))
        tree = build_tree(ds, SplitConfig(splitter=splitter, leaf_capacity=3))

        def leaf_set(node):
            if node.is_leaf:
                return set(node.point_indices.tolist())
            left = leaf_set(node.left)
            right = leaf_set(node.right)
            assert not (left & right)
            assert node.left.depth == node.depth + 1
            assert node.right.depth == node.depth + 1
            return left | right

        assert leaf_set(tree.root) == set(range(300))
        for node in iter_nodes(tree.root):
            indices = (
                node.point_indices
                if node.is_leaf
                else np.array(sorted(leaf_set(node)))
            )
            dists = distances_to(ds.points[indices], node.ball.center)
            assert (dists <= node.ball.radius + 1e-9 * (1 + node.ball.radius)).all()

    @pytest.mark.parametrize("splitter", ["moore", "pca", "kd"])
    def test_deterministic_structure(self, splitter):
        rng = np.random.default_rng(27)
        pts = rng.normal(size=(200, 2))
        config = SplitConfig(splitter=splitter, leaf_capacity=2)
        shape_a = structure_signature(build_tree(Dataset(pts), config))
        shape_b = structure_signature(build_tree(Dataset(pts), config))
        assert shape_a == shape_b

    def test_identical_points_become_one_leaf(self):
        ds = make_dataset([[1.0, 1.0]] * 9)
        tree = build_tree(ds, SplitConfig(splitter="pca", leaf_capacity=1))
        assert tree.root.is_leaf
        assert len(tree.root.point_indices) == 9

    def test_leaf_capacity_respected_for_splittable_data(self):
        rng = np.random.default_rng(28)
        ds = Dataset(rng.normal(size=(250, 2)))
        for splitter in ["moore", "pca", "kd"]:
            tree = build_tree(ds, SplitConfig(splitter=splitter, leaf_capacity=4))
            for node in iter_nodes(tree.root):
                if node.is_leaf:
                    assert len(node.point_indices) <= 4

    def test_skewed_cloud_depth_ordering(self):
        # anisotropic gaussian with a sprinkle of far outliers: pivot splits
        # chase the outliers while the projection split stays balanced
        rng = np.random.default_rng(29)
        n = 2**14
        cloud = rng.normal(size=(n - n // 100, 2)) * np.array([5.0, 1.0])
        outliers = rng.uniform(50, 100, size=(n // 100, 2))
        ds = Dataset(np.vstack([cloud, outliers]))
        pca_tree = build_tree(ds, SplitConfig(splitter="pca", leaf_capacity=1))
        moore_tree = build_tree(ds, SplitConfig(splitter="moore", leaf_capacity=1))
        assert pca_tree.build_stats.avg_depth <= moore_tree.build_stats.avg_depth


def structure_signature(tree):
    sig = []
    for node in iter_nodes(tree.root):
        sig.append(
            (
                node.depth,
                node.is_leaf,
                tuple(node.point_indices.tolist()) if node.is_leaf else None,
                tuple(node.ball.center.tolist()),
                node.ball.radius,
            )
        )
    return sig


class TestTreeStats:
    def test_single_leaf(self):
        tree = build_tree(make_dataset([[0.0]]), SplitConfig(splitter="kd"))
        stats = tree_stats(tree)
        assert stats.avg_depth == 0.0 and stats.node_count == 1 and stats.leaf_count == 1

    def test_complete_depth_three_tree(self):
        # 8 collinear points with gaps that the kd median always halves
        ds = make_dataset([[v] for v in [0.0, 1.0, 4.0, 5.0, 16.0, 17.0, 20.0, 21.0]])
        tree = build_tree(ds, SplitConfig(splitter="kd", leaf_capacity=1))
        stats = tree_stats(tree)
        assert stats.avg_depth == 3.0
        assert stats.leaf_count == 8
        assert stats.node_count == 15
        assert stats.max_depth == 3

    @pytest.mark.parametrize("splitter", ["moore", "pca", "kd"])
    def test_binary_tree_identity(self, splitter):
        rng = np.random.default_rng(30)
        ds = Dataset(rng.normal(size=(123, 2)))
        tree = build_tree(ds, SplitConfig(splitter=splitter, leaf_capacity=2))
        stats = tree_stats(tree)
        internal = stats.node_count - stats.leaf_count
        assert stats.leaf_count == internal + 1

    def test_matches_build_stats(self):
        rng = np.random.default_rng(31)
        ds = Dataset(rng.normal(size=(200, 3)))
        tree = build_tree(ds, SplitConfig(splitter="pca", leaf_capacity=2))
        stats = tree_stats(tree)
        assert stats.avg_depth == tree.build_stats.avg_depth
        assert stats.node_count == tree.build_stats.node_count
        assert stats.leaf_count == tree.build_stats.leaf_count
        assert stats.max_depth == tree.build_stats.max_depth


class TestSplitConfig:
    def test_rejects_unknown_splitter(self):
        with pytest.raises(ValueError):
            SplitConfig(splitter="quad")

    def test_rejects_bad_knobs(self):
        with pytest.raises(ValueError):
            SplitConfig(splitter="pca", alpha=-0.1)
        with pytest.raises(ValueError):
            SplitConfig(splitter="pca", sections=0)
        with pytest.raises(ValueError):
            SplitConfig(splitter="pca", leaf_capacity=0)
        with pytest.raises(ValueError):
            SplitConfig(splitter="pca", f2_variant="nope")
