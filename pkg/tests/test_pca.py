import numpy as np
import pytest

from balltrees.core import DegenerateData
from balltrees.pca import covariance_matrix, principal_direction, project


def naive_covariance(pts):
    n, d = pts.shape
    mean = [sum(pts[i][j] for i in range(n)) / n for j in range(d)]
    cov = np.zeros((d, d))
    for a in range(d):
        for b in range(d):
            cov[a, b] = sum((pts[i][a] - mean[a]) * (pts[i][b] - mean[b]) for i in range(n)) / n
    return cov


def dominant_eigvec(m):
    vals, vecs = np.linalg.eigh(m)
    return vecs[:, -1]


class TestCovariance:
    def test_one_axis_spread(self):
        m = covariance_matrix(np.array([[0.0, 0.0], [2.0, 0.0]]))
        assert np.allclose(m, [[1.0, 0.0], [0.0, 0.0]])

    def test_identical_points_zero(self):
        m = covariance_matrix(np.tile([3.0, -1.0], (5, 1)))
        assert np.allclose(m, 0.0, atol=1e-15)

    def test_matches_double_loop_oracle(self):
        rng = np.random.default_rng(11)
        pts = rng.normal(size=(50, 3)) * 4
        assert np.allclose(covariance_matrix(pts), naive_covariance(pts), rtol=1e-12, atol=1e-12)

    def test_symmetric_psd(self):
        rng = np.random.default_rng(12)
        m = covariance_matrix(rng.normal(size=(30, 4)))
        assert np.array_equal(m, m.T)
        assert np.linalg.eigvalsh(m).min() >= -1e-12


class TestPrincipalDirection:
    def test_diagonal_line(self):
        t = np.array([-2.0, -1.0, 1.0, 2.0])
        pts = np.column_stack([t, t])
        w = principal_direction(pts)
        assert abs(abs(float(w @ np.array([1.0, 1.0]) / np.sqrt(2))) - 1.0) < 1e-9

    def test_antidiagonal_line_needs_perturbation(self):
        # the all-ones start is exactly orthogonal to this direction
        t = np.array([-2.0, -1.0, 1.0, 2.0])
        pts = np.column_stack([t, -t])
        w = principal_direction(pts)
        assert abs(abs(float(w @ np.array([1.0, -1.0]) / np.sqrt(2))) - 1.0) < 1e-9

    def test_axis_aligned_dominant_variance(self):
        pts = np.array([[2.0, 0.0], [-2.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        w = principal_direction(pts)
        assert abs(abs(float(w[0])) - 1.0) < 1e-9

    def test_unit_norm(self):
        rng = np.random.default_rng(13)
        w = principal_direction(rng.normal(size=(20, 5)))
        assert abs(float(w @ w) - 1.0) < 1e-9

    def test_identical_points_degenerate(self):
        with pytest.raises(DegenerateData):
            principal_direction(np.tile([1.0, 2.0, 3.0], (10, 1)))

    def test_against_dense_eigensolver(self):
        rng = np.random.default_rng(14)
        for _ in range(200):
            d = int(rng.integers(2, 7))
            n = int(rng.integers(d + 1, 60))
            scales = np.exp(rng.uniform(-1.0, 1.0, size=d))
            pts = rng.normal(size=(n, d)) * scales
            w = principal_direction(pts)
            ref = dominant_eigvec(covariance_matrix(pts))
            assert abs(float(w @ ref)) >= 1.0 - 1e-6

    def test_deterministic(self):
        rng = np.random.default_rng(15)
        pts = rng.normal(size=(25, 3))
        assert np.array_equal(principal_direction(pts), principal_direction(pts))

    def test_rayleigh_beats_every_axis(self):
        rng = np.random.default_rng(16)
        for _ in range(50):
            d = int(rng.integers(2, 6))
            pts = rng.normal(size=(30, d)) * np.exp(rng.uniform(-1, 1, size=d))
            m = covariance_matrix(pts)
            w = principal_direction(pts)
            along = float(w @ m @ w)
            slack = 1e-6 * float(np.trace(m))
            for j in range(d):
                assert along >= m[j, j] - slack


class TestProject:
    def test_coordinate_extraction(self):
        proj = project(np.array([[3.0, 9.0], [-1.0, 4.0]]), np.array([1.0, 0.0]))
        assert proj.values.tolist() == [3.0, -1.0]
        assert proj.t_min == -1.0 and proj.t_max == 3.0

    def test_singleton(self):
        v = np.array([0.6, 0.8])
        proj = project(np.array([[2.0, 1.0]]), v)
        assert proj.values[0] == pytest.approx(2.0 * 0.6 + 1.0 * 0.8)
        assert proj.t_min == proj.t_max == proj.values[0]

    def test_matches_naive_dot(self):
        rng = np.random.default_rng(17)
        pts = rng.normal(size=(30, 4))
        v = rng.normal(size=4)
        v /= np.linalg.norm(v)
        proj = project(pts, v)
        for i in range(30):
            manual = sum(pts[i][j] * v[j] for j in range(4))
            assert proj.values[i] == pytest.approx(manual, rel=1e-12, abs=1e-12)

    def test_range_envelope(self):
        rng = np.random.default_rng(18)
        proj = project(rng.normal(size=(40, 3)), np.array([1.0, 0.0, 0.0]))
        assert proj.t_min <= proj.values.min() and proj.t_max >= proj.values.max()

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            project(np.zeros((3, 2)), np.array([1.0, 0.0, 0.0]))
