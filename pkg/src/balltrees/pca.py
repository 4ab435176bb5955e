"""First principal direction of a point set and 1-D projection onto it.

Only the dominant direction is ever needed here; it is extracted by power
iteration on the tiny d x d covariance matrix, which keeps one split at
O(n * d^2) and avoids pulling in a dense eigensolver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DegenerateData

__all__ = ["Projection", "covariance_matrix", "principal_direction", "project"]

POWER_MAX_ITER = 1000
POWER_COS_TOL = 1e-10
# Covariance traces below this relative level are indistinguishable from the
# float64 noise of mean-centering identical points.
_DEGENERATE_TRACE_REL = 1e-24


@dataclass
class Projection:
    """Scalar coordinates of points along one direction, with their range."""

    values: np.ndarray
    t_min: float
    t_max: float


def covariance_matrix(points) -> np.ndarray:
    """Mean-centered sample covariance, normalized by 1/n."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("covariance_matrix requires a non-empty 2-D point array")
    centered = pts - pts.mean(axis=0)
    return _covariance_from_centered(centered)


def _covariance_from_centered(centered: np.ndarray) -> np.ndarray:
    m = centered.T @ centered / centered.shape[0]
    # BLAS can leave last-ulp asymmetry; symmetrize so the matrix is exact.
    return (m + m.T) * 0.5


def principal_direction(points) -> np.ndarray:
    """Unit vector maximizing projected variance, up to sign.

    Deterministic for a fixed input: iteration always starts from the
    normalized all-ones vector.  Raises :class:`DegenerateData` when the
    covariance carries no signal (all points identical).
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("principal_direction requires a non-empty 2-D point array")
    centered = pts - pts.mean(axis=0)
    return _direction_from_centered(pts, centered)


def _direction_from_centered(pts: np.ndarray, centered: np.ndarray) -> np.ndarray:
    m = _covariance_from_centered(centered)
    sq_scale = float((pts * pts).sum() / pts.shape[0])
    if float(np.trace(m)) <= _DEGENERATE_TRACE_REL * (1.0 + sq_scale):
        raise DegenerateData("zero covariance: all points coincide")
    if m.shape[0] == 1:
        return np.ones(1)
    if m.shape[0] == 2:
        return _dominant_direction_2d(m)
    return _dominant_direction(m)


def _dominant_direction_2d(m: np.ndarray) -> np.ndarray:
    # Scalar specialization of _dominant_direction: 2-D splits dominate tree
    # construction time and per-call numpy overhead would swamp the matvec.
    a = float(m[0, 0])
    b = float(m[0, 1])
    c = float(m[1, 1])
    vx = vy = 1.0 / math.sqrt(2.0)
    perturbed = False
    for _ in range(POWER_MAX_ITER):
        wx = a * vx + b * vy
        wy = b * vx + c * vy
        norm = math.sqrt(wx * wx + wy * wy)
        if norm < 1e-300:
            if perturbed:
                break
            # Start vector sits in the nullspace (e.g. points exactly on the
            # line y = -x); nudge it off and continue.
            perturbed = True
            vx += 1e-3
            scale = 1.0 / math.sqrt(vx * vx + vy * vy)
            vx *= scale
            vy *= scale
            continue
        wx /= norm
        wy /= norm
        cos = abs(wx * vx + wy * vy)
        vx, vy = wx, wy
        if cos >= 1.0 - POWER_COS_TOL:
            break
    # Iterating can halt on *any* eigenvector: a start aligned with the minor
    # axis converges instantly to it and the movement test cannot tell.  In
    # 2-D the orthogonal complement is one direction, so dominance is a
    # single Rayleigh-quotient comparison away.
    along = a * vx * vx + 2.0 * b * vx * vy + c * vy * vy
    across = a * vy * vy - 2.0 * b * vx * vy + c * vx * vx
    if across > along:
        return np.array([-vy, vx])
    return np.array([vx, vy])


def _power_iterate(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    perturbed = False
    for _ in range(POWER_MAX_ITER):
        w = m @ v
        norm = math.sqrt(float(w @ w))
        if norm < 1e-300:
            if perturbed:
                break
            perturbed = True
            v = v.copy()
            v[0] += 1e-3
            v /= math.sqrt(float(v @ v))
            continue
        w /= norm
        cos = abs(float(w @ v))
        v = w
        if cos >= 1.0 - POWER_COS_TOL:
            break
    return v


def _dominant_direction(m: np.ndarray) -> np.ndarray:
    d = m.shape[0]
    start = np.full(d, 1.0 / math.sqrt(d))
    first = _power_iterate(m, start)
    # Guard against convergence onto a non-dominant eigenvector when the
    # start happens to be orthogonal to the leading one: rerun from a
    # perturbed start and keep the direction with more variance.
    nudged = start.copy()
    nudged[0] += 1e-3
    nudged /= math.sqrt(float(nudged @ nudged))
    second = _power_iterate(m, nudged)
    if float(second @ m @ second) > float(first @ m @ first):
        return second
    return first


def project(points, direction: np.ndarray) -> Projection:
    """Dot every point with ``direction`` and record the value range."""
    pts = np.asarray(points, dtype=np.float64)
    direction = np.asarray(direction, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("project requires a non-empty 2-D point array")
    if pts.shape[1] != direction.shape[0]:
        raise ValueError(
            f"dimension mismatch: points are {pts.shape[1]}-D, direction is {direction.shape[0]}-D"
        )
    values = pts @ direction
    return Projection(values, float(values.min()), float(values.max()))
