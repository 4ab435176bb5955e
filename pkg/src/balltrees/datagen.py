"""Synthetic dataset generators, query workloads, and CSV ingestion.

All randomness flows through numpy's ``default_rng`` (PCG64) seeded with an
explicit 64-bit integer, so identical seeds reproduce identical datasets
bit-for-bit on any machine.  The Sobol generator is fully deterministic and
takes no seed at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import Dataset

__all__ = [
    "FAMILIES",
    "GenSpec",
    "CsvParseError",
    "gen_latin_center",
    "gen_highleyman",
    "gen_lithuanian",
    "gen_sobol",
    "gen_uniform_queries",
    "generate",
    "load_csv",
    "write_csv",
    "subsample",
    "bounds_of",
]

FAMILIES = ("latin_center", "highleyman", "lithuanian", "sobol", "csv")

SOBOL_MAX_DIM = 8
_SOBOL_BITS = 32


class CsvParseError(ValueError):
    """A CSV dataset file could not be parsed; the message names the row."""


@dataclass
class GenSpec:
    """Recipe for obtaining a dataset: a generator family or a CSV path."""

    family: str
    n: int = 0
    dim: int = 2
    seed: int = 0
    bounds: Optional[Sequence] = None
    path: Optional[str] = None  # csv family only

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}, expected one of {FAMILIES}")
        if self.family != "csv" and self.n < 1:
            raise ValueError("n must be at least 1")
        if self.family in ("highleyman", "lithuanian") and self.dim != 2:
            raise ValueError(f"{self.family} generates 2-D data only")
        if self.family == "csv" and not self.path:
            raise ValueError("csv family requires a path")


def gen_latin_center(n: int, dim: int, seed: int) -> Dataset:
    """Latin hypercube with points at cell centers.

    Coordinate j of point i is (perm_j(i) + 0.5)/n for an independent seeded
    permutation per axis, so every 1-D marginal hits each of the n equal
    bins exactly once.
    """
    if n < 1 or dim < 1:
        raise ValueError("n and dim must be at least 1")
    rng = np.random.default_rng(seed)
    cols = [(rng.permutation(n) + 0.5) / n for _ in range(dim)]
    return Dataset(np.column_stack(cols))


def gen_highleyman(n: int, seed: int) -> Dataset:
    """Two-class 2-D Gaussian mixture with strongly unequal class shapes.

    Class A ~ N((1, 1), diag(1, 0.25)); class B ~ N((2, 0), diag(0.01, 4)).
    The classic pattern-recognition parametrization: one nearly vertical
    needle of points next to a round blob, which skews naive splits.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    rng = np.random.default_rng(seed)
    n_a = (n + 1) // 2
    n_b = n - n_a
    a = rng.standard_normal((n_a, 2)) * np.array([1.0, 0.5]) + np.array([1.0, 1.0])
    b = rng.standard_normal((n_b, 2)) * np.array([0.1, 2.0]) + np.array([2.0, 0.0])
    return Dataset(np.vstack([a, b]))


def gen_lithuanian(n: int, seed: int) -> Dataset:
    """Two interleaving noisy 2-D arcs (the classic two-moons-like classes).

    Class A sits on a radius-5 half-circle around the origin; class B on the
    opposite half-circle shifted to (5, -2).  Both get isotropic unit
    Gaussian noise.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    rng = np.random.default_rng(seed)
    n_a = (n + 1) // 2
    n_b = n - n_a
    theta_a = rng.uniform(0.0, math.pi, n_a)
    a = 5.0 * np.column_stack([np.cos(theta_a), np.sin(theta_a)])
    a += rng.standard_normal((n_a, 2))
    theta_b = rng.uniform(0.0, math.pi, n_b)
    b = np.array([5.0, -2.0]) + 5.0 * np.column_stack(
        [np.cos(theta_b + math.pi), np.sin(theta_b + math.pi)]
    )
    b += rng.standard_normal((n_b, 2))
    return Dataset(np.vstack([a, b]))


# Primitive polynomial parameters for Sobol dimensions 2..8: degree, encoded
# interior coefficients, and initial odd direction values (standard
# Joe-Kuo table entries).
_SOBOL_DEGREE = (1, 2, 3, 3, 4, 4, 5)
_SOBOL_COEFF = (0, 1, 1, 2, 1, 4, 2)
_SOBOL_INIT = (
    (1,),
    (1, 3),
    (1, 3, 1),
    (1, 1, 1),
    (1, 1, 3, 3),
    (1, 3, 5, 13),
    (1, 1, 5, 5, 17),
)


def _sobol_direction_integers(dim_index: int) -> np.ndarray:
    """32-bit direction integers for one Sobol dimension (0-based index)."""
    v = np.zeros(_SOBOL_BITS, dtype=np.uint64)
    if dim_index == 0:
        for b in range(_SOBOL_BITS):
            v[b] = 1 << (_SOBOL_BITS - 1 - b)
        return v
    s = _SOBOL_DEGREE[dim_index - 1]
    a = _SOBOL_COEFF[dim_index - 1]
    m = list(_SOBOL_INIT[dim_index - 1])
    for k in range(s, _SOBOL_BITS):
        new = m[k - s] ^ (m[k - s] << s)
        for j in range(1, s):
            if (a >> (s - 1 - j)) & 1:
                new ^= m[k - j] << j
        m.append(new)
    for b in range(_SOBOL_BITS):
        v[b] = m[b] << (_SOBOL_BITS - 1 - b)
    return v


def gen_sobol(n: int, dim: int) -> Dataset:
    """First ``n`` points of the base-2 Sobol sequence in [0, 1)^dim.

    Gray-code ordering, so dimension 1 starts 0, 1/2, 3/4, 1/4, 3/8, 7/8.
    Deterministic and seedless; supports up to 8 dimensions.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 1 <= dim <= SOBOL_MAX_DIM:
        raise ValueError(f"sobol supports 1..{SOBOL_MAX_DIM} dimensions, got {dim}")
    index = np.arange(n, dtype=np.uint64)
    gray = index ^ (index >> np.uint64(1))
    out = np.empty((n, dim))
    n_bits = max(1, int(n - 1).bit_length())
    for j in range(dim):
        v = _sobol_direction_integers(j)
        acc = np.zeros(n, dtype=np.uint64)
        for b in range(min(n_bits, _SOBOL_BITS)):
            mask = (gray >> np.uint64(b)) & np.uint64(1)
            acc ^= v[b] * mask
        out[:, j] = acc / float(1 << _SOBOL_BITS)
    return Dataset(out)


def gen_uniform_queries(n: int, bounds, seed: int) -> Dataset:
    """``n`` i.i.d. uniform points in the axis-aligned box ``bounds``.

    ``bounds`` is a (d, 2) array of per-dimension [low, high]; use
    :func:`bounds_of` to derive it from a target dataset.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    box = np.asarray(bounds, dtype=np.float64)
    if box.ndim != 2 or box.shape[1] != 2:
        raise ValueError("bounds must be a (d, 2) array of [low, high] pairs")
    if not (box[:, 0] < box[:, 1]).all():
        raise ValueError("each bound must satisfy low < high")
    rng = np.random.default_rng(seed)
    return Dataset(rng.uniform(box[:, 0], box[:, 1], size=(n, box.shape[0])))


def bounds_of(dataset: Dataset) -> np.ndarray:
    """Per-dimension [min, max] of a dataset; zero-width dims get padded."""
    if dataset.count == 0:
        raise ValueError("cannot derive bounds from an empty dataset")
    lo = dataset.points.min(axis=0)
    hi = dataset.points.max(axis=0)
    flat = lo == hi
    lo = np.where(flat, lo - 0.5, lo)
    hi = np.where(flat, hi + 0.5, hi)
    return np.column_stack([lo, hi])


def generate(spec: GenSpec) -> Dataset:
    """Materialize a dataset from its recipe."""
    if spec.family == "latin_center":
        return gen_latin_center(spec.n, spec.dim, spec.seed)
    if spec.family == "highleyman":
        return gen_highleyman(spec.n, spec.seed)
    if spec.family == "lithuanian":
        return gen_lithuanian(spec.n, spec.seed)
    if spec.family == "sobol":
        return gen_sobol(spec.n, spec.dim)
    ds = load_csv(spec.path)
    if spec.n and spec.n < ds.count:
        ds = subsample(ds, spec.n, spec.seed)
    return ds


def load_csv(path, columns: Optional[Sequence[int]] = None, skip_header: bool = False) -> Dataset:
    """Read a comma-separated point file, one row per point.

    ``columns`` selects which 0-based columns to keep (e.g. to drop label
    columns).  Parse failures report the offending 1-based row number.
    """
    rows = []
    expected = None
    header_pending = skip_header
    try:
        handle = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise CsvParseError(f"cannot read {path}: {exc}") from exc
    with handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            if header_pending:
                header_pending = False
                continue
            cells = line.split(",")
            if expected is None:
                expected = len(cells)
            elif len(cells) != expected:
                raise CsvParseError(
                    f"{path}: row {lineno}: expected {expected} columns, found {len(cells)}"
                )
            if columns is not None:
                try:
                    cells = [cells[c] for c in columns]
                except IndexError:
                    raise CsvParseError(
                        f"{path}: row {lineno}: column selection {list(columns)} "
                        f"out of range for {len(cells)} columns"
                    ) from None
            try:
                rows.append([float(c) for c in cells])
            except ValueError:
                bad = next(c for c in cells if not _is_float(c))
                raise CsvParseError(
                    f"{path}: row {lineno}: could not parse {bad.strip()!r} as a number"
                ) from None
    if not rows:
        raise CsvParseError(f"{path}: no data rows")
    return Dataset(np.array(rows))


def _is_float(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def write_csv(dataset: Dataset, path) -> None:
    """Write a dataset in the same CSV format ``load_csv`` reads.

    Floats are written with shortest round-trip repr, so a write/read cycle
    reproduces the coordinates exactly.
    """
    with open(path, "w", encoding="utf-8") as handle:
        for row in dataset.points:
            handle.write(",".join(repr(v) for v in row.tolist()))
            handle.write("\n")


def subsample(dataset: Dataset, n: int, seed: int) -> Dataset:
    """Seeded without-replacement sample of ``n`` rows, original order kept."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if n >= dataset.count:
        return dataset
    rng = np.random.default_rng(seed)
    keep = np.sort(rng.choice(dataset.count, size=n, replace=False))
    return Dataset(dataset.points[keep])
