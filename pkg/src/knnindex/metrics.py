"""Point representations and exact distance functions.

Coordinates are stored as integers scaled by a common factor ``scale`` so
that half-integer (or any rational) constructions compare exactly.  Bit
points use ``scale == 1``; dense constructions default to ``scale == 2``.
The l2 metric works on squared distances throughout.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

import numpy as np

METRICS = ("hamming", "l1", "l2", "linf")


class MetricError(ValueError):
    pass


def check_metric(metric: str) -> str:
    if metric not in METRICS:
        raise MetricError(f"unknown metric {metric!r}; expected one of {METRICS}")
    return metric


@dataclass(frozen=True, eq=False)
class PointSet:
    """``n`` points in ``d`` dimensions.

    ``coords[i]`` is the point with identifier ``i + 1``; real coordinates
    are ``coords / scale``.  ``bits`` marks a Hamming-cube point set.
    """

    coords: np.ndarray
    scale: int = 1
    bits: bool = False

    def __post_init__(self):
        c = np.asarray(self.coords)
        if c.ndim != 2 or c.shape[0] < 1:
            raise ValueError("coords must be a non-empty (n, d) array")
        if not np.issubdtype(c.dtype, np.integer) and c.dtype != bool:
            raise TypeError("coords must be integer-valued (scaled)")
        c = c.astype(np.int64)
        if self.bits:
            if self.scale != 1:
                raise ValueError("bit point sets have scale 1")
            if not np.all((c == 0) | (c == 1)):
                raise ValueError("bit point set contains non-binary entries")
        if self.scale < 1:
            raise ValueError("scale must be a positive integer")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def d(self) -> int:
        return self.coords.shape[1]

    @property
    def ids(self) -> np.ndarray:
        return np.arange(1, self.n + 1)

    def point(self, ident: int) -> np.ndarray:
        return self.coords[ident - 1]

    def as_point(self, x) -> np.ndarray:
        """Validate a query point against this set's dimension and representation."""
        x = np.asarray(x)
        if x.shape != (self.d,):
            raise MetricError(f"dimension mismatch: expected {self.d}, got {x.shape}")
        x = x.astype(np.int64)
        if self.bits and not np.all((x == 0) | (x == 1)):
            raise MetricError("query is not a bit vector")
        return x


def bit_points(rows) -> PointSet:
    return PointSet(np.asarray(rows, dtype=np.int64), scale=1, bits=True)


def dense_points(rows, scale: int = 2) -> PointSet:
    """Build a dense point set from already-scaled integer rows."""
    return PointSet(np.asarray(rows, dtype=np.int64), scale=scale, bits=False)


def from_rationals(rows: Sequence[Sequence], bits: bool = False) -> PointSet:
    """Build a point set from exact rational coordinates, picking the smallest scale."""
    fr = [[Fraction(v) for v in row] for row in rows]
    if bits:
        return bit_points([[int(v) for v in row] for row in fr])
    scale = lcm(*(v.denominator for row in fr for v in row)) if fr and fr[0] else 1
    coords = [[int(v * scale) for v in row] for row in fr]
    return dense_points(coords, scale=scale)


def rescale(P: PointSet, scale: int) -> PointSet:
    if P.bits:
        if scale != 1:
            raise ValueError("bit point sets cannot be rescaled")
        return P
    if scale % P.scale:
        raise ValueError(f"scale {scale} is not a multiple of {P.scale}")
    return dense_points(P.coords * (scale // P.scale), scale=scale)


def _pair_check(a, b, metric):
    check_metric(metric)
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.shape[-1] != b.shape[-1]:
        raise MetricError(f"dimension mismatch: {a.shape[-1]} vs {b.shape[-1]}")
    if metric == "hamming":
        for v in (a, b):
            if not np.all((v == 0) | (v == 1)):
                raise MetricError("hamming distance requires bit vectors")
    return a, b


def distance(a, b, metric: str) -> int:
    """Exact distance in scaled units (l2: squared scaled units)."""
    a, b = _pair_check(a, b, metric)
    if a.ndim != 1 or b.ndim != 1:
        raise MetricError("distance expects two single points")
    return int(distances(a[None, :], b, metric)[0])


def distances(X: np.ndarray, q: np.ndarray, metric: str) -> np.ndarray:
    """Distances from every row of ``X`` to ``q`` (same units as :func:`distance`)."""
    X, q = _pair_check(X, q, metric)
    diff = np.abs(X - q)
    if metric in ("hamming", "l1"):
        return diff.sum(axis=-1)
    if metric == "linf":
        return diff.max(axis=-1) if diff.shape[-1] else np.zeros(diff.shape[:-1], np.int64)
    return (diff * diff).sum(axis=-1)


def point_distances(P: PointSet, q, metric: str) -> np.ndarray:
    if metric == "hamming" and not P.bits:
        raise MetricError("hamming metric requires a bit point set")
    return distances(P.coords, P.as_point(q), metric)


def pairwise(P: PointSet, metric: str) -> np.ndarray:
    """Full ``n x n`` distance matrix; fine for the desk-scale sizes used here."""
    if metric == "hamming" and not P.bits:
        raise MetricError("hamming metric requires a bit point set")
    X = P.coords
    out = np.empty((P.n, P.n), dtype=np.int64)
    for i in range(P.n):
        out[i] = distances(X, X[i], metric)
    return out


def real_distance(value: int, scale: int, metric: str) -> Fraction:
    """Convert a scaled distance to its exact real value (squared for l2)."""
    if metric == "l2":
        return Fraction(value, scale * scale)
    return Fraction(value, scale)


def within_factor(dist: int, r: int, c: Fraction, metric: str) -> bool:
    """Exact test ``dist <= c * r`` on scaled integer distances."""
    c = Fraction(c)
    if metric == "l2":
        return dist * c.denominator ** 2 <= c.numerator ** 2 * r
    return dist * c.denominator <= c.numerator * r


def exceeds_factor(dist: int, r: int, c: Fraction, metric: str) -> bool:
    return not within_factor(dist, r, c, metric)


def ratio(dist: int, r: int) -> Fraction | None:
    """``dist / r`` as an exact rational; ``None`` encodes an infinite ratio."""
    if r == 0:
        return Fraction(1) if dist == 0 else None
    return Fraction(dist, r)


def random_bits(rng: np.random.Generator, n: int, d: int) -> PointSet:
    return bit_points(rng.integers(0, 2, size=(n, d)))


def random_grid(rng: np.random.Generator, n: int, d: int, low: int = -8, high: int = 8) -> PointSet:
    """Integer-grid points, stored with the usual factor-2 scaling."""
    return dense_points(2 * rng.integers(low, high + 1, size=(n, d)), scale=2)


def random_points(rng, n: int, d: int, metric: str) -> PointSet:
    return random_bits(rng, n, d) if metric == "hamming" else random_grid(rng, n, d)


def random_query(rng, P: PointSet, low: int = -8, high: int = 8) -> np.ndarray:
    if P.bits:
        return rng.integers(0, 2, size=P.d).astype(np.int64)
    return (P.scale * rng.integers(low, high + 1, size=P.d)).astype(np.int64)


def to_bits(value: int, d: int) -> np.ndarray:
    """Bit vector of ``value`` with coordinate ``j`` holding bit ``j``."""
    return (value >> np.arange(d)) & 1


def from_bits(bits: Iterable[int]) -> int:
    out = 0
    for j, b in enumerate(bits):
        out |= int(b) << j
    return out
