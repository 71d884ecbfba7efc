"""Brute-force ground truth for k-NN and (c, k)-NN answers."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .metrics import PointSet, point_distances, ratio, within_factor


@dataclass(frozen=True)
class KnnResult:
    neighbors: tuple[int, ...]
    distances: tuple[int, ...]

    @property
    def kth_distance(self) -> int:
        return self.distances[-1]


def rank(dist: np.ndarray, prefer: int | None = None) -> np.ndarray:
    """Row order by (distance, identifier); ``prefer`` (a 0-based row) wins its own ties."""
    ids = np.arange(dist.shape[-1])
    keys = [ids, dist]
    if prefer is not None:
        keys.insert(1, ids != prefer)
    return np.lexsort(keys)


def knn_exact(P: PointSet, q, k: int, metric: str) -> KnnResult:
    if not 1 <= k <= P.n:
        raise ValueError(f"k must lie in [1, {P.n}], got {k}")
    dist = point_distances(P, q, metric)
    order = rank(dist)[:k]
    return KnnResult(tuple(int(i) + 1 for i in order), tuple(int(x) for x in dist[order]))


def kth_distance(P: PointSet, q, k: int, metric: str) -> int:
    dist = point_distances(P, q, metric)
    return int(np.partition(dist, k - 1)[k - 1])


@dataclass(frozen=True)
class Certificate:
    ok: bool
    worst_ratio: Fraction | None
    """Exact worst distance ratio; squared for l2, ``None`` when infinite."""
    kth_distance: int
    squared: bool = False


def certify_ck_answer(P: PointSet, q, k: int, c, reported: Iterable[int], metric: str) -> Certificate:
    """Check every reported point lies within ``c`` times the k-th NN distance."""
    reported = sorted(set(int(x) for x in reported))
    if len(reported) != k:
        raise ValueError(f"expected {k} reported points, got {len(reported)}")
    if reported[0] < 1 or reported[-1] > P.n:
        raise ValueError("reported identifiers out of range")
    dist = point_distances(P, q, metric)
    r = int(np.partition(dist, k - 1)[k - 1])
    worst = int(dist[np.asarray(reported) - 1].max())
    return Certificate(
        ok=within_factor(worst, r, Fraction(c), metric),
        worst_ratio=ratio(worst, r),
        kth_distance=r,
        squared=metric == "l2",
    )
