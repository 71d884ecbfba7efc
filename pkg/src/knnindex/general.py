"""Store each point's k nearest neighbors; answer with the list of the query's nearest point.

Every reported point is within three times the query's k-th NN distance, in
any metric, at a cost of ``ceil(k/B)`` I/Os and ``n * ceil(k/B)`` blocks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import oracle
from .metrics import PointSet, check_metric, distance, from_rationals, pairwise, point_distances
from .model import IndexingScheme, Instance


@dataclass(frozen=True, eq=False)
class General3ApxIndex:
    points: PointSet
    k: int
    block_size: int
    metric: str
    per_point_lists: tuple[tuple[int, ...], ...]
    """``per_point_lists[i - 1]`` is the k-NN list of point ``i`` (itself first)."""
    block_groups: tuple[tuple[int, ...], ...]
    scheme: IndexingScheme

    @property
    def n(self) -> int:
        return self.points.n

    @property
    def blocks_per_point(self) -> int:
        return math.ceil(self.k / self.block_size)

    def neighbors_of(self, ident: int) -> tuple[int, ...]:
        return self.per_point_lists[ident - 1]


def build_general_3apx(P: PointSet, k: int, B: int, metric: str) -> General3ApxIndex:
    check_metric(metric)
    if not 1 <= k <= P.n:
        raise ValueError(f"k must lie in [1, {P.n}], got {k}")
    if B < 1:
        raise ValueError("block size must be at least 1")
    dist = pairwise(P, metric)
    lists, groups, blocks = [], [], []
    for i in range(P.n):
        # The point itself leads its own list even when duplicates tie with it.
        order = oracle.rank(dist[i], prefer=i)[:k]
        lst = tuple(int(j) + 1 for j in order)
        lists.append(lst)
        start = len(blocks)
        for off in range(0, k, B):
            blocks.append(lst[off:off + B])
        groups.append(tuple(range(start, len(blocks))))
    scheme = IndexingScheme(Instance(P.n, P), B, blocks)
    return General3ApxIndex(P, k, B, metric, tuple(lists), tuple(groups), scheme)


def nearest_point(P: PointSet, q, metric: str) -> int:
    """Identifier of the nearest point; ties go to the lowest identifier."""
    return int(np.argmin(point_distances(P, q, metric))) + 1


def answer_general_3apx(index: General3ApxIndex, q) -> tuple[frozenset[int], int]:
    # Locating the group is the model's free oracle step; only the group's blocks are charged.
    i_star = nearest_point(index.points, q, index.metric)
    group = index.block_groups[i_star - 1]
    reported: set[int] = set()
    for j in group:
        reported |= index.scheme.blocks[j]
    return frozenset(reported), len(group)


def proof_case(index: General3ApxIndex, q) -> tuple[int, int]:
    """Which case of the correctness argument ``q`` falls in, with its distance factor.

    D is the ball around q's nearest point whose radius reaches that point's
    k-th neighbor.  Cases: 1 = q and the k-th NN of q both outside D (factor 2),
    2 = q inside, k-th NN outside (3), 3 = both inside (3), 4 = q outside,
    k-th NN inside (2).
    """
    P, metric = index.points, index.metric
    i_star = nearest_point(P, q, metric)
    from_center = point_distances(P, P.point(i_star), metric)
    radius = from_center[index.neighbors_of(i_star)[-1] - 1]
    kth = oracle.knn_exact(P, q, index.k, metric).neighbors[-1]
    q_in = distance(P.as_point(q), P.point(i_star), metric) <= radius
    pk_in = from_center[kth - 1] <= radius
    case = {(False, False): 1, (True, False): 2, (True, True): 3, (False, True): 4}[(q_in, pk_in)]
    return case, (3 if case in (2, 3) else 2)


def make_tightness_instance(k: int, eps) -> tuple[PointSet, np.ndarray]:
    """The n = k + 1 points on a line where the scheme's ratio is exactly 3/(1+eps).

    Identifiers follow the nearest-neighbor order of q = 1/2: point 1 is 0,
    point k is 1 + eps/2, point k+1 is -1 and point i is -eps*i/(2k) otherwise.
    """
    eps = Fraction(eps)
    if k < 3:
        raise ValueError("the construction needs k >= 3")
    if not 0 < eps < 1:
        raise ValueError("eps must lie strictly between 0 and 1")
    coords = []
    for i in range(1, k + 2):
        if i == 1:
            x = Fraction(0)
        elif i == k:
            x = 1 + eps / 2
        elif i == k + 1:
            x = Fraction(-1)
        else:
            x = -eps * i / (2 * k)
        coords.append([x])
    P = from_rationals(coords + [[Fraction(1, 2)]])
    q = P.coords[-1].copy()
    return PointSet(P.coords[:-1], P.scale), q


def sidecar(index: General3ApxIndex) -> dict:
    """Point -> block group mapping stored next to the serialized scheme."""
    return {
        "scheme": "general3apx",
        "n": index.n, "k": index.k, "B": index.block_size, "metric": index.metric,
        "blocks": index.scheme.space_usage,
        "io_per_query": index.blocks_per_point,
        "groups": {str(i + 1): list(g) for i, g in enumerate(index.block_groups)},
        "lists": {str(i + 1): list(lst) for i, lst in enumerate(index.per_point_lists)},
    }


def from_sidecar(P: PointSet, scheme: IndexingScheme, doc: dict) -> General3ApxIndex:
    n = P.n
    if doc["n"] != n or scheme.n != n:
        raise ValueError("index and instance sizes differ")
    groups = tuple(tuple(doc["groups"][str(i)]) for i in range(1, n + 1))
    lists = tuple(tuple(doc["lists"][str(i)]) for i in range(1, n + 1))
    for g, lst in zip(groups, lists):
        stored = set().union(*(scheme.blocks[j] for j in g))
        if stored != set(lst):
            raise ValueError("sidecar lists disagree with the stored blocks")
    scheme = IndexingScheme(Instance(n, P), scheme.block_size, scheme.blocks)
    return General3ApxIndex(P, doc["k"], doc["B"], doc["metric"], lists, groups, scheme)
