"""Point sets whose (c, k)-NN queries encode (relaxed) k-set workloads.

Each workload pairs a fixed point set with a query ``q_I`` for every
k-subset ``I`` of the identifiers.  The points of ``I`` are near ``q_I``.
The exact workloads (unit vectors, ``d = n``) keep every other point far.
The expander workloads (low dimension) admit at most ``k/2`` unintended
near points.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

import numpy as np

from .expander import BipartiteExpander, verify_expander
from .metrics import PointSet, bit_points, dense_points, point_distances, real_distance

KINDS = ("linf-high", "linf-low", "hamming-high", "hamming-low")


@dataclass(frozen=True, eq=False)
class HardWorkload:
    kind: str
    points: PointSet
    metric: str
    k: int | None
    query_builder: Callable[[frozenset[int]], np.ndarray]
    expander: BipartiteExpander | None = None

    @property
    def n(self) -> int:
        return self.points.n

    def query(self, I: Iterable[int]) -> np.ndarray:
        I = frozenset(int(x) for x in I)
        if not I <= frozenset(range(1, self.n + 1)):
            raise ValueError("query set contains unknown identifiers")
        if self.k is not None and len(I) != self.k:
            raise ValueError(f"query sets have size k={self.k}, got {len(I)}")
        return self.query_builder(I)

    def distances(self, I) -> np.ndarray:
        return point_distances(self.points, self.query(I), self.metric)


def query_linf_highdim(n: int, I: Iterable[int]) -> np.ndarray:
    """+1/2 on I, -1/2 elsewhere (scaled by 2)."""
    q = -np.ones(n, dtype=np.int64)
    q[np.asarray(sorted(I), dtype=np.int64) - 1] = 1
    return q


def build_linf_highdim(n: int, k: int | None = None) -> HardWorkload:
    pts = dense_points(2 * np.eye(n, dtype=np.int64), scale=2)
    return HardWorkload("linf-high", pts, "linf", k, lambda I: query_linf_highdim(n, I))


def build_hamming_highdim(n: int, k: int | None = None) -> HardWorkload:
    if k is not None and not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")

    def query(I):
        q = np.zeros(n, dtype=np.int64)
        q[np.asarray(sorted(I), dtype=np.int64) - 1] = 1
        return q

    return HardWorkload("hamming-high", bit_points(np.eye(n, dtype=np.int64)), "hamming", k, query)


def _require_certified(G: BipartiteExpander, eps: Fraction):
    if not G.certified or not verify_expander(G).ok:
        raise ValueError("the construction needs a certified expander")
    if G.eps > eps:
        raise ValueError(f"the construction needs expansion with eps <= {eps}, got {G.eps}")


def _gamma_indicator(G: BipartiteExpander, I) -> np.ndarray:
    mark = np.zeros(G.d_right, dtype=bool)
    mark[sorted(G.gamma(I))] = True
    return mark


def build_linf_lowdim(G: BipartiteExpander) -> HardWorkload:
    """Points are scaled 0/1 indicators of neighborhoods; q_I is +-1/2 on Gamma(I)."""
    _require_certified(G, Fraction(1, 3))
    pts = dense_points(2 * G.matrix().astype(np.int64), scale=2)

    def query(I):
        return np.where(_gamma_indicator(G, I), 1, -1).astype(np.int64)

    return HardWorkload("linf-low", pts, "linf", G.m, query, G)


def build_hamming_lowdim(G: BipartiteExpander) -> HardWorkload:
    """Points and queries are characteristic vectors of Gamma(i) and Gamma(I)."""
    _require_certified(G, Fraction(1, 4))
    pts = bit_points(G.matrix().astype(np.int64))

    def query(I):
        return _gamma_indicator(G, I).astype(np.int64)

    return HardWorkload("hamming-low", pts, "hamming", G.m, query, G)


def build_workload(kind: str, n: int, k: int, G: BipartiteExpander | None = None) -> HardWorkload:
    if kind == "linf-high":
        return build_linf_highdim(n, k)
    if kind == "hamming-high":
        return build_hamming_highdim(n, k)
    if G is None:
        raise ValueError(f"{kind} needs an expander")
    return build_linf_lowdim(G) if kind == "linf-low" else build_hamming_lowdim(G)


def outside_counts(G: BipartiteExpander, I) -> np.ndarray:
    """``gamma_j = |Gamma(j) minus Gamma(I)|`` for every left vertex j."""
    mark = _gamma_indicator(G, I)
    return (~mark[None, :] & G.matrix()).sum(axis=1)


def unintended_near(W: HardWorkload, I) -> frozenset[int]:
    """Points outside I that the construction cannot push away from q_I."""
    I = frozenset(I)
    if W.kind == "hamming-low":
        g = outside_counts(W.expander, I)
        # gamma_j <= delta/4, compared exactly as 4 * gamma_j <= delta
        cand = {int(j) + 1 for j in np.flatnonzero(4 * g <= W.expander.delta)}
        return frozenset(cand) - I
    if W.metric != "linf":
        return frozenset()
    # within 1/2, i.e. 2 * dist <= scale
    near = {int(j) + 1 for j in np.flatnonzero(2 * W.distances(I) <= W.points.scale)}
    return frozenset(near) - I


def query_sets(W: HardWorkload, exhaustive: bool = False, samples: int = 100, seed: int = 0):
    """All query sets (every size when the workload has no fixed k) or a seeded sample."""
    n = W.n
    sizes = [W.k] if W.k is not None else list(range(1, n + 1))
    if exhaustive:
        for size in sizes:
            yield from (frozenset(c) for c in itertools.combinations(range(1, n + 1), size))
        return
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        size = W.k if W.k is not None else int(rng.integers(1, n + 1))
        yield frozenset(int(x) + 1 for x in rng.choice(n, size=size, replace=False))


def verify_workload(W: HardWorkload, queries=None, exhaustive: bool = False,
                    samples: int = 100, seed: int = 0) -> dict:
    """Check each query against the distance pattern its construction promises.

    All comparisons are on exact scaled integers.  The report carries the
    observed distance values, the worst near-set blow-up and (Hamming low
    dimension) the worst separation ratio.
    """
    report = {"kind": W.kind, "n": W.n, "k": W.k, "queries_checked": 0, "failures": []}
    if W.expander is not None:
        exp = verify_expander(W.expander)
        report["expander"] = exp.as_dict()
        if not exp.regular:
            report["failures"].append({"reason": "expander not left-regular",
                                       "vertices": list(exp.degree_violations)})
        elif not exp.ok:
            report["failures"].append({"reason": "expansion violated", "set": list(exp.worst_set)})
        if report["failures"]:
            report["pass"] = False
            return report
    if queries is None:
        queries = query_sets(W, exhaustive=exhaustive, samples=samples, seed=seed)
    values: set[Fraction] = set()
    max_near = 0
    max_extra = 0
    min_sep: Fraction | None = None
    unbounded_sep = False
    s = W.points.scale
    for I in queries:
        I = frozenset(I)
        k = len(I)
        dist = W.distances(I)
        in_I = np.zeros(W.n, dtype=bool)
        in_I[np.asarray(sorted(I)) - 1] = True
        values.update(real_distance(int(x), s, W.metric) for x in np.unique(dist))
        report["queries_checked"] += 1
        problem = None
        if W.kind in ("linf-high", "linf-low"):
            # scaled: 1/2 -> 1, 3/2 -> 3
            near = dist <= 1
            if not np.all(dist[in_I] == 1):
                problem = "a point of I is not at distance 1/2"
            elif not np.all((dist == 1) | (dist == 3)):
                problem = "distance outside {1/2, 3/2}"
            elif W.kind == "linf-high" and not np.array_equal(near, in_I):
                problem = "1/2-near set differs from I"
            elif W.kind == "linf-low":
                extra = int(near.sum()) - k
                max_near = max(max_near, int(near.sum()))
                max_extra = max(max_extra, extra)
                if 2 * int(near.sum()) > 3 * k:
                    problem = f"|I'| = {int(near.sum())} exceeds 3k/2"
        elif W.kind == "hamming-high":
            if not (np.all(dist[in_I] == k - 1) and np.all(dist[~in_I] == k + 1)):
                problem = "distances differ from {k-1, k+1}"
        else:
            G = W.expander
            gI = len(G.gamma(I))
            gam = outside_counts(G, I)
            d_I = gI - G.delta
            star = unintended_near(W, I)
            max_extra = max(max_extra, len(star))
            max_near = max(max_near, k + len(star))
            if not np.all(dist == d_I + 2 * gam):
                problem = "distance identity d_j = |Gamma(I)| - delta + 2 gamma_j fails"
            elif not np.all(dist[in_I] == d_I):
                problem = "points of I are not all at distance |Gamma(I)| - delta"
            elif 4 * d_I < G.delta * (3 * k - 4):
                problem = "d_I below delta (3k/4 - 1)"
            elif 2 * len(star) > k:
                problem = f"|I*| = {len(star)} exceeds k/2"
            else:
                outside = ~in_I
                outside[np.asarray(sorted(star), dtype=np.int64) - 1] = False
                if outside.any():
                    if d_I == 0:
                        unbounded_sep = True
                    else:
                        sep = Fraction(int(dist[outside].min()), d_I)
                        min_sep = sep if min_sep is None else min(min_sep, sep)
                        if k > 1 and sep < 1 + Fraction(1, 4 * (k - 1)):
                            problem = f"separation ratio {sep} below 1 + 1/(4(k-1))"
        if problem:
            report["failures"].append({"query": sorted(I), "reason": problem})
    report["distance_values"] = [str(v) for v in sorted(values)]
    if W.kind in ("linf-low", "hamming-low"):
        report["max_near_set"] = max_near
        report["max_unintended"] = max_extra
    if W.kind == "hamming-low":
        report["min_separation_ratio"] = "inf" if min_sep is None else str(min_sep)
        report["separation_unbounded_seen"] = unbounded_sep
    report["pass"] = not report["failures"]
    return report
