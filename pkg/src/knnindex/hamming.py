"""(c, k)-NN indexing scheme for Hamming space via random parity maps.

For every radius r that some query's k-th nearest neighbor sits at, R random
maps ``t: {0,1}^d -> {0,1}^D`` are drawn.  Map output bit ``j`` is the parity
of the input on a random coordinate subset.  Each map owns a table with one
entry per ``i`` in ``{0,1}^D``: the k points whose images are nearest to
``i``.  A query reads the entry ``t(q)`` of a map designated valid for it, so
it costs ``ceil(k/B)`` I/Os.  Maps are redrawn until every certified query
has a valid map.

Tables have ``2^D`` entries, which is far too many to store at useful D.
Entries are computed on demand and memoized.  Space accounting still
charges the full ``2^D * ceil(k/B)`` blocks per table.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import oracle
from .metrics import PointSet, distances, from_bits, point_distances, to_bits
from .model import IndexingScheme, Instance

log = logging.getLogger(__name__)

DEFAULT_KAPPA = 3
DEFAULT_GAMMA = 4
DEFAULT_MAX_RETRIES = 20
DEFAULT_RATE_BASE = 8
FULL_CERTIFY_MAX_D = 16
CRITERIA = ("answer", "distinction")


class HammingBuildError(RuntimeError):
    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats or {}


class AnswerNotGuaranteed(LookupError):
    pass


def default_D(n: int, kappa: float = DEFAULT_KAPPA) -> int:
    return math.ceil(kappa * math.log2(max(n, 2)))


def default_R(d: int, gamma: int = DEFAULT_GAMMA) -> int:
    return gamma * d


def inclusion_probability(r: int, base: int = DEFAULT_RATE_BASE) -> Fraction:
    """Chance that a coordinate joins an output bit's subset at radius ``r``."""
    if r <= 0:
        return Fraction(1, 2)
    return min(Fraction(1, base * r), Fraction(1, 2))


@dataclass(frozen=True, eq=False)
class ParityMap:
    subsets: np.ndarray
    """Boolean ``(D, d)`` matrix; row ``j`` is the subset feeding output bit ``j``."""
    r: int = 0
    seed: tuple[int, ...] = ()

    @property
    def d(self) -> int:
        return self.subsets.shape[1]

    @property
    def D(self) -> int:
        return self.subsets.shape[0]

    @classmethod
    def sample(cls, d: int, D: int, r: int, seed: Sequence[int], rate_base: int = DEFAULT_RATE_BASE):
        # Rows are drawn in order, so a larger D extends a smaller one's subsets.
        rng = np.random.default_rng(np.random.SeedSequence(list(seed)))
        p = float(inclusion_probability(r, rate_base))
        return cls(rng.random((D, d)) < p, r, tuple(int(s) for s in seed))

    @classmethod
    def identity(cls, d: int):
        return cls(np.eye(d, dtype=bool))

    def apply_all(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.int64)
        if X.shape[-1] != self.d:
            raise ValueError(f"dimension mismatch: map expects {self.d}, got {X.shape[-1]}")
        return (X @ self.subsets.T.astype(np.int64)) & 1


def apply_map(t: ParityMap, x) -> np.ndarray:
    x = np.asarray(x)
    if x.shape != (t.d,):
        raise ValueError(f"dimension mismatch: map expects {t.d}, got {x.shape}")
    return t.apply_all(x[None, :])[0]


def map_preserves_distinction(t: ParityMap, P: PointSet, q, r: int, c) -> bool:
    """Near points (within r of q) map strictly closer to t(q) than far points (beyond c*r)."""
    dist = point_distances(P, q, "hamming")
    c = Fraction(c)
    near = dist <= r
    far = dist * c.denominator > c.numerator * r
    if not near.any() or not far.any():
        return True
    img = distances(t.apply_all(P.coords), apply_map(t, P.as_point(q)), "hamming")
    return bool(img[near].max() < img[far].min())


def _topk(img_dist: np.ndarray, k: int) -> np.ndarray:
    ids = np.broadcast_to(np.arange(img_dist.shape[-1]), img_dist.shape)
    return np.lexsort((ids, img_dist), axis=-1)[..., :k]


class Table:
    """Lazy ``2^D``-entry table of one map: entry ``i`` lists the k points whose images are nearest ``i``."""

    def __init__(self, t: ParityMap, P: PointSet, k: int):
        self.map = t
        self.k = k
        self.images = t.apply_all(P.coords)
        self._entries: dict[int, tuple[int, ...]] = {}

    def entry(self, image) -> tuple[int, ...]:
        key = image if isinstance(image, int) else from_bits(image)
        hit = self._entries.get(key)
        if hit is None:
            bits = to_bits(key, self.map.D) if isinstance(image, int) else np.asarray(image)
            order = _topk(distances(self.images, bits, "hamming"), self.k)
            hit = self._entries[key] = tuple(int(i) + 1 for i in order)
        return hit

    def lookup(self, q) -> tuple[int, ...]:
        return self.entry(apply_map(self.map, q))

    @property
    def materialized(self) -> dict[int, tuple[int, ...]]:
        return dict(self._entries)


@dataclass(eq=False)
class RadiusStructure:
    r: int
    maps: list[ParityMap]
    tables: list[Table]
    attempts: int
    stats: dict


@dataclass(eq=False)
class HammingIndex:
    points: PointSet
    k: int
    c: Fraction
    block_size: int
    D: int
    R: int
    seed: int
    certify: str
    criterion: str
    rate_base: int
    radii: dict[int, RadiusStructure] = field(default_factory=dict)
    designation: dict[int, tuple[int, int]] = field(default_factory=dict)
    """Query (as an integer bit pattern) -> (radius, map index) certified for it."""

    @property
    def n(self) -> int:
        return self.points.n

    @property
    def d(self) -> int:
        return self.points.d

    @property
    def blocks_per_entry(self) -> int:
        return math.ceil(self.k / self.block_size)

    @property
    def table_count(self) -> int:
        return sum(len(s.tables) for s in self.radii.values())

    @property
    def space_blocks(self) -> int:
        return self.table_count * (2 ** self.D) * self.blocks_per_entry

    @property
    def space_bound(self) -> int:
        return self.d * self.R * (2 ** self.D) * self.blocks_per_entry

    def table(self, r: int, j: int) -> Table:
        return self.radii[r].tables[j]

    def certification_summary(self) -> dict:
        return {
            "mode": self.certify,
            "criterion": self.criterion,
            "queries": len(self.designation),
            "radii": {str(r): s.stats for r, s in sorted(self.radii.items())},
        }


def _evaluate_maps(P_coords, Q, dist, r, c, k, maps, chunk=256):
    """Per (query, map): answer correctness and the distinction property."""
    m = Q.shape[0]
    ans = np.zeros((m, len(maps)), dtype=bool)
    dis = np.zeros((m, len(maps)), dtype=bool)
    c = Fraction(c)
    near = dist <= r
    far = dist * c.denominator > c.numerator * r
    rows = np.arange(m)[:, None]
    for j, t in enumerate(maps):
        tP = t.apply_all(P_coords)
        tQ = t.apply_all(Q)
        for lo in range(0, m, chunk):
            sl = slice(lo, lo + chunk)
            img = (tQ[sl, None, :] != tP[None, :, :]).sum(-1)
            top = _topk(img, k)
            worst = dist[sl][rows[: img.shape[0]], top].max(axis=1)
            ans[sl, j] = worst * c.denominator <= c.numerator * r
            big = np.iinfo(np.int64).max
            near_max = np.where(near[sl], img, -1).max(axis=1)
            far_min = np.where(far[sl], img, big).min(axis=1)
            dis[sl, j] = near_max < far_min
    return ans, dis


def build_hamming_index(
    P: PointSet,
    k: int,
    c,
    B: int,
    D: int | None = None,
    R: int | None = None,
    seed: int = 0,
    certify: str = "full",
    queries: Iterable | None = None,
    max_retries: int = DEFAULT_MAX_RETRIES,
    criterion: str = "answer",
    rate_base: int = DEFAULT_RATE_BASE,
    d_max: int = FULL_CERTIFY_MAX_D,
) -> HammingIndex:
    """Draw maps per radius until every certification query has a valid one.

    ``certify="full"`` certifies all ``2^d`` queries; ``"sampled"`` only the
    given ``queries``.  A map is valid for a query when its table entry is a
    correct (c, k)-NN answer (``criterion="answer"``) or, more strictly,
    when it preserves the near/far distinction (``criterion="distinction"``).
    """
    c = Fraction(c)
    if not P.bits:
        raise ValueError("the Hamming scheme needs a bit point set")
    if c <= 1:
        raise ValueError("approximation factor must exceed 1")
    if not 1 <= k <= P.n:
        raise ValueError(f"k must lie in [1, {P.n}], got {k}")
    if B < 1:
        raise ValueError("block size must be at least 1")
    if criterion not in CRITERIA:
        raise ValueError(f"criterion must be one of {CRITERIA}")
    D = default_D(P.n) if D is None else int(D)
    R = default_R(P.d) if R is None else int(R)
    if certify == "full":
        if P.d > d_max:
            raise ValueError(f"full certification enumerates 2^d queries; d={P.d} exceeds {d_max}")
        Q = np.array([to_bits(v, P.d) for v in range(2 ** P.d)], dtype=np.int64).reshape(-1, P.d)
    elif certify == "sampled":
        if queries is None:
            raise ValueError("sampled certification needs a query list")
        Q = np.array([P.as_point(q) for q in queries], dtype=np.int64).reshape(-1, P.d)
        Q = np.unique(Q, axis=0)
    else:
        raise ValueError("certify must be 'full' or 'sampled'")

    index = HammingIndex(P, k, c, B, D, R, seed, certify, criterion, rate_base)
    dist_all = np.stack([distances(P.coords, q, "hamming") for q in Q]) if len(Q) else np.zeros((0, P.n), np.int64)
    kth = np.partition(dist_all, k - 1, axis=1)[:, k - 1] if len(Q) else np.zeros(0, np.int64)
    keys = [from_bits(q) for q in Q]

    for r in sorted(set(int(x) for x in kth)):
        rows = np.flatnonzero(kth == r)
        Qr, dr = Q[rows], dist_all[rows]
        for attempt in range(max_retries):
            maps = [ParityMap.sample(P.d, D, r, (seed, r, attempt, j), rate_base) for j in range(R)]
            ans, dis = _evaluate_maps(P.coords, Qr, dr, r, c, k, maps)
            valid = ans if criterion == "answer" else dis
            covered = valid.any(axis=1)
            if covered.all():
                break
            log.info("radius %d attempt %d: %d of %d queries uncovered", r, attempt, (~covered).sum(), len(rows))
        else:
            raise HammingBuildError(
                f"radius {r}: {int((~covered).sum())} of {len(rows)} queries had no valid map "
                f"after {max_retries} attempts",
                {"radius": r, "uncovered": int((~covered).sum()), "queries": len(rows),
                 "map_success_rate": float(valid.mean())},
            )
        tables = [Table(t, P, k) for t in maps]
        first = valid.argmax(axis=1)
        for row, j in zip(rows, first):
            index.designation[keys[row]] = (r, int(j))
            tables[j].lookup(Q[row])
        stats = {
            "attempts": attempt + 1,
            "queries": int(len(rows)),
            "map_success_rate": round(float(valid.mean()), 6),
            "answer_rate": round(float(ans.mean()), 6),
            "distinction_rate": round(float(dis.mean()), 6),
            "designated_with_distinction": int(dis[np.arange(len(rows)), first].sum()),
        }
        index.radii[r] = RadiusStructure(r, maps, tables, attempt + 1, stats)
    return index


def answer_hamming(index: HammingIndex, q) -> tuple[tuple[int, ...], int]:
    """Read the designated table entry for ``q``: ``ceil(k/B)`` I/Os."""
    q = index.points.as_point(q)
    key = from_bits(q)
    if key not in index.designation:
        raise AnswerNotGuaranteed(f"query {q.tolist()} was not certified; answer not guaranteed")
    r, j = index.designation[key]
    return index.table(r, j).lookup(q), index.blocks_per_entry


def answer_hamming_all_maps(index: HammingIndex, q) -> tuple[tuple[int, ...], int]:
    """Without knowing the valid map: read ``t(q)`` in every map at q's radius, keep the k closest."""
    P = index.points
    q = P.as_point(q)
    r = oracle.kth_distance(P, q, index.k, "hamming")
    if r not in index.radii:
        raise AnswerNotGuaranteed(f"no structure was built for radius {r}")
    seen: set[int] = set()
    for table in index.radii[r].tables:
        seen.update(table.lookup(q))
    cand = np.array(sorted(seen))
    dist = point_distances(P, q, "hamming")[cand - 1]
    order = np.lexsort((cand, dist))[: index.k]
    return tuple(int(x) for x in cand[order]), len(index.radii[r].tables) * index.blocks_per_entry


def materialized_scheme(index: HammingIndex) -> tuple[IndexingScheme, list[dict]]:
    """Blocks of every computed table entry, plus where each entry lives."""
    blocks, where = [], []
    width = index.block_size
    for r, s in sorted(index.radii.items()):
        for j, table in enumerate(s.tables):
            for image, ids in sorted(table.materialized.items()):
                start = len(blocks)
                for off in range(0, len(ids), width):
                    blocks.append(ids[off:off + width])
                where.append({"radius": r, "map": j, "image": image,
                              "blocks": list(range(start, len(blocks)))})
    return IndexingScheme(Instance(index.n, index.points), width, blocks), where


def manifest(index: HammingIndex) -> dict:
    """Everything needed to rebuild the index from the point set."""
    return {
        "scheme": "hamming",
        "params": {"n": index.n, "d": index.d, "k": index.k, "c": str(index.c),
                   "B": index.block_size, "D": index.D, "R": index.R, "seed": index.seed,
                   "rate_base": index.rate_base},
        "certification": index.certification_summary(),
        "map_seeds": {str(r): [list(t.seed) for t in s.maps] for r, s in sorted(index.radii.items())},
        "designation": {str(key): list(v) for key, v in sorted(index.designation.items())},
        "space_blocks": str(index.space_blocks),
        "space_bound": str(index.space_bound),
        "io_per_query": index.blocks_per_entry,
    }


def from_manifest(P: PointSet, doc: dict) -> HammingIndex:
    p = doc["params"]
    cert = doc["certification"]
    index = HammingIndex(P, p["k"], Fraction(p["c"]), p["B"], p["D"], p["R"], p["seed"],
                         cert["mode"], cert["criterion"], p.get("rate_base", DEFAULT_RATE_BASE))
    for r_str, seeds in doc["map_seeds"].items():
        r = int(r_str)
        maps = [ParityMap.sample(P.d, index.D, r, s, index.rate_base) for s in seeds]
        stats = cert["radii"].get(r_str, {})
        index.radii[r] = RadiusStructure(r, maps, [Table(t, P, index.k) for t in maps],
                                         stats.get("attempts", 1), stats)
    index.designation = {int(key): (int(v[0]), int(v[1])) for key, v in doc["designation"].items()}
    return index
