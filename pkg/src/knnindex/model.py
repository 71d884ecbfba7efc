"""The indexability model: instances, blocks, indexing schemes and cover sets.

Query cost is the size of a minimum cover of the required items by stored
blocks.  Finding which blocks to read is free; only their number counts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import oracle
from .metrics import PointSet

# Exhaustive cover search is allowed when either limit holds.
EXACT_MAX_BLOCKS = 24
EXACT_MAX_REQUIRED = 12


class CoverError(ValueError):
    pass


class NoCoverError(CoverError):
    def __init__(self, missing):
        missing = frozenset(missing)
        super().__init__(f"no cover exists: items {sorted(missing)} appear in no block")
        self.missing = missing


class CoverBudgetError(CoverError):
    pass


@dataclass(frozen=True)
class Instance:
    n: int
    points: PointSet | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("an instance needs at least one item")
        if self.points is not None and self.points.n != self.n:
            raise ValueError("attached point set size differs from n")

    @property
    def items(self) -> range:
        return range(1, self.n + 1)


@dataclass(frozen=True)
class IndexingScheme:
    instance: Instance
    block_size: int
    blocks: tuple[frozenset[int], ...]

    def __init__(self, instance: Instance | int, block_size: int, blocks: Iterable[Iterable[int]]):
        if isinstance(instance, int):
            instance = Instance(instance)
        object.__setattr__(self, "instance", instance)
        object.__setattr__(self, "block_size", int(block_size))
        object.__setattr__(self, "blocks", tuple(frozenset(int(x) for x in b) for b in blocks))

    @property
    def n(self) -> int:
        return self.instance.n

    @property
    def space_usage(self) -> int:
        return len(self.blocks)


@dataclass(frozen=True)
class Violation:
    block: int
    reason: str

    def __str__(self):
        return f"block {self.block}: {self.reason}"


def validate_scheme(scheme: IndexingScheme) -> Violation | None:
    """Return the first block violation, or ``None`` when the scheme is well formed."""
    if scheme.block_size < 1:
        return Violation(-1, f"block size {scheme.block_size} < 1")
    for j, b in enumerate(scheme.blocks):
        if len(b) > scheme.block_size:
            return Violation(j, f"oversized block ({len(b)} > B={scheme.block_size})")
        unknown = sorted(x for x in b if not 1 <= x <= scheme.n)
        if unknown:
            return Violation(j, f"unknown item(s) {unknown}")
    return None


@dataclass(frozen=True)
class CoverSet:
    block_indices: tuple[int, ...]

    @property
    def cost(self) -> int:
        return len(self.block_indices)

    def items(self, scheme: IndexingScheme) -> frozenset[int]:
        out: set[int] = set()
        for j in self.block_indices:
            out |= scheme.blocks[j]
        return frozenset(out)


def _masks(scheme: IndexingScheme, required: Iterable[int]):
    req = sorted(set(int(x) for x in required))
    pos = {x: i for i, x in enumerate(req)}
    masks = []
    for b in scheme.blocks:
        m = 0
        for x in b:
            p = pos.get(x)
            if p is not None:
                m |= 1 << p
        masks.append(m)
    full = (1 << len(req)) - 1
    covered = 0
    for m in masks:
        covered |= m
    if covered != full:
        raise NoCoverError(req[i] for i in range(len(req)) if not covered >> i & 1)
    return req, masks, full


def _lex_search(cand, masks, full, slots):
    """Lexicographically first cover using at most ``slots`` of the candidate blocks."""
    nc = len(cand)
    suffix = [0] * (nc + 1)
    for i in range(nc - 1, -1, -1):
        suffix[i] = suffix[i + 1] | masks[cand[i]]
    widest = max(masks[j].bit_count() for j in cand)
    chosen: list[int] = []

    def rec(start, covered, slots):
        if covered == full:
            return True
        if slots == 0:
            return False
        missing = full & ~covered
        if missing & ~suffix[start]:
            return False
        if -(-missing.bit_count() // widest) > slots:
            return False
        for i in range(start, nc):
            if missing & ~suffix[i]:
                return False
            m = masks[cand[i]]
            if m & missing:
                chosen.append(cand[i])
                if rec(i + 1, covered | m, slots - 1):
                    return True
                chosen.pop()
        return False

    return tuple(chosen) if rec(0, 0, slots) else None


def cover_set_exact(scheme: IndexingScheme, required: Iterable[int]) -> CoverSet:
    """Minimum-cardinality cover; ties go to the lexicographically smallest index set."""
    req, masks, full = _masks(scheme, required)
    if not req:
        return CoverSet(())
    # A block whose projection is contained in an earlier block's projection can
    # always be swapped for the earlier one, so drop it.
    cand: list[int] = []
    for j, m in enumerate(masks):
        if m and not any(masks[i] | m == masks[i] for i in cand):
            cand.append(j)
    if len(cand) > EXACT_MAX_BLOCKS and len(req) > EXACT_MAX_REQUIRED:
        raise CoverBudgetError(
            f"exact cover limited to {EXACT_MAX_BLOCKS} useful blocks or {EXACT_MAX_REQUIRED} "
            f"required items (got {len(cand)} and {len(req)}); use cover_set_greedy"
        )
    widest = max(masks[j].bit_count() for j in cand)
    lower = -(-len(req) // widest)
    for slots in range(lower, len(req) + 1):
        found = _lex_search(cand, masks, full, slots)
        if found is not None:
            return CoverSet(found)
    raise AssertionError("unreachable: every required item lies in some block")


def cover_set_greedy(scheme: IndexingScheme, required: Iterable[int]) -> CoverSet:
    """Greedy max-coverage cover, ties broken by lowest block index."""
    req, masks, full = _masks(scheme, required)
    covered = 0
    chosen = []
    while covered != full:
        gains = [(m & ~covered).bit_count() for m in masks]
        best = max(range(len(masks)), key=lambda j: (gains[j], -j))
        chosen.append(best)
        covered |= masks[best]
    return CoverSet(tuple(chosen))


KINDS = ("exact_set", "relaxed_set", "ckNN")


@dataclass(frozen=True)
class QuerySpec:
    kind: str
    target: frozenset[int] = field(default_factory=frozenset)
    point: np.ndarray | None = None
    k: int = 0
    c: Fraction = Fraction(1)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown query kind {self.kind!r}")
        object.__setattr__(self, "target", frozenset(int(x) for x in self.target))
        object.__setattr__(self, "c", Fraction(self.c))

    @classmethod
    def exact_set(cls, target):
        return cls("exact_set", frozenset(target))

    @classmethod
    def relaxed_set(cls, target):
        return cls("relaxed_set", frozenset(target))

    @classmethod
    def cknn(cls, point, k: int, c):
        return cls("ckNN", point=np.asarray(point), k=int(k), c=Fraction(c))

    @property
    def size(self) -> int:
        return self.k if self.kind == "ckNN" else len(self.target)


def answer_valid(query: QuerySpec, reported: Iterable[int],
                 points: PointSet | None = None, metric: str | None = None) -> bool:
    """Whether ``reported`` is an admissible answer to ``query``.

    ``ckNN`` queries need the point set and metric so the oracle can compute
    the exact k-th nearest neighbor distance.
    """
    reported = frozenset(int(x) for x in reported)
    if len(reported) != query.size:
        raise ValueError(f"expected {query.size} reported items, got {len(reported)}")
    if query.kind == "exact_set":
        return reported >= query.target
    if query.kind == "relaxed_set":
        return len(reported & query.target) >= math.ceil(len(query.target) / 2)
    if points is None or metric is None:
        raise ValueError("ckNN validity needs the point set and metric")
    return oracle.certify_ck_answer(points, query.point, query.k, query.c, reported, metric).ok
