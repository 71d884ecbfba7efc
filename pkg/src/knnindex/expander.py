"""Random bipartite expanders with exhaustive expansion certificates.

A delta-left-regular bipartite graph on ``U = {1..n}`` and ``V = {0..d_right-1}``
is an (m, delta, eps)-expander if every ``S`` with ``|S| <= m`` has
``|Gamma(S)| >= (1 - eps) * delta * |S|``.  Graphs are grown one left vertex at
a time.  Each neighborhood is a uniform delta-subset, redrawn while it breaks
expansion for a small set it completes.  The finished graph is then
certified by enumerating every set of at most m left vertices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

CERTIFY_BUDGET = 10 ** 7
DEFAULT_BETA = 4
DEFAULT_MAX_RETRIES = 20
VERTEX_TRIES = 2000


class ExpanderError(RuntimeError):
    def __init__(self, message, worst=None):
        super().__init__(message)
        self.worst = worst


def default_delta(n: int, m: int) -> int:
    return math.ceil(math.log2(2 * n / m)) + 1


def subset_count(n: int, m: int) -> int:
    return sum(math.comb(n, j) for j in range(1, m + 1))


@dataclass(frozen=True)
class BipartiteExpander:
    n_left: int
    d_right: int
    adjacency: tuple[tuple[int, ...], ...]
    """``adjacency[u - 1]`` is the sorted neighborhood of left vertex ``u``."""
    m: int
    delta: int
    eps: Fraction
    certified: bool = False

    def gamma(self, S: Iterable[int]) -> set[int]:
        out: set[int] = set()
        for u in S:
            out.update(self.adjacency[u - 1])
        return out

    def matrix(self) -> np.ndarray:
        A = np.zeros((self.n_left, self.d_right), dtype=bool)
        for u, nb in enumerate(self.adjacency):
            A[u, list(nb)] = True
        return A


def _pack(adjacency: Sequence[Sequence[int]], d_right: int) -> np.ndarray:
    words = max(1, -(-d_right // 64))
    out = np.zeros((len(adjacency), words), dtype=np.uint64)
    for u, nb in enumerate(adjacency):
        for v in nb:
            out[u, v // 64] |= np.uint64(1) << np.uint64(v % 64)
    return out


@dataclass(frozen=True)
class ExpansionReport:
    ok: bool
    regular: bool
    degree_violations: tuple[int, ...]
    subsets_checked: int
    worst_set: tuple[int, ...] | None
    worst_slack: Fraction | None
    """Minimum of ``|Gamma(S)| - (1 - eps) delta |S|``; negative means violated."""

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "regular": self.regular,
            "degree_violations": list(self.degree_violations),
            "subsets_checked": self.subsets_checked,
            "worst_set": list(self.worst_set) if self.worst_set else None,
            "worst_slack": None if self.worst_slack is None else str(self.worst_slack),
        }


def certify_expansion(adjacency: Sequence[Sequence[int]], d_right: int, m: int, delta: int, eps) -> ExpansionReport:
    """Exhaustively check regularity and expansion of every left set of size at most ``m``."""
    eps = Fraction(eps)
    n = len(adjacency)
    bad_deg = tuple(u + 1 for u, nb in enumerate(adjacency)
                    if len(set(nb)) != delta or len(nb) != delta
                    or any(not 0 <= v < d_right for v in nb))
    masks = _pack(adjacency, d_right)
    need = 1 - eps
    checked = 0
    worst_set, worst_slack = None, None
    # Level j holds every j-subset as (member rows, union words), sorted by last member.
    members = np.arange(n)[:, None]
    unions = masks.copy()
    for j in range(1, min(m, n) + 1):
        if j > 1:
            last = members[:, -1]
            new_members, new_unions = [], []
            for b in range(n):
                sel = last < b
                if sel.any():
                    new_members.append(np.hstack([members[sel], np.full((sel.sum(), 1), b)]))
                    new_unions.append(unions[sel] | masks[b])
            if not new_members:
                break
            members = np.vstack(new_members)
            unions = np.vstack(new_unions)
        counts = np.bitwise_count(unions).sum(axis=1).astype(np.int64)
        # slack * den = count * den - num * delta * j
        scaled = counts * need.denominator - need.numerator * delta * j
        checked += len(counts)
        i = int(np.argmin(scaled))
        slack = Fraction(int(scaled[i]), need.denominator)
        if worst_slack is None or slack < worst_slack:
            worst_slack = slack
            worst_set = tuple(int(x) + 1 for x in members[i])
    ok = not bad_deg and (worst_slack is None or worst_slack >= 0)
    return ExpansionReport(ok, not bad_deg, bad_deg, checked, worst_set, worst_slack)


def _grow(rng, n, d_right, m, delta, need: Fraction):
    """Add left vertices one by one; ``None`` if some vertex cannot be placed."""
    words = max(1, -(-d_right // 64))
    unions = np.zeros((0, words), dtype=np.uint64)
    sizes = np.zeros(0, dtype=np.int64)
    adjacency = []
    for _ in range(n):
        for _ in range(VERTEX_TRIES):
            nb = tuple(sorted(int(v) for v in rng.choice(d_right, size=delta, replace=False)))
            g = _pack([nb], d_right)[0]
            if len(sizes):
                counts = np.bitwise_count(unions | g).sum(axis=1).astype(np.int64)
                if np.any(counts * need.denominator < need.numerator * delta * (sizes + 1)):
                    continue
            break
        else:
            return None
        adjacency.append(nb)
        if m < 2:
            continue
        grow = sizes <= m - 2
        unions = np.vstack([unions, g[None, :], unions[grow] | g])
        sizes = np.concatenate([sizes, [1], sizes[grow] + 1])
    return tuple(adjacency)


def build_expander(n: int, m: int, delta: int, eps, seed: int,
                   max_retries: int = DEFAULT_MAX_RETRIES, d_right: int | None = None,
                   beta: float = DEFAULT_BETA) -> BipartiteExpander:
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise ValueError("eps must lie strictly between 0 and 1")
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    if subset_count(n, m) > CERTIFY_BUDGET:
        raise ValueError(f"certifying all sets of size <= {m} over {n} vertices exceeds the "
                         f"{CERTIFY_BUDGET} subset budget")
    d_right = math.ceil(beta * m * delta) if d_right is None else int(d_right)
    if delta > d_right:
        raise ValueError("delta cannot exceed the right side size")
    worst = None
    for attempt in range(max_retries):
        rng = np.random.default_rng(np.random.SeedSequence([seed, attempt]))
        adjacency = _grow(rng, n, d_right, m, delta, 1 - eps)
        if adjacency is None:
            continue
        report = certify_expansion(adjacency, d_right, m, delta, eps)
        if report.ok:
            return BipartiteExpander(n, d_right, adjacency, m, delta, eps, certified=True)
        worst = report.worst_set
    raise ExpanderError(f"no ({m}, {delta}, {eps})-expander with {n} x {d_right} vertices "
                        f"after {max_retries} attempts", worst)


def verify_expander(G: BipartiteExpander) -> ExpansionReport:
    return certify_expansion(G.adjacency, G.d_right, G.m, G.delta, G.eps)


def remove_edge(G: BipartiteExpander, u: int) -> BipartiteExpander:
    """Copy of ``G`` with one edge of ``u`` deleted (breaks left-regularity)."""
    adj = list(G.adjacency)
    adj[u - 1] = adj[u - 1][1:]
    return replace(G, adjacency=tuple(adj), certified=False)


def redirect_edge(G: BipartiteExpander, rng: np.random.Generator) -> BipartiteExpander:
    """Move one edge of a random vertex onto a neighbor of another vertex.

    Degrees stay at delta, so only expansion can catch the change.
    """
    adj = [list(nb) for nb in G.adjacency]
    u, v = (int(x) for x in rng.choice(G.n_left, size=2, replace=False))
    shared = [w for w in adj[v] if w not in adj[u]]
    if not shared:
        return replace(G, certified=False)
    old = int(rng.choice([w for w in adj[u] if w not in adj[v]] or adj[u]))
    adj[u] = sorted(w for w in adj[u] if w != old) + [int(rng.choice(shared))]
    adj[u].sort()
    return replace(G, adjacency=tuple(tuple(nb) for nb in adj), certified=False)
