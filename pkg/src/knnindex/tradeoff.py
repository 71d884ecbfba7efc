"""Counting bounds for (relaxed) lambda-set workloads and the alpha-subset scheme.

The counting inequality is evaluated exactly on Python integers.  The closed
forms derived from it are evaluated with mpmath at 50 significant digits.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import mpmath

from .model import IndexingScheme, Instance

DIGITS = 50
ALPHA_SUBSET_MAX_N = 16


@dataclass(frozen=True)
class TradeoffParams:
    n: int
    lam: int
    B: int
    s: int
    t: int = 1
    alpha: int = 1

    def __post_init__(self):
        for name in ("n", "lam", "B", "s", "t", "alpha"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.lam > self.n:
            raise ValueError("lambda cannot exceed n")
        if self.alpha > self.B:
            raise ValueError("alpha cannot exceed B")


def halves(lam: int) -> tuple[int, int]:
    """Split lambda into the part found in blocks and the freely added part."""
    return (lam + 1) // 2, lam // 2


def counting_sides(n: int, lam: int, B: int, s: int, t: int) -> tuple[int, int]:
    """Both sides of C(s,t) C(tB, ceil(lam/2)) C(n, floor(lam/2)) >= C(n, lam)."""
    indexed, free = halves(lam)
    lhs = math.comb(s, t) * math.comb(t * B, indexed) * math.comb(n, free)
    return lhs, math.comb(n, lam)


def counting_inequality_holds(p: TradeoffParams) -> tuple[bool, int, int]:
    lhs, rhs = counting_sides(p.n, p.lam, p.B, p.s, p.t)
    return lhs >= rhs, lhs, rhs


def closed_form_t(n: int, lam: int, B: int, s: int, t: int):
    """lam * log_s((1/2e) * sqrt(n / (tB))); ``None`` when s = 1 (no logarithm base)."""
    if s < 2:
        return None
    with mpmath.workdps(DIGITS):
        inner = mpmath.sqrt(mpmath.mpf(n) / (t * B)) / (2 * mpmath.e)
        return lam * mpmath.log(inner) / mpmath.log(s)


@dataclass(frozen=True)
class MinT:
    t_min: int
    closed_form: object
    satisfiable: bool


def min_t_relaxed(n: int, lam: int, B: int, s: int) -> MinT:
    """Smallest t for which the counting inequality admits a scheme with s blocks."""
    for t in range(1, lam + 1):
        lhs, rhs = counting_sides(n, lam, B, s, t)
        if lhs >= rhs:
            bound = closed_form_t(n, lam, B, s, t)
            if bound is not None and bound > 0 and lam % 2 == 0:
                assert t >= bound, "searched t below the closed-form bound"
            return MinT(t, bound, True)
    return MinT(lam, closed_form_t(n, lam, B, s, lam), False)


def space_lb_relaxed(n: int, k: int, B: int, alpha: int):
    """((1/2e) sqrt(n alpha / (k B)))^alpha blocks for ceil(k/alpha) I/Os, relaxed workload."""
    if not 1 <= alpha <= B:
        raise ValueError("need 1 <= alpha <= B")
    with mpmath.workdps(DIGITS):
        return (mpmath.sqrt(mpmath.mpf(n) * alpha / (k * B)) / (2 * mpmath.e)) ** alpha


def space_lb_exact_workload(n: int, lam: int, B: int, alpha: int):
    """(n alpha / (e lam B))^alpha blocks for ceil(lam/alpha) I/Os, exact workload."""
    if not 1 <= alpha <= B:
        raise ValueError("need 1 <= alpha <= B")
    with mpmath.workdps(DIGITS):
        return (mpmath.mpf(n) * alpha / (mpmath.e * lam * B)) ** alpha


def is_vacuous(bound) -> bool:
    return bound < 1


def build_alpha_subset_scheme(n: int, alpha: int, B: int, max_n: int = ALPHA_SUBSET_MAX_N) -> IndexingScheme:
    """One block per alpha-subset: any lambda-set is covered by ceil(lam/alpha) blocks."""
    if not 1 <= alpha <= B:
        raise ValueError("need 1 <= alpha <= B")
    if alpha > n:
        raise ValueError("alpha cannot exceed n")
    if n > max_n:
        raise ValueError(f"C({n}, {alpha}) blocks exceed the n <= {max_n} budget")
    blocks = itertools.combinations(range(1, n + 1), alpha)
    return IndexingScheme(Instance(n), B, blocks)


@dataclass(frozen=True)
class TradeoffReport:
    n: int
    lam: int
    B: int
    s: int
    alpha: int
    t_min: int
    satisfiable: bool
    closed_form: object
    space_lb_relaxed: object
    space_lb_exact: object

    @classmethod
    def evaluate(cls, n, lam, B, s, alpha):
        mt = min_t_relaxed(n, lam, B, s)
        return cls(n, lam, B, s, alpha, mt.t_min, mt.satisfiable, mt.closed_form,
                   space_lb_relaxed(n, lam, B, alpha), space_lb_exact_workload(n, lam, B, alpha))

    def row(self, digits: int = 15) -> list[str]:
        def fmt(x):
            return "" if x is None else mpmath.nstr(x, digits)
        return [str(self.n), str(self.lam), str(self.B), str(self.s), str(self.alpha),
                str(self.t_min), fmt(self.closed_form), fmt(self.space_lb_relaxed),
                fmt(self.space_lb_exact)]


CSV_COLUMNS = ["n", "lambda", "B", "s", "alpha", "t_min", "closed_form",
               "space_lb_relaxed", "space_lb_exact"]
