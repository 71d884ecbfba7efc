import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from knnindex.model import (CoverBudgetError, IndexingScheme, NoCoverError, QuerySpec,
                            answer_valid, cover_set_exact, cover_set_greedy, validate_scheme)

from oracles import min_cover_bruteforce


def test_valid_scheme():
    assert validate_scheme(IndexingScheme(2, 2, [{1, 2}])) is None


def test_oversized_block():
    v = validate_scheme(IndexingScheme(3, 2, [{1, 2, 3}]))
    assert v is not None and "oversized" in v.reason


def test_unknown_item():
    v = validate_scheme(IndexingScheme(3, 2, [{1, 4}]))
    assert v is not None and "unknown" in v.reason


def test_single_block_cover():
    s = IndexingScheme(4, 2, [{1, 2}, {3, 4}, {1, 3}])
    cover = cover_set_exact(s, {1, 3})
    assert cover.block_indices == (2,) and cover.cost == 1


def test_two_block_cover():
    s = IndexingScheme(4, 2, [{1, 2}, {3, 4}])
    assert cover_set_exact(s, {1, 3}).block_indices == (0, 1)


def test_lexicographic_tie_break():
    s = IndexingScheme(4, 2, [{3, 4}, {1, 2}, {1, 3}, {2, 4}])
    # {0, 1} and {2, 3} both cover everything with two blocks
    assert cover_set_exact(s, {1, 2, 3, 4}).block_indices == (0, 1)


def test_uncoverable():
    s = IndexingScheme(5, 2, [{1, 2}])
    with pytest.raises(NoCoverError) as exc:
        cover_set_exact(s, {1, 5})
    assert exc.value.missing == {5}
    with pytest.raises(NoCoverError):
        cover_set_greedy(s, {5})


def test_budget_guard():
    # every pair over 13 items: 78 mutually non-dominated blocks
    pairs = [{a, b} for a in range(1, 14) for b in range(a + 1, 14)]
    with pytest.raises(CoverBudgetError):
        cover_set_exact(IndexingScheme(13, 2, pairs), range(1, 14))
    # blocks missing the required set are pruned before the budget applies
    singles = IndexingScheme(40, 1, [{i} for i in range(1, 41)])
    assert cover_set_exact(singles, range(1, 14)).cost == 13


def test_greedy_hand_simulation():
    s = IndexingScheme(6, 3, [{1, 2, 3}, {1, 4}, {2, 5}, {3, 6}])
    greedy = cover_set_greedy(s, range(1, 7))
    assert greedy.block_indices[0] == 0 and greedy.cost == 4
    assert cover_set_exact(s, range(1, 7)).cost == 3


def test_greedy_equal_block():
    s = IndexingScheme(6, 3, [{1, 2}, {2, 3, 4}, {5, 6}])
    assert cover_set_greedy(s, {2, 3, 4}).block_indices == (1,)


def test_random_covers_match_bruteforce():
    rng = np.random.default_rng(5)
    for _ in range(200):
        blocks = [set(int(x) for x in rng.choice(np.arange(1, 11), size=rng.integers(1, 5), replace=False))
                  for _ in range(8)]
        required = set(int(x) for x in rng.choice(np.arange(1, 11), size=5, replace=False))
        s = IndexingScheme(10, 4, blocks)
        expected = min_cover_bruteforce(blocks, required)
        if expected is None:
            with pytest.raises(NoCoverError):
                cover_set_exact(s, required)
            continue
        got = cover_set_exact(s, required)
        assert (got.cost, got.block_indices) == expected


blocks_st = st.lists(st.frozensets(st.integers(1, 12), min_size=1, max_size=4), min_size=1, max_size=10)


@given(blocks_st, st.data())
@settings(max_examples=150, deadline=None)
def test_cover_cost_sandwich(blocks, data):
    universe = sorted(set().union(*blocks))
    required = data.draw(st.frozensets(st.sampled_from(universe), min_size=1))
    s = IndexingScheme(12, 4, blocks)
    exact = cover_set_exact(s, required)
    greedy = cover_set_greedy(s, required)
    assert required <= exact.items(s) and required <= greedy.items(s)
    assert exact.cost <= greedy.cost <= (math.log(len(required)) + 1) * exact.cost
    B = max(len(b) for b in blocks)
    assert math.ceil(len(required) / B) <= exact.cost <= len(required)


def test_relaxed_half_rule():
    q = QuerySpec.relaxed_set({1, 2, 3, 4})
    assert answer_valid(q, {1, 2, 9, 10})
    assert not answer_valid(q, {1, 9, 10, 11})


def test_relaxed_odd_lambda_rounds_up():
    q = QuerySpec.relaxed_set({1, 2, 3})
    assert answer_valid(q, {1, 2, 9})
    assert not answer_valid(q, {1, 8, 9})


def test_wrong_cardinality():
    with pytest.raises(ValueError):
        answer_valid(QuerySpec.exact_set({1, 2}), {1})


@given(st.frozensets(st.integers(1, 30), min_size=1, max_size=8), st.data())
def test_exact_implies_relaxed(target, data):
    extra = data.draw(st.frozensets(st.integers(31, 60), min_size=len(target), max_size=len(target)))
    keep = data.draw(st.integers(0, len(target)))
    reported = set(sorted(target)[:keep]) | set(sorted(extra)[: len(target) - keep])
    if answer_valid(QuerySpec.exact_set(target), reported):
        assert answer_valid(QuerySpec.relaxed_set(target), reported)


def test_cknn_validity_needs_points():
    with pytest.raises(ValueError):
        answer_valid(QuerySpec.cknn([0], 1, Fraction(3)), {1})
