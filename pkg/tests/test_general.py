import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from knnindex import metrics
from knnindex.general import (answer_general_3apx, build_general_3apx, from_sidecar,
                              make_tightness_instance, proof_case, sidecar)
from knnindex.model import CoverBudgetError, cover_set_exact, cover_set_greedy
from knnindex.oracle import certify_ck_answer, knn_exact


def line(*xs):
    return metrics.from_rationals([[x] for x in xs])


def test_block_counts():
    P = line(0, 1, 2, 3)
    assert build_general_3apx(P, 2, 1, "l1").scheme.space_usage == 8
    assert build_general_3apx(P, 2, 64, "l1").scheme.space_usage == 4


def test_invalid_parameters():
    P = line(0, 1)
    with pytest.raises(ValueError):
        build_general_3apx(P, 3, 1, "l1")
    with pytest.raises(ValueError):
        build_general_3apx(P, 1, 0, "l1")


def test_tightness_lists():
    P, q = make_tightness_instance(5, Fraction(1, 10))
    idx = build_general_3apx(P, 5, 2, "l1")
    lst = set(idx.neighbors_of(1))
    assert 5 not in lst and 6 in lst
    reported, io = answer_general_3apx(idx, q)
    assert reported == {1, 2, 3, 4, 6} and io == 3
    assert metrics.distance(P.point(6), q, "l1") == 3 * P.scale // 2


@pytest.mark.parametrize("k,eps,expected", [(5, Fraction(1, 10), Fraction(30, 11)),
                                            (3, Fraction(1, 2), Fraction(2))])
def test_tightness_ratio(k, eps, expected):
    P, q = make_tightness_instance(k, eps)
    idx = build_general_3apx(P, k, 1, "l1")
    reported, _ = answer_general_3apx(idx, q)
    cert = certify_ck_answer(P, q, k, 3, reported, "l1")
    assert cert.ok and cert.worst_ratio == expected == 3 / (1 + eps)
    assert cert.worst_ratio > 3 * (1 - eps)


def test_tightness_far_point_always_three_halves():
    for eps in (Fraction(1, 7), Fraction(9, 10), Fraction(1, 1000)):
        P, q = make_tightness_instance(5, eps)
        assert metrics.real_distance(metrics.distance(P.point(6), q, "l1"), P.scale, "l1") == Fraction(3, 2)


def test_tightness_parameter_checks():
    with pytest.raises(ValueError):
        make_tightness_instance(2, Fraction(1, 2))
    for eps in (0, 1, Fraction(3, 2)):
        with pytest.raises(ValueError):
            make_tightness_instance(4, eps)


def test_query_on_data_point_returns_its_list():
    rng = np.random.default_rng(4)
    P = metrics.random_points(rng, 30, 5, "l1")
    idx = build_general_3apx(P, 4, 3, "l1")
    for i in (1, 7, 30):
        reported, _ = answer_general_3apx(idx, P.point(i))
        assert reported == set(idx.neighbors_of(i))
        assert certify_ck_answer(P, P.point(i), 4, 1, reported, "l1").ok


def test_lists_match_oracle_and_contain_self():
    rng = np.random.default_rng(5)
    for metric in metrics.METRICS:
        P = metrics.random_points(rng, 25, 4, metric)
        idx = build_general_3apx(P, 6, 4, metric)
        for i in range(1, 26):
            lst = idx.neighbors_of(i)
            assert lst[0] == i
            want = knn_exact(P, P.point(i), 6, metric)
            got = metrics.point_distances(P, P.point(i), metric)[np.asarray(lst) - 1]
            assert tuple(int(x) for x in got) == want.distances


def test_hundred_random_hamming_instances():
    rng = np.random.default_rng(6)
    for _ in range(100):
        n = int(rng.integers(5, 201))
        k = int(rng.integers(1, min(20, n) + 1))
        d = int(rng.integers(4, 33))
        P = metrics.bit_points(rng.integers(0, 2, (n, d)))
        idx = build_general_3apx(P, k, int(rng.choice([1, 4, 64])), "hamming")
        for _ in range(5):
            q = rng.integers(0, 2, d)
            reported, io = answer_general_3apx(idx, q)
            assert certify_ck_answer(P, q, k, 3, reported, "hamming").ok
            assert io == math.ceil(k / idx.block_size)


@given(st.integers(0, 100_000), st.sampled_from(metrics.METRICS))
@settings(max_examples=80, deadline=None)
def test_three_approximation_and_identities(seed, metric):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 40))
    k = int(rng.integers(1, n + 1))
    B = int(rng.choice([1, 2, 4, 64]))
    P = metrics.random_points(rng, n, int(rng.integers(1, 6)), metric)
    idx = build_general_3apx(P, k, B, metric)
    assert idx.scheme.space_usage == n * math.ceil(k / B)
    q = metrics.random_query(rng, P)
    reported, io = answer_general_3apx(idx, q)
    assert certify_ck_answer(P, q, k, 3, reported, metric).ok
    assert io == math.ceil(k / B)
    # any cover needs ceil(k/B) blocks and the group supplies exactly that many
    try:
        assert cover_set_exact(idx.scheme, reported).cost == io
    except CoverBudgetError:
        assert cover_set_greedy(idx.scheme, reported).cost >= io == math.ceil(len(reported) / B)


def test_each_proof_case_realized_with_its_bound():
    rng = np.random.default_rng(8)
    seen = {}
    for _ in range(4000):
        n = int(rng.integers(3, 9))
        k = int(rng.integers(2, n + 1))
        P = metrics.dense_points(rng.integers(-8, 9, (n, 1)), scale=1)
        q = rng.integers(-8, 9, 1)
        idx = build_general_3apx(P, k, 1, "l1")
        case, factor = proof_case(idx, q)
        reported, _ = answer_general_3apx(idx, q)
        assert certify_ck_answer(P, q, k, factor, reported, "l1").ok, (case, P.coords, q)
        seen[case] = seen.get(case, 0) + 1
    assert set(seen) == {1, 2, 3, 4}


def test_sidecar_round_trip():
    rng = np.random.default_rng(9)
    P = metrics.random_points(rng, 12, 3, "linf")
    idx = build_general_3apx(P, 5, 2, "linf")
    again = from_sidecar(P, idx.scheme, sidecar(idx))
    assert again.per_point_lists == idx.per_point_lists
    assert again.block_groups == idx.block_groups
