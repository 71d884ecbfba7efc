import math
from fractions import Fraction

import numpy as np
import pytest

from knnindex import metrics
from knnindex.hamming import (AnswerNotGuaranteed, HammingBuildError, ParityMap, answer_hamming,
                              answer_hamming_all_maps, apply_map, build_hamming_index, from_manifest,
                              manifest, map_preserves_distinction, materialized_scheme, Table)
from knnindex.oracle import certify_ck_answer, knn_exact

from oracles import parity_by_hand


def all_queries(d):
    return [metrics.to_bits(v, d) for v in range(2 ** d)]


def test_empty_subsets_give_zero():
    t = ParityMap(np.zeros((3, 5), dtype=bool))
    assert apply_map(t, [1, 1, 0, 1, 1]).tolist() == [0, 0, 0]


def test_identity_map():
    t = ParityMap.identity(6)
    x = np.array([1, 0, 1, 1, 0, 0])
    assert apply_map(t, x).tolist() == x.tolist()


def test_fixed_seed_parities_by_hand():
    t = ParityMap.sample(8, 4, 1, (123,), rate_base=1)
    x = [1, 0, 1, 1, 0, 0, 1, 0]
    assert apply_map(t, x).tolist() == parity_by_hand(t.subsets.tolist(), x)
    # the sample is reproducible from its seed
    assert np.array_equal(ParityMap.sample(8, 4, 1, (123,), rate_base=1).subsets, t.subsets)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        apply_map(ParityMap.identity(4), [0, 1, 1])


def test_distinction_identity_and_constant():
    rng = np.random.default_rng(0)
    P = metrics.bit_points(rng.integers(0, 2, (30, 8)))
    q = rng.integers(0, 2, 8)
    assert map_preserves_distinction(ParityMap.identity(8), P, q, 2, 2)
    dist = metrics.point_distances(P, q, "hamming")
    assert (dist <= 2).any() and (dist > 4).any()
    assert not map_preserves_distinction(ParityMap(np.zeros((1, 8), dtype=bool)), P, q, 2, 2)


def test_small_full_build():
    rng = np.random.default_rng(3)
    P = metrics.bit_points(rng.integers(0, 2, (8, 4)))
    index = build_hamming_index(P, 2, 3, 1, seed=1)
    assert len(index.designation) == 16
    for q in all_queries(4):
        reported, io = answer_hamming(index, q)
        assert io == 2
        assert certify_ck_answer(P, q, 2, 3, reported, "hamming").ok


def test_k_equals_n_returns_everything():
    rng = np.random.default_rng(4)
    P = metrics.bit_points(rng.integers(0, 2, (6, 5)))
    index = build_hamming_index(P, 6, 2, 4, seed=0)
    for q in all_queries(5)[::3]:
        assert sorted(answer_hamming(index, q)[0]) == list(range(1, 7))


def test_retained_map_preserves_distinction_under_strict_criterion():
    rng = np.random.default_rng(5)
    P = metrics.bit_points(rng.integers(0, 2, (64, 10)))
    queries = [rng.integers(0, 2, 10) for _ in range(40)]
    index = build_hamming_index(P, 4, 2, 4, D=64, certify="sampled", queries=queries,
                                criterion="distinction", seed=2)
    for q in queries:
        r, j = index.designation[metrics.from_bits(q)]
        assert map_preserves_distinction(index.radii[r].maps[j], P, q, r, 2)
        assert certify_ck_answer(P, q, 4, 2, answer_hamming(index, q)[0], "hamming").ok


def test_sampled_mode_rejects_uncertified():
    rng = np.random.default_rng(6)
    P = metrics.bit_points(rng.integers(0, 2, (20, 8)))
    q = P.point(1)
    index = build_hamming_index(P, 2, 2, 2, certify="sampled", queries=[q], seed=0)
    assert certify_ck_answer(P, q, 2, 2, answer_hamming(index, q)[0], "hamming").ok
    other = 1 - q
    if metrics.from_bits(other) not in index.designation:
        with pytest.raises(AnswerNotGuaranteed, match="not guaranteed"):
            answer_hamming(index, other)


def test_retries_exhausted_reports_statistics():
    rng = np.random.default_rng(7)
    P = metrics.bit_points(rng.integers(0, 2, (40, 8)))
    with pytest.raises(HammingBuildError) as exc:
        build_hamming_index(P, 3, Fraction(11, 10), 1, D=1, R=1, max_retries=2, seed=0)
    assert exc.value.stats["uncovered"] > 0


def test_parameter_checks():
    P = metrics.bit_points([[0, 1], [1, 1]])
    with pytest.raises(ValueError):
        build_hamming_index(P, 1, 1, 1)
    with pytest.raises(ValueError):
        build_hamming_index(metrics.dense_points([[0, 1]]), 1, 2, 1)
    with pytest.raises(ValueError):
        build_hamming_index(metrics.bit_points(np.zeros((2, 20), dtype=int)), 1, 2, 1)


def test_fallback_over_all_maps_certifies():
    rng = np.random.default_rng(8)
    P = metrics.bit_points(rng.integers(0, 2, (32, 6)))
    index = build_hamming_index(P, 3, 2, 2, seed=4)
    for q in all_queries(6):
        reported, io = answer_hamming_all_maps(index, q)
        assert certify_ck_answer(P, q, 3, 2, reported, "hamming").ok
        assert io == index.R * math.ceil(3 / 2)


def test_space_accounting():
    rng = np.random.default_rng(9)
    P = metrics.bit_points(rng.integers(0, 2, (16, 6)))
    index = build_hamming_index(P, 3, 2, 2, seed=0)
    assert index.space_blocks == index.table_count * 2 ** index.D * 2
    assert index.space_blocks <= index.space_bound
    scheme, where = materialized_scheme(index)
    assert all(len(w["blocks"]) == 2 for w in where)
    assert all(len(b) <= 2 for b in scheme.blocks)


def test_more_maps_never_lose_coverage():
    # map j is seeded independently of R, so a larger R only adds maps
    rng = np.random.default_rng(10)
    P = metrics.bit_points(rng.integers(0, 2, (48, 8)))
    queries = [rng.integers(0, 2, 8) for _ in range(60)]
    c = Fraction(5, 4)

    def covered(R):
        count = 0
        for q in queries:
            r = knn_exact(P, q, 3, "hamming").kth_distance
            tables = [Table(ParityMap.sample(8, 6, r, (3, r, 0, j)), P, 3) for j in range(R)]
            count += any(certify_ck_answer(P, q, 3, c, t.lookup(q), "hamming").ok for t in tables)
        return count

    counts = [covered(R) for R in (1, 2, 4, 8, 16)]
    assert counts == sorted(counts) and counts[0] < counts[-1]


@pytest.mark.stochastic
def test_success_rate_grows_with_D():
    """Stochastic: averaged over 30 seeds, longer maps separate near from far more often."""
    rng = np.random.default_rng(11)
    P = metrics.bit_points(rng.integers(0, 2, (64, 10)))
    queries = [rng.integers(0, 2, 10) for _ in range(20)]
    r, c = 2, 2
    means = []
    for D in (2, 8, 32, 96):
        hits = [map_preserves_distinction(ParityMap.sample(10, D, r, (s, D)), P, q, r, c)
                for s in range(30) for q in queries]
        means.append(np.mean(hits))
    assert means == sorted(means), means


def test_manifest_round_trip():
    rng = np.random.default_rng(12)
    P = metrics.bit_points(rng.integers(0, 2, (20, 6)))
    index = build_hamming_index(P, 2, 2, 1, seed=5)
    again = from_manifest(P, manifest(index))
    for q in all_queries(6):
        assert answer_hamming(again, q) == answer_hamming(index, q)
