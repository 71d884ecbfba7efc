from fractions import Fraction

import numpy as np
import pytest

from knnindex.expander import (BipartiteExpander, ExpanderError, build_expander, certify_expansion,
                               default_delta, redirect_edge, remove_edge, subset_count,
                               verify_expander)

from oracles import expansion_ok_bruteforce


def test_m_one_is_regularity():
    G = build_expander(10, 1, 3, Fraction(1, 3), seed=0, d_right=3)
    assert G.certified and all(len(nb) == 3 for nb in G.adjacency)


def test_small_certified_graph_repasses_bruteforce():
    G = build_expander(16, 2, 4, Fraction(1, 3), seed=1)
    assert G.certified and verify_expander(G).ok
    assert verify_expander(G).subsets_checked == 16 + 120
    assert expansion_ok_bruteforce(G.adjacency, 2, 4, Fraction(1, 3))


def test_hamming_sized_graph():
    G = build_expander(64, 4, 6, Fraction(1, 4), seed=7)
    assert G.certified
    assert default_delta(64, 4) == 6


@pytest.mark.parametrize("seed", range(5))
def test_checkers_agree_on_random_graphs(seed):
    rng = np.random.default_rng(seed)
    adjacency = tuple(tuple(sorted(int(x) for x in rng.choice(10, size=3, replace=False)))
                      for _ in range(9))
    for eps in (Fraction(1, 4), Fraction(1, 3), Fraction(1, 2)):
        report = certify_expansion(adjacency, 10, 3, 3, eps)
        assert report.ok == expansion_ok_bruteforce(adjacency, 3, 3, eps)


def test_removed_edge_breaks_regularity():
    G = build_expander(16, 2, 4, Fraction(1, 3), seed=2)
    report = verify_expander(remove_edge(G, 5))
    assert not report.ok and not report.regular and 5 in report.degree_violations


def test_collision_is_caught():
    # two vertices sharing all neighbors violate any eps < 1/2 at |S| = 2
    adjacency = ((0, 1, 2, 3), (0, 1, 2, 3), (4, 5, 6, 7))
    report = certify_expansion(adjacency, 8, 2, 4, Fraction(1, 3))
    assert not report.ok and report.regular
    assert set(report.worst_set) == {1, 2}


def test_redirected_edge_keeps_degrees():
    G = build_expander(16, 2, 4, Fraction(1, 3), seed=3)
    H = redirect_edge(G, np.random.default_rng(0))
    assert all(len(set(nb)) == 4 for nb in H.adjacency)
    assert verify_expander(H).ok == expansion_ok_bruteforce(H.adjacency, 2, 4, Fraction(1, 3))


def test_impossible_parameters_error():
    with pytest.raises(ExpanderError):
        build_expander(12, 3, 4, Fraction(1, 10), seed=0, d_right=6, max_retries=2)


def test_budget_and_parameter_checks():
    assert subset_count(10, 2) == 55
    with pytest.raises(ValueError):
        build_expander(200, 5, 6, Fraction(1, 4), seed=0)
    with pytest.raises(ValueError):
        build_expander(10, 2, 4, Fraction(1), seed=0)


def test_gamma_and_matrix():
    G = BipartiteExpander(2, 4, ((0, 1), (1, 3)), 2, 2, Fraction(1, 4))
    assert G.gamma([1, 2]) == {0, 1, 3}
    assert G.matrix().tolist() == [[1, 1, 0, 0], [0, 1, 0, 1]]
