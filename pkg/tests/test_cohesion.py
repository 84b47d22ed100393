import numpy as np
import pytest

from ctwm.cohesion import (
    DecisiveGraph,
    cohesive_closure,
    decisive_links,
    enumerate_minimal_cohesive,
    has_globally_reachable_node,
    is_cohesive,
    is_maximal_cohesive,
    _decisive_by_enumeration,
    _decisive_meet_in_middle,
)
from ctwm.errors import DegreeTooLargeError, EmptySetError, NotCohesiveError
from ctwm.net import validate_and_normalize

from .oracles import (
    all_cohesive_sets,
    decisive_brute,
    has_globally_reachable_brute,
    is_maximal_brute,
    maximal_cohesive_brute,
    min_hitting_brute,
    minimal_cohesive_brute,
    random_row_stochastic,
)


class TestPredicates:
    def test_cohesive_examples(self, remark_matrix):
        assert is_cohesive({0, 2}, remark_matrix)
        assert is_cohesive({0, 1, 2}, remark_matrix)
        assert not is_cohesive({0}, remark_matrix)

    def test_full_set_always_cohesive(self, rng):
        for _ in range(50):
            W = random_row_stochastic(rng, int(rng.integers(1, 9)))
            assert is_cohesive(range(W.n), W)
            assert is_maximal_cohesive(range(W.n), W)

    def test_maximal_examples(self, remark_matrix):
        assert is_maximal_cohesive({0, 2}, remark_matrix)
        assert is_maximal_cohesive({1}, remark_matrix)

    def test_maximal_requires_cohesive(self, remark_matrix):
        with pytest.raises(NotCohesiveError):
            is_maximal_cohesive({0}, remark_matrix)

    def test_empty_set(self, remark_matrix):
        with pytest.raises(EmptySetError):
            is_cohesive(set(), remark_matrix)

    def test_out_of_range(self, remark_matrix):
        with pytest.raises(ValueError):
            is_cohesive({0, 5}, remark_matrix)


class TestClosure:
    def test_already_maximal(self, remark_matrix):
        assert cohesive_closure({0, 2}, remark_matrix) == {0, 2}
        assert cohesive_closure({0, 1, 2}, remark_matrix) == {0, 1, 2}

    def test_absorbs_majority_listeners(self):
        W = validate_and_normalize([[0.6, 0.4, 0.0], [0.6, 0.2, 0.2], [0.0, 0.4, 0.6]])
        assert cohesive_closure({0}, W) == {0, 1}

    def test_not_cohesive_rejected(self, remark_matrix):
        with pytest.raises(NotCohesiveError):
            cohesive_closure({2}, remark_matrix)

    def test_closure_is_maximal_cohesive(self, rng):
        for _ in range(100):
            W = random_row_stochastic(rng, int(rng.integers(2, 9)), sparse_p=0.6)
            for s in minimal_cohesive_brute(W):
                closed = cohesive_closure(s, W)
                assert is_cohesive(closed, W)
                assert is_maximal_cohesive(closed, W)


class TestEnumeration:
    def test_reference_network(self, remark_matrix):
        rep = enumerate_minimal_cohesive(remark_matrix)
        assert [sorted(s) for s in rep.minimal_cohesive_sets] == [[1], [0, 2]]
        assert not rep.only_global_maximal
        assert rep.complete

    def test_uniform_rows(self):
        W = validate_and_normalize(np.ones((3, 3)))
        rep = enumerate_minimal_cohesive(W)
        assert [sorted(s) for s in rep.minimal_cohesive_sets] == [[0, 1], [0, 2], [1, 2]]
        assert rep.only_global_maximal

    def test_single_node(self):
        rep = enumerate_minimal_cohesive(validate_and_normalize([[1.0]]))
        assert [sorted(s) for s in rep.minimal_cohesive_sets] == [[0]]
        assert rep.only_global_maximal

    def test_matches_bruteforce(self, rng):
        for trial in range(150):
            n = int(rng.integers(2, 9))
            W = random_row_stochastic(rng, n, sparse_p=0.6 if trial % 2 else None,
                                      dyadic=trial % 3 == 0)
            rep = enumerate_minimal_cohesive(W)
            assert rep.complete
            got = sorted([tuple(sorted(s)) for s in rep.minimal_cohesive_sets])
            want = sorted([tuple(sorted(s)) for s in minimal_cohesive_brute(W)])
            assert got == want
            brute_only_global = all(
                set(s) == set(range(n)) for s in maximal_cohesive_brute(W))
            assert rep.only_global_maximal == brute_only_global

    def test_no_listed_set_contains_another(self, rng):
        for _ in range(60):
            W = random_row_stochastic(rng, int(rng.integers(2, 10)), sparse_p=0.5)
            sets = enumerate_minimal_cohesive(W).minimal_cohesive_sets
            for a in sets:
                for b in sets:
                    assert a is b or not (a < b)

    def test_union_of_cohesive_is_cohesive(self, rng):
        for _ in range(80):
            W = random_row_stochastic(rng, int(rng.integers(2, 9)), sparse_p=0.6)
            sets = enumerate_minimal_cohesive(W).minimal_cohesive_sets
            for a in sets:
                for b in sets:
                    assert is_cohesive(a | b, W)

    def test_complement_of_proper_maximal_is_maximal(self, rng):
        checked = 0
        for _ in range(120):
            W = random_row_stochastic(rng, int(rng.integers(2, 11)), sparse_p=0.5)
            for m in maximal_cohesive_brute(W):
                if len(m) == W.n:
                    continue
                comp = frozenset(range(W.n)) - m
                assert is_cohesive(comp, W) and is_maximal_cohesive(comp, W)
                checked += 1
        assert checked > 50

    def test_removing_any_member_kills_cohesion_below(self, rng):
        # inclusion-minimality: no proper subset of a reported set is cohesive
        for _ in range(60):
            n = int(rng.integers(2, 11))
            W = random_row_stochastic(rng, n, sparse_p=0.5)
            cohesive = set(all_cohesive_sets(W))
            for s in enumerate_minimal_cohesive(W).minimal_cohesive_sets:
                for drop in s:
                    rest = s - {drop}
                    assert not any(c <= rest for c in cohesive if c)

    def test_hitting_reduction(self, rng):
        # a set hits every cohesive set iff it hits every minimal one
        for _ in range(40):
            n = int(rng.integers(2, 9))
            W = random_row_stochastic(rng, n, sparse_p=0.6)
            cohesive = all_cohesive_sets(W)
            minimal = enumerate_minimal_cohesive(W).minimal_cohesive_sets
            for _ in range(20):
                p = {int(i) for i in np.flatnonzero(rng.random(n) < 0.4)}
                hits_all = all(p & s for s in cohesive)
                hits_min = all(p & s for s in minimal)
                assert hits_all == hits_min

    def test_budget_truncation(self, remark_matrix):
        rep = enumerate_minimal_cohesive(remark_matrix, limit=2)
        assert not rep.complete


class TestDecisiveLinks:
    def test_reference_network(self, remark_matrix):
        g = decisive_links(remark_matrix)
        assert (0, 1) in g.edges
        assert (1, 1) in g.edges
        for i in range(3):
            for j in range(3):
                assert ((i, j) in g.edges) == decisive_brute(remark_matrix, i, j)

    def test_dictator_self_link(self):
        W = validate_and_normalize([[1.0, 0.0], [0.5, 0.5]])
        g = decisive_links(W)
        assert (0, 0) in g.edges

    def test_even_split_row_is_indecisive(self):
        W = validate_and_normalize([[0.0, 0.5, 0.5], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        g = decisive_links(W)
        assert not any(a == 0 for (a, _) in g.edges)

    def test_matches_bruteforce(self, rng):
        for trial in range(120):
            n = int(rng.integers(2, 9))
            W = random_row_stochastic(rng, n, sparse_p=0.7 if trial % 2 else None,
                                      dyadic=trial % 3 == 0)
            g = decisive_links(W)
            for i in range(n):
                for j in range(n):
                    assert ((i, j) in g.edges) == decisive_brute(W, i, j), (trial, i, j)

    def test_every_node_has_a_decisive_out_link(self, rng):
        for _ in range(60):
            W = random_row_stochastic(rng, int(rng.integers(1, 10)))
            g = decisive_links(W)
            sources = {a for (a, _) in g.edges}
            assert sources == set(range(W.n))

    def test_meet_in_middle_agrees_with_enumeration(self, rng):
        for _ in range(10):
            w = rng.random(21)
            w = w / w.sum()
            full = _decisive_by_enumeration(w)
            mitm = [_decisive_meet_in_middle(w, b) for b in range(w.size)]
            assert full == mitm

    def test_degree_limit(self):
        raw = np.ones((26, 26))
        W = validate_and_normalize(raw)
        with pytest.raises(DegreeTooLargeError):
            decisive_links(W)


class TestReachability:
    def test_examples(self):
        complete = DecisiveGraph(3, frozenset((i, j) for i in range(3) for j in range(3) if i != j))
        assert has_globally_reachable_node(complete)
        two_cycles = DecisiveGraph(4, frozenset([(0, 1), (1, 0), (2, 3), (3, 2)]))
        assert not has_globally_reachable_node(two_cycles)
        path = DecisiveGraph(3, frozenset([(0, 1), (1, 2)]))
        assert has_globally_reachable_node(path)

    def test_matches_bruteforce(self, rng):
        for _ in range(300):
            n = int(rng.integers(1, 8))
            edges = {(int(i), int(j)) for i in range(n) for j in range(n)
                     if i != j and rng.random() < 0.25}
            g = DecisiveGraph(n, frozenset(edges))
            assert has_globally_reachable_node(g) == has_globally_reachable_brute(n, edges)


class TestReportSerialization:
    def test_json_shape(self, remark_matrix):
        doc = enumerate_minimal_cohesive(remark_matrix).to_json_dict()
        assert doc == {
            "minimal_cohesive_sets": [[1], [0, 2]],
            "only_global_maximal": False,
            "complete": True,
        }


def test_minimal_pinning_reduction_sanity(rng):
    # pinning the brute-force hitting set of the minimal sets covers all cohesive sets
    for _ in range(30):
        n = int(rng.integers(2, 8))
        W = random_row_stochastic(rng, n, sparse_p=0.6)
        minimal = enumerate_minimal_cohesive(W).minimal_cohesive_sets
        hit = min_hitting_brute(list(minimal), n)
        assert all(hit & s for s in all_cohesive_sets(W))
