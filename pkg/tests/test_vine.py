import numpy as np
import pytest

from cherrywine import (
    PreconditionError,
    VineEdge,
    VineStructure,
    cherry_to_vine,
    count_regular_vines,
    enumerate_cherry_wines,
    pair_copula_list,
    tcherry_from_cluster_set,
    tcherry_from_junction,
    validate_vine,
    vine_level_to_dot,
)
from cherrywine.vine import parse_edge_label
from conftest import FULL6_LEVELS
from oracles import brute_count_regular_vines

DELETE_V3_CHOICE = {
    3: ("deletions", (((1, 2, 3), 3), ((2, 3, 6), 3), ((3, 4, 5), 3))),
}

FULL6_CHOICES = {
    6: ("pair", (1, 6)),
    5: ("deletions", (((1, 2, 3, 4, 5), 5), ((2, 3, 4, 5, 6), 5))),
    4: ("deletions", (((1, 2, 3, 4), 4), ((2, 3, 4, 5), 2), ((2, 3, 4, 6), 4))),
    3: ("deletions", (((1, 2, 3), 3), ((2, 3, 6), 3), ((3, 4, 5), 3))),
}


def labels(wine, ell):
    return {e.label() for e in wine.level(ell)}


def full6_vine():
    tree = tcherry_from_junction([(1, 2, 3, 4, 5, 6)], [], 6)
    return cherry_to_vine(tree, FULL6_CHOICES)


class TestCherryToVine:
    def test_worked_example_with_explicit_choice(self, hub_tree):
        wine = cherry_to_vine(hub_tree, DELETE_V3_CHOICE)
        assert labels(wine, 1) == FULL6_LEVELS[1]
        assert labels(wine, 2) == FULL6_LEVELS[2]
        assert wine.truncation == 2

    def test_default_policy_deterministic_and_valid(self, hub_tree):
        w1 = cherry_to_vine(hub_tree)
        w2 = cherry_to_vine(hub_tree)
        assert w1.trees == w2.trees
        assert validate_vine(w1).ok
        # smallest-index deletion per leaf: {1,2,3}->-2, {2,3,6}->-2, {3,4,5}->-3
        assert labels(w1, 1) == {"1,3", "2,3", "3,6", "3,4", "4,5"}

    def test_spanning_tree_input_passes_through(self):
        tree = tcherry_from_junction(
            [(1, 2), (2, 3), (3, 4)], [(0, 1), (1, 2)], 2
        )
        wine = cherry_to_vine(tree)
        assert wine.truncation == 1
        assert labels(wine, 1) == {"1,2", "2,3", "3,4"}

    def test_full_vine_reproduction_level_by_level(self):
        wine = full6_vine()
        assert wine.truncation == 5
        for ell, expected in FULL6_LEVELS.items():
            assert labels(wine, ell) == expected
        assert validate_vine(wine).ok

    def test_invalid_choice_simplicial_deletion(self, hub_tree):
        # 1 is the simplicial vertex of leaf {1,2,3}; deleting it is illegal
        bad = {3: ("deletions", (((1, 2, 3), 1), ((2, 3, 6), 3), ((3, 4, 5), 3)))}
        with pytest.raises(PreconditionError, match="non-simplicial"):
            cherry_to_vine(hub_tree, bad)

    def test_invalid_choice_unknown_cluster(self, hub_tree):
        bad = {3: ("deletions", (((1, 2, 4), 2), ((2, 3, 6), 3), ((3, 4, 5), 3)))}
        with pytest.raises(PreconditionError, match="leaf clusters"):
            cherry_to_vine(hub_tree, bad)

    def test_separator_precondition_enforced(self):
        # order-3 star whose separators {1,2},{1,3},{2,3} form a triangle
        tree = tcherry_from_junction(
            [(1, 2, 3), (1, 2, 4), (1, 3, 5), (2, 3, 6)],
            [(0, 1), (0, 2), (0, 3)],
            3,
        )
        with pytest.raises(PreconditionError, match="do not form"):
            cherry_to_vine(tree)

    def test_round_trip_top_tree_equals_source(self, hub_tree):
        wine = cherry_to_vine(hub_tree)
        top = wine.level(wine.truncation)
        assert {e.constraint_set for e in top} == set(hub_tree.clusters)
        by_constraint = {e.constraint_set: e for e in top}
        for i, j, s in hub_tree.edges:
            e1 = by_constraint[hub_tree.clusters[i]]
            e2 = by_constraint[hub_tree.clusters[j]]
            assert s in set(e1.nodes) & set(e2.nodes)


class TestEnumerate:
    def test_worked_example_has_eight_variants(self, hub_tree):
        wines = enumerate_cherry_wines(hub_tree)
        assert len(wines) == 8
        # the target factorization is among them
        assert any(
            labels(w, 1) == FULL6_LEVELS[1] and labels(w, 2) == FULL6_LEVELS[2]
            for w in wines
        )
        for w in wines:
            assert validate_vine(w).ok

    def test_single_pair_cluster_gives_one(self):
        tree = tcherry_from_junction([(1, 2)], [], 2)
        assert len(enumerate_cherry_wines(tree)) == 1

    def test_single_triple_cluster_gives_three(self):
        tree = tcherry_from_junction([(1, 2, 3)], [], 3)
        wines = enumerate_cherry_wines(tree)
        assert len(wines) == 3
        t1s = {frozenset(labels(w, 1)) for w in wines}
        assert t1s == {
            frozenset({"1,2", "1,3"}),
            frozenset({"1,2", "2,3"}),
            frozenset({"1,3", "2,3"}),
        }

    def test_count_matches_brute_choice_expansion(self, rng):
        # independent expansion over explicit choice vectors, then dedup
        from cherrywine.vine import _level_choice_space

        compared = 0
        trial = 0
        while compared < 5 and trial < 25:
            trial += 1
            tree = _random_tcherry(rng, d=6, k=3)
            try:
                wines = enumerate_cherry_wines(tree)
            except PreconditionError:
                continue  # separators may legitimately fail the precondition
            seen = set()
            for choice in _level_choice_space(tree):
                wine = cherry_to_vine(tree, {3: choice})
                seen.add(frozenset(wine.all_edges()))
            assert len(wines) == len(seen)
            compared += 1
        assert compared >= 5

    def test_deterministic_order(self, hub_tree):
        a = enumerate_cherry_wines(hub_tree)
        b = enumerate_cherry_wines(hub_tree)
        assert [w.trees for w in a] == [w.trees for w in b]


def _random_tcherry(rng, d, k):
    from cherrywine import build_tcherry_greedy
    from conftest import discretized

    vals = rng.normal(size=(40, d))
    return build_tcherry_greedy(discretized(vals, 3), k).tree


class TestValidateVine:
    def test_full_six_variable_structure_valid(self):
        assert validate_vine(full6_vine()).ok

    def test_proximity_violation_detected(self):
        # T2 edge joining (1,2) and (3,4), which share no endpoint
        bad = VineStructure(
            4,
            (
                (VineEdge((1, 2)), VineEdge((3, 4)), VineEdge((2, 3))),
                (
                    VineEdge((1, 4), (2, 3)),
                    VineEdge((1, 3), (2,)),
                ),
            ),
        )
        report = validate_vine(bad)
        assert not report.ok

    def test_full_vine_edge_total(self):
        wine = full6_vine()
        assert len(pair_copula_list(wine)) == 15
        tree4 = tcherry_from_junction([(1, 2, 3, 4)], [], 4)
        wine4 = cherry_to_vine(tree4)
        assert len(pair_copula_list(wine4)) == 6  # d(d-1)/2 for d=4

    def test_non_spanning_first_tree(self):
        bad = VineStructure(3, ((VineEdge((1, 2)), VineEdge((1, 2))),))
        assert not validate_vine(bad).ok

    def test_conditioned_pair_disjointness(self):
        wine = full6_vine()
        for e in wine.all_edges():
            assert set(e.pair).isdisjoint(e.given)
            assert len(set(e.pair) | set(e.given)) == e.level + 1


class TestCounting:
    def test_six_variable_count(self):
        assert count_regular_vines(6) == 23040

    def test_small_exact_values(self):
        assert count_regular_vines(2) == 1
        assert count_regular_vines(3) == 3

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_matches_brute_enumeration(self, d):
        assert count_regular_vines(d) == brute_count_regular_vines(d)

    def test_range_guard(self):
        with pytest.raises(PreconditionError):
            count_regular_vines(21)
        with pytest.raises(PreconditionError):
            count_regular_vines(1)


class TestPairCopulaList:
    def test_worked_example_nine_edges(self, hub_tree):
        wine = cherry_to_vine(hub_tree, DELETE_V3_CHOICE)
        edges = pair_copula_list(wine)
        assert len(edges) == 9
        assert sum(1 for e in edges if not e.given) == 5
        assert sum(1 for e in edges if len(e.given) == 1) == 4

    def test_level_order(self, hub_tree):
        wine = cherry_to_vine(hub_tree)
        levels = [e.level for e in pair_copula_list(wine)]
        assert levels == sorted(levels)

    def test_k2_has_d_minus_1(self):
        tree = tcherry_from_junction([(1, 2), (2, 3), (3, 4)], [(0, 1), (1, 2)], 2)
        assert len(pair_copula_list(cherry_to_vine(tree))) == 3


class TestSerialization:
    def test_vine_json_round_trip(self, hub_tree):
        wine = cherry_to_vine(hub_tree, DELETE_V3_CHOICE)
        again = VineStructure.from_json_dict(wine.to_json_dict())
        assert again.d == wine.d
        assert again.trees == wine.trees

    def test_edge_label_round_trip(self):
        for label in ("1,2", "1,3|2", "2,5|3,4", "1,6|2,3,4,5"):
            assert parse_edge_label(label).label() == label

    def test_dot_export(self, hub_tree):
        wine = cherry_to_vine(hub_tree)
        dot1 = vine_level_to_dot(wine, 1)
        dot2 = vine_level_to_dot(wine, 2)
        assert "graph vine_tree_1" in dot1
        assert "graph vine_tree_2" in dot2
        assert dot2.count(" -- ") == 4


class TestRandomRoundTrips:
    def test_round_trip_and_validity_on_random_trees(self, rng):
        for _ in range(10):
            d = int(rng.integers(4, 7))
            k = int(rng.integers(2, 4))
            tree = _random_tcherry(rng, d=d, k=k)
            try:
                wine = cherry_to_vine(tree)
            except PreconditionError:
                continue  # separators may legitimately fail the precondition
            assert validate_vine(wine).ok
            top = wine.level(wine.truncation)
            if k >= 3:
                assert {e.constraint_set for e in top} == set(tree.clusters)
            total = sum(len(t) for t in wine.trees)
            assert total == sum(d - m for m in range(1, k))
