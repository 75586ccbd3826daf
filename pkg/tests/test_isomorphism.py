"""Canonical codes, multiplicities, embedding counts and the rooting invariant."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import gwroot as g
from gwroot.errors import NodeOutOfRangeError
from gwroot.isomorphism import (
    CodeTable,
    _all_root_codes_baseline,
    _all_root_codes_fast,
)
from gwroot.trees import free_tree_from_edges


def random_free_tree(n, rng):
    parent = [-1] + [int(rng.integers(0, i)) for i in range(1, n)]
    edges = [(i, parent[i]) for i in range(1, n)]
    return free_tree_from_edges(n, edges)


class TestCodeTable:
    def test_interning_is_stable(self):
        table = CodeTable()
        leaf = table.intern(())
        assert table.intern(()) == leaf
        chain = table.intern((leaf,))
        assert table.intern((leaf,)) == chain
        assert chain != leaf

    def test_decode_nested(self):
        table = CodeTable()
        leaf = table.intern(())
        pair = table.intern((leaf, leaf))
        assert table.decode(pair) == ((), ())


class TestAllRootCodes:
    def test_path4_pairs(self, path4):
        codes = g.all_root_codes(path4)
        assert codes[0] == codes[3]
        assert codes[1] == codes[2]
        assert codes[0] != codes[1]

    def test_star4_leaves_equal(self, star4):
        codes = g.all_root_codes(star4)
        assert codes[1] == codes[2] == codes[3]
        assert codes[0] != codes[1]

    def test_fast_equals_baseline_small(self, path4, star4, spider123, hub11):
        for free in (path4, star4, spider123, hub11):
            table = CodeTable()
            assert _all_root_codes_fast(free, table) == _all_root_codes_baseline(
                free, table
            )

    @pytest.mark.parametrize("n", [2, 3, 5, 10, 25, 60, 120, 200])
    def test_fast_equals_baseline_random(self, n):
        # The rerooting shortcut must agree with per-root recomputation.
        rng = np.random.default_rng(n)
        for _ in range(3):
            free = random_free_tree(n, rng)
            table = CodeTable()
            fast = g.all_root_codes(free, table, method="fast")
            base = g.all_root_codes(free, table, method="baseline")
            assert fast == base

    def test_unknown_method(self, path4):
        with pytest.raises(ValueError):
            g.all_root_codes(path4, method="quantum")

    def test_shared_table_keeps_trees_distinct(self, path4, star4):
        # Regression: an empty shared table must be reused, not replaced;
        # with per-call fresh tables the two trees' codes collide.
        table = CodeTable()
        min_path = min(g.all_root_codes(path4, table).values())
        min_star = min(g.all_root_codes(star4, table).values())
        assert min_path != min_star


class TestMultiplicity:
    def test_path4(self, path4):
        assert g.multiplicities(path4) == {0: 2, 1: 2, 2: 2, 3: 2}

    def test_star4(self, star4):
        assert g.multiplicities(star4) == {0: 1, 1: 3, 2: 3, 3: 3}

    def test_spider_all_ones(self, spider123):
        assert set(g.multiplicities(spider123).values()) == {1}

    def test_single_lookup_matches(self, hub11):
        all_m = g.multiplicities(hub11)
        for u in (0, 4, 9):
            assert g.multiplicity(hub11, u) == all_m[u]

    def test_out_of_range(self, path4):
        with pytest.raises(NodeOutOfRangeError):
            g.multiplicity(path4, 9)

    def test_class_sizes_sum_to_n(self, hub11):
        from collections import Counter

        codes = g.all_root_codes(hub11)
        assert sum(Counter(codes.values()).values()) == hub11.n


class TestCorrectionAndEmbeddings:
    def test_star4_center_rooting(self, star4):
        corr = g.correction_factors(star4, 0)
        assert corr[0] == 6  # three identical leaf children
        assert corr[1] == corr[2] == corr[3] == 1

    def test_star4_leaf_rooting(self, star4):
        corr = g.correction_factors(star4, 1)
        assert corr[0] == 2  # two identical leaves left under the center
        assert corr[1] == 1

    def test_embedding_counts(self, path4, star4):
        assert [g.embedding_count(path4, u) for u in range(4)] == [1, 2, 2, 1]
        assert [g.embedding_count(star4, u) for u in range(4)] == [1, 1, 1, 1]

    def test_hub11_hub_rooting(self, hub11):
        corr = g.correction_factors(hub11, 0)
        # hub: 3 identical leaves x 2 identical chains -> 3! * 2!
        assert corr[0] == 12
        assert corr[8] == 2  # two identical leaves under node 8


class TestRootingInvariant:
    def test_frozen_values(self, path4, star4, hub11):
        assert set(g.rooting_invariant_all(path4).values()) == {2}
        assert set(g.rooting_invariant_all(star4).values()) == {6}
        assert set(g.rooting_invariant_all(hub11).values()) == {24}

    def test_single_rooting_matches_all(self, spider123):
        full = g.rooting_invariant_all(spider123)
        for u in (0, 3, 6):
            assert g.rooting_invariant(spider123, u) == full[u]

    @pytest.mark.parametrize("n", [2, 7, 19, 33, 50])
    def test_invariant_across_random_rootings(self, n):
        rng = np.random.default_rng(1000 + n)
        for _ in range(4):
            free = random_free_tree(n, rng)
            assert len(set(g.rooting_invariant_all(free).values())) == 1

    @settings(max_examples=40, deadline=None)
    @given(st.data())
    def test_invariant_property(self, data):
        n = data.draw(st.integers(2, 24))
        seed = data.draw(st.integers(0, 2**32 - 1))
        free = random_free_tree(n, np.random.default_rng(seed))
        values = set(g.rooting_invariant_all(free).values())
        assert len(values) == 1
        # exact integers, never floats
        assert all(isinstance(v, int) for v in values)
