"""Conditioned sampling: rejection, the rotation trick, preorder decoding."""

from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import gwroot as g
from gwroot.errors import (
    AttemptsExhaustedError,
    InfeasibleSizeError,
    InvalidSequenceError,
)
from gwroot.sampler import (
    DegreeSequence,
    cycle_offsets,
    default_max_attempts,
    sample_degree_matrix,
)


class TestFeasibility:
    def test_parity_of_full_binary(self, fullbinary):
        assert g.is_feasible(fullbinary, 3)
        assert g.is_feasible(fullbinary, 7)
        assert not g.is_feasible(fullbinary, 4)
        assert not g.is_feasible(fullbinary, 100)

    def test_period_three(self, special3):
        # sizes must satisfy n = 1 mod 3 and be reachable
        assert g.is_feasible(special3, 4)
        assert g.is_feasible(special3, 31)
        assert not g.is_feasible(special3, 5)
        assert not g.is_feasible(special3, 30)

    def test_trivial_sizes(self, binom2, fullbinary):
        assert g.is_feasible(binom2, 1)
        assert g.is_feasible(fullbinary, 1)
        assert g.is_feasible(binom2, 64)

    def test_binomial_k2_cannot_exceed_arity(self, binom2):
        # every n >= 1 works for k-ary: the degree walk can always finish
        for n in range(1, 30):
            assert g.is_feasible(binom2, n)


class TestDegreeSequence:
    def test_valid_preorder(self):
        assert DegreeSequence((1, 1, 1, 0)).is_valid_preorder()
        assert DegreeSequence((2, 1, 0, 0)).is_valid_preorder()
        assert DegreeSequence((0,)).is_valid_preorder()

    def test_invalid_preorder(self):
        assert not DegreeSequence((0, 1, 1)).is_valid_preorder()
        assert not DegreeSequence((1, 0, 1)).is_valid_preorder()

    def test_wrong_total(self):
        assert not DegreeSequence((2, 2, 0)).is_valid_preorder()


class TestCycleRotation:
    def test_frozen_examples(self):
        rotated, off = g.cycle_rotate(DegreeSequence((0, 1, 1)))
        assert off == 1
        assert rotated.degrees == (1, 1, 0)
        rotated, off = g.cycle_rotate(DegreeSequence((1, 1, 0)))
        assert off == 0
        assert rotated.degrees == (1, 1, 0)

    def test_vectorised_offsets_match(self):
        seqs = [(0, 0, 1, 2), (2, 0, 1, 0), (1, 1, 1, 0), (0, 3, 0, 0)]
        matrix = np.array(seqs)
        offs = cycle_offsets(matrix)
        for row, off in zip(seqs, offs):
            _, single = g.cycle_rotate(DegreeSequence(row))
            assert single == off

    def test_rejects_wrong_sum(self):
        with pytest.raises(InvalidSequenceError):
            g.cycle_rotate(DegreeSequence((1, 1, 1)))

    @settings(max_examples=120, deadline=None)
    @given(st.data())
    def test_exactly_one_valid_rotation(self, data):
        n = data.draw(st.integers(1, 10))
        # random composition of n-1 into n non-negative parts
        cuts = data.draw(
            st.lists(st.integers(0, n - 1), min_size=n - 1, max_size=n - 1)
        )
        seq = [0] * n
        for c in cuts:
            seq[c % n] += 1
        seq = tuple(seq)
        valid = [
            r
            for r in range(n)
            if DegreeSequence(seq[r:] + seq[:r]).is_valid_preorder()
        ]
        assert len(valid) == 1
        rotated, off = g.cycle_rotate(DegreeSequence(seq))
        assert off == valid[0]
        assert rotated.is_valid_preorder()


class TestBuildTree:
    def test_frozen_decode(self):
        t = g.build_rooted_tree(DegreeSequence((2, 1, 0, 0)))
        assert t.parent_array() == [-1, 0, 1, 0]
        t = g.build_rooted_tree(DegreeSequence((1, 2, 0, 0)))
        assert t.parent_array() == [-1, 0, 1, 1]

    def test_single_node(self):
        t = g.build_rooted_tree(DegreeSequence((0,)))
        assert t.n == 1 and t.root == 0

    def test_invalid_sequence_rejected(self):
        with pytest.raises(InvalidSequenceError):
            g.build_rooted_tree(DegreeSequence((0, 1, 1)))


class TestSampling:
    def test_matrix_shape_and_sums(self, binom2):
        rng = np.random.default_rng(5)
        m = sample_degree_matrix(binom2, 12, 200, rng)
        assert m.shape == (200, 12)
        assert np.all(m.sum(axis=1) == 11)
        assert m.max() <= 2

    def test_determinism(self, geometric12):
        a = g.sample_conditional_tree(geometric12, 30, np.random.default_rng(42))
        b = g.sample_conditional_tree(geometric12, 30, np.random.default_rng(42))
        assert a.parent_array() == b.parent_array()

    def test_sampled_tree_size(self, poisson1):
        rng = np.random.default_rng(7)
        for n in (1, 2, 5, 40):
            t = g.sample_conditional_tree(poisson1, n, rng)
            assert t.n == n

    def test_infeasible_size(self, fullbinary):
        with pytest.raises(InfeasibleSizeError):
            g.sample_conditional_tree(fullbinary, 4, np.random.default_rng(0))

    def test_attempts_exhausted(self, poisson1):
        # acceptance at n = 4000 is ~0.6%, so a budget of 2 fails (seed frozen)
        with pytest.raises(AttemptsExhaustedError):
            g.sample_degree_sequence(
                poisson1, 4000, np.random.default_rng(0), max_attempts=2
            )

    def test_default_attempt_budget_scales(self, binom2):
        assert default_max_attempts(binom2, 4) >= 1000
        assert default_max_attempts(binom2, 10_000) > default_max_attempts(binom2, 100)

    def test_shape_frequencies_match_enumeration(self, binom2):
        # n = 4: plane shapes have conditional masses (4/7, 1/7, 1/7, 1/7)
        rng = np.random.default_rng(99)
        m = sample_degree_matrix(binom2, 4, 6000, rng)
        offs = cycle_offsets(m)
        counts = Counter()
        for row, off in zip(m, offs):
            counts[tuple(np.roll(row, -off))] += 1
        expected = {
            (1, 1, 1, 0): Fraction(4, 7),
            (1, 2, 0, 0): Fraction(1, 7),
            (2, 0, 1, 0): Fraction(1, 7),
            (2, 1, 0, 0): Fraction(1, 7),
        }
        assert set(counts) == set(expected)
        for shape, p in expected.items():
            p = float(p)
            sigma = (p * (1 - p) / 6000) ** 0.5
            assert abs(counts[shape] / 6000 - p) < 4 * sigma

    def test_child_count_census_tracks_pmf(self, poisson1):
        # pooled child-count frequencies approach the offspring law
        rng = np.random.default_rng(3)
        total = Counter()
        trees, n = 30, 300
        for _ in range(trees):
            t = g.sample_conditional_tree(poisson1, n, rng)
            total.update(g.degree_census_rooted(t))
        pool = trees * n
        for i in range(4):
            p = poisson1.prob(i)
            se = (p * (1 - p) / pool) ** 0.5
            assert abs(total[i] / pool - p) < 4 * se + 0.005
