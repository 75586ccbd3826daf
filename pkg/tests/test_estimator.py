"""Root recovery: candidate sets, tie handling, correctness values."""

import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

import gwroot as g
from gwroot.errors import InfeasibleTreeError, InvalidParamsError


class TestCandidateSet:
    def test_path_endpoints_win_under_binary(self, path4, binom2):
        # degrees (1,2,2,1): ratio 2 beats ratio 1
        omega, m = g.candidate_set(path4, binom2)
        assert omega == frozenset({0, 3})
        assert m == 2.0

    def test_star_leaves_win_under_binary(self, star4, binom2):
        # center degree 3 exceeds the arity, so only leaves are eligible
        omega, m = g.candidate_set(star4, binom2)
        assert omega == frozenset({1, 2, 3})
        assert m == 2.0

    def test_single_node(self, binom2):
        free = g.free_tree_from_edges(1, [])
        omega, m = g.candidate_set(free, binom2)
        assert omega == frozenset({0})
        assert math.isinf(m)

    def test_rational_tie_spans_degrees(self, star4):
        # R_1 = R_3 = 2, so every node of the star lands in the tie
        d = g.OffspringDistribution.from_pmf(
            {0: "7/26", 1: "7/13", 2: "3/26", 3: "1/13"}
        )
        omega, m = g.candidate_set(star4, d)
        assert omega == frozenset({0, 1, 2, 3})
        assert m == 2.0
        assert g.conditional_correctness(star4, d, exact=True) == Fraction(1, 4)

    def test_irrational_tie_spans_degrees(self, path3):
        # p = (1, sqrt2, 1)/(2+sqrt2): R_1 = R_2 = sqrt2
        s = 1.0 / (2.0 + math.sqrt(2.0))
        d = g.OffspringDistribution.from_pmf({0: s, 1: math.sqrt(2.0) * s, 2: s})
        omega, _ = g.candidate_set(path3, d)
        assert omega == frozenset({0, 1, 2})
        assert g.conditional_correctness(path3, d) == pytest.approx(1 / 3, rel=1e-12)


class TestSpecialDegrees:
    def test_unique_special_node_is_certain(self, path3, fullbinary):
        # the path center is the only node of degree 2, and 2 is special
        omega, m = g.candidate_set(path3, fullbinary)
        assert omega == frozenset({1})
        assert math.isinf(m)
        assert g.conditional_correctness(path3, fullbinary) == 1.0
        est = g.estimate_root(path3, fullbinary, np.random.default_rng(0))
        assert est.chosen == 1
        assert est.special_hit
        assert est.conditional_correctness == 1.0
        assert est.exact_correctness == Fraction(1)

    def test_two_special_nodes_infeasible(self, path4, fullbinary):
        # degrees (1,2,2,1): two degree-2 nodes cannot both be the root
        with pytest.raises(InfeasibleTreeError):
            g.candidate_set(path4, fullbinary)

    def test_no_eligible_degree_infeasible(self, star4, fullbinary):
        # degrees 3 and 1 both carry zero offspring mass under {0,2}
        with pytest.raises(InfeasibleTreeError):
            g.candidate_set(star4, fullbinary)


class TestCorrectnessValues:
    def test_path_exact_fraction(self, path4, binom2):
        # M = 2, W = 2+1+1+2 = 6
        assert g.conditional_correctness(path4, binom2, exact=True) == Fraction(1, 3)
        assert g.conditional_correctness(path4, binom2) == pytest.approx(1 / 3)

    def test_poisson_is_one_over_n_bitexact(self, poisson1):
        # every finite ratio is canonically 1.0, so W = n without rounding
        rng = np.random.default_rng(11)
        for n in (2, 17, 50):
            t = g.sample_conditional_tree(poisson1, n, rng)
            free = g.forget_root(t)
            cc = g.conditional_correctness(free, poisson1)
            assert cc == 1.0 / n

    def test_geometric_closed_form_bitexact(self, geometric12):
        # W = sum deg/2 = n-1 exactly; M = maxdeg/2
        rng = np.random.default_rng(23)
        for n in (5, 31, 200):
            t = g.sample_conditional_tree(geometric12, n, rng)
            free = g.forget_root(t)
            maxdeg = max(len(a) for a in free.neighbors)
            cc = g.conditional_correctness(free, geometric12)
            assert cc == maxdeg / (2.0 * (n - 1))
            exact = g.conditional_correctness(free, geometric12, exact=True)
            assert exact == Fraction(maxdeg, 2 * (n - 1))
            assert float(exact) == cc

    def test_exact_requires_rational_backing(self, path4, poisson1):
        with pytest.raises(InvalidParamsError):
            g.conditional_correctness(path4, poisson1, exact=True)


class TestEstimateRoot:
    def test_fields(self, path4, binom2):
        est = g.estimate_root(path4, binom2, np.random.default_rng(1))
        assert est.candidates == frozenset({0, 3})
        assert est.chosen in est.candidates
        assert est.max_ratio == 2.0
        assert est.conditional_correctness == pytest.approx(1 / 3)
        assert not est.special_hit
        assert est.exact_correctness == Fraction(1, 3)

    def test_exact_field_none_without_rational_backing(self, poisson1):
        t = g.sample_conditional_tree(poisson1, 9, np.random.default_rng(2))
        est = g.estimate_root(g.forget_root(t), poisson1, np.random.default_rng(3))
        assert est.exact_correctness is None

    def test_tie_break_is_uniform(self, star4, binom2):
        rng = np.random.default_rng(77)
        trials = 30_000
        picks = Counter(
            g.estimate_root(star4, binom2, rng).chosen for _ in range(trials)
        )
        assert 0 not in picks
        sigma = (trials * (1 / 3) * (2 / 3)) ** 0.5
        for leaf in (1, 2, 3):
            assert abs(picks[leaf] - trials / 3) < 4 * sigma
