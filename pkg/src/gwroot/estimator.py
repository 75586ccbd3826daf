"""Most-likely-root recovery from a free tree.

For a tree produced by conditioning a critical branching process on its size
and forgetting the root, the posterior probability that node u was the root
is proportional to ratio(deg(u)) with ratio(i) = i * p_i / p_{i-1}.  The
maximum-likelihood estimator therefore:

  * returns the unique node of special graph degree when one exists (its
    ratio is infinite and every other rooting has probability zero),
  * otherwise collects all nodes whose degree attains the maximal ratio
    (ties across distinct degrees with equal ratios are kept together) and
    picks one uniformly at random.

Given the tree, the chance the pick is correct is max-ratio / W where W sums
ratio(deg(v)) over all nodes; it is 1 exactly when the ratio is infinite or
the tree is a single node.  Ratio comparisons go through the distribution's
tie classes: exact rational comparison when the law is rational-backed,
relative 1e-12 otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import FrozenSet, Optional, Tuple, Union

import numpy as np

from .distribution import OffspringDistribution
from .errors import InfeasibleTreeError, InvalidParamsError
from .trees import FreeTree


@dataclass(frozen=True)
class RootEstimate:
    """Outcome of one estimation run."""

    candidates: FrozenSet[int]
    chosen: int
    max_ratio: float  # inf when a special degree was hit or n = 1
    conditional_correctness: float
    special_hit: bool
    exact_correctness: Optional[Fraction] = None


def _analyze(
    free: FreeTree, dist: OffspringDistribution
) -> Tuple[FrozenSet[int], float, bool]:
    """Candidate set, maximal ratio and whether a special degree decided it."""
    n = free.n
    if n == 1:
        return frozenset({0}), math.inf, False

    table = dist.ratio_table()
    degrees = [len(a) for a in free.neighbors]

    special_nodes = [
        v for v, d in enumerate(degrees) if d < table.size and table.special[d]
    ]
    if len(special_nodes) > 1:
        # Any rooting leaves some special-degree node with p_{deg-1} = 0
        # offspring mass, so the tree has zero probability however rooted.
        raise InfeasibleTreeError(
            "two or more nodes of special degree; no rooting has positive probability"
        )
    if special_nodes:
        return frozenset(special_nodes), math.inf, True

    if not any(d < table.size and table.eligible[d] for d in degrees):
        raise InfeasibleTreeError(
            "no node has a graph degree with positive offspring mass"
        )

    zero_rank = int(table.rank[table.size - 1])  # the zero-ratio class
    ranks = [
        int(table.rank[d]) if d < table.size else zero_rank for d in degrees
    ]
    top = max(ranks)
    omega = frozenset(v for v, r in enumerate(ranks) if r == top)
    member_degree = degrees[next(iter(omega))]
    return omega, float(table.values[member_degree]), False


def candidate_set(
    free: FreeTree, dist: OffspringDistribution
) -> Tuple[FrozenSet[int], float]:
    """All nodes whose graph degree attains the maximal ratio, plus that
    ratio (inf when a special degree occurs)."""
    omega, max_ratio, _ = _analyze(free, dist)
    return omega, max_ratio


def conditional_correctness(
    free: FreeTree,
    dist: OffspringDistribution,
    exact: bool = False,
) -> Union[float, Fraction]:
    """Probability the uniform pick from the candidate set is the true root,
    conditional on this free tree: max-ratio / sum_v ratio(deg(v))."""
    omega, max_ratio, special = _analyze(free, dist)
    if exact and not dist.is_rational:
        raise InvalidParamsError("exact correctness needs a rational-backed distribution")
    if free.n == 1 or special:
        return Fraction(1) if exact else 1.0

    table = dist.ratio_table()
    degrees = [len(a) for a in free.neighbors]
    if exact:
        member = degrees[next(iter(omega))]
        m_exact = table.lookup_exact(member)
        w_exact = Fraction(0)
        for d in degrees:
            w_exact += table.lookup_exact(d)
        return m_exact / w_exact
    w = 0.0
    for d in degrees:
        w += table.lookup_value(d)
    return max_ratio / w


def estimate_root(
    free: FreeTree,
    dist: OffspringDistribution,
    rng: np.random.Generator,
) -> RootEstimate:
    """Run the estimator once; the uniform tie-break consumes one draw."""
    omega, max_ratio, special = _analyze(free, dist)
    members = sorted(omega)
    chosen = members[int(rng.integers(len(members)))]
    correctness = conditional_correctness(free, dist)
    exact_val = (
        conditional_correctness(free, dist, exact=True) if dist.is_rational else None
    )
    return RootEstimate(
        candidates=omega,
        chosen=chosen,
        max_ratio=max_ratio,
        conditional_correctness=float(correctness),
        special_hit=special,
        exact_correctness=exact_val,
    )
