"""Brute-force references: exact posteriors, exhaustive enumeration and
structural checks.

These routines recompute from first principles what the estimator obtains
from degree ratios, so the two can be played against each other in tests:

  root_posterior      P{root = u | free tree}, via likelihood x embeddings /
                      multiplicity per rooting, normalised.  Exact rational
                      arithmetic for rational-backed laws, log-space sums
                      otherwise.
  enumerate_conditional_trees
                      every valid preorder degree sequence of length n with
                      its conditional probability (exhaustive; small n only).
  check_*             structural facts about multiplicities that the theory
                      promises: the rooting invariant, the no-local-maximum
                      (valley) property, the minimal multiplicity being 1 or
                      2, divisibility across edges, clones detection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from .distribution import OffspringDistribution
from .errors import (
    InfeasibleTreeError,
    InvalidParamsError,
    TooLargeError,
    UnderflowRiskError,
)
from .isomorphism import (
    CodeTable,
    all_root_codes,
    correction_factors,
    multiplicities,
)
from .sampler import DegreeSequence, build_rooted_tree
from .trees import FreeTree, RootedTree, reroot

ENUMERATION_CAP = 10
EXACT_POSTERIOR_CAP = 64
PLAIN_REAL_CAP = 200


# -- posterior --------------------------------------------------------------


def _embedding_and_prob_logs(
    free: FreeTree, dist: OffspringDistribution, u: int, table: CodeTable
) -> float:
    """log( Prob(tree rooted at u) * embeddings(u) ), or -inf."""
    tree = reroot(free, u)
    codes: Dict[int, int] = {}
    log_score = 0.0
    from collections import Counter

    for v in reversed(tree.preorder()):
        kids = tree.children[v]
        kid_codes = [codes[c] for c in kids]
        codes[v] = table.intern(tuple(sorted(kid_codes)))
        p = dist.prob(len(kids))
        if p == 0.0:
            return -math.inf
        log_score += math.log(p) + math.lgamma(len(kids) + 1)
        for m in Counter(kid_codes).values():
            log_score -= math.lgamma(m + 1)
    return log_score


def _exact_score(
    free: FreeTree, dist: OffspringDistribution, u: int, table: CodeTable
) -> Fraction:
    """Prob(tree rooted at u) * embeddings(u) as an exact Fraction."""
    tree = reroot(free, u)
    codes: Dict[int, int] = {}
    prob = Fraction(1)
    emb = 1
    from collections import Counter

    for v in reversed(tree.preorder()):
        kids = tree.children[v]
        kid_codes = [codes[c] for c in kids]
        codes[v] = table.intern(tuple(sorted(kid_codes)))
        p = dist.prob_exact(len(kids))
        if not p:
            return Fraction(0)
        prob *= p
        contrib = math.factorial(len(kids))
        for m in Counter(kid_codes).values():
            contrib //= math.factorial(m)
        emb *= contrib
    return prob * emb


def root_posterior(
    free: FreeTree,
    dist: OffspringDistribution,
    method: str = "auto",
) -> Dict[int, Union[Fraction, float]]:
    """Posterior probability of each node having been the root.

    For rooting u the unnormalised weight is

        Prob(u) * embeddings(u) / multiplicity(u),

    where Prob is the product of offspring masses over the plane tree rooted
    at u, embeddings counts its distinct plane orderings, and multiplicity
    divides out the count of rootings indistinguishable from u.

    method: "auto" picks exact arithmetic for rational-backed laws up to
    n = 64 and log-space otherwise; "exact", "log" and "float" force a mode
    ("float" is a plain-real product, refused above n = 200).
    """
    n = free.n
    if method == "auto":
        method = "exact" if dist.is_rational and n <= EXACT_POSTERIOR_CAP else "log"
    if method == "exact" and not dist.is_rational:
        raise InvalidParamsError("exact posterior needs a rational-backed distribution")
    if method == "float" and n > PLAIN_REAL_CAP:
        raise UnderflowRiskError(
            f"plain-real likelihoods underflow beyond n = {PLAIN_REAL_CAP}; use log"
        )
    if method not in ("exact", "log", "float"):
        raise InvalidParamsError(f"unknown posterior method {method!r}")

    if n == 1:
        return {0: Fraction(1) if method == "exact" else 1.0}

    table = CodeTable()
    mult = multiplicities(free, table)

    if method == "exact":
        scores = {
            u: _exact_score(free, dist, u, table) / mult[u] for u in range(n)
        }
        total = sum(scores.values())
        if total == 0:
            raise InfeasibleTreeError("no rooting has positive probability")
        return {u: s / total for u, s in scores.items()}

    logs = {}
    for u in range(n):
        ls = _embedding_and_prob_logs(free, dist, u, table)
        logs[u] = ls - math.log(mult[u]) if ls > -math.inf else -math.inf
    if method == "float":
        weights = {u: math.exp(ls) if ls > -math.inf else 0.0 for u, ls in logs.items()}
        total_f = sum(weights.values())
        if total_f == 0.0:
            raise InfeasibleTreeError("no rooting has positive probability")
        return {u: w / total_f for u, w in weights.items()}
    peak = max(logs.values())
    if peak == -math.inf:
        raise InfeasibleTreeError("no rooting has positive probability")
    shifted = {u: math.exp(ls - peak) if ls > -math.inf else 0.0 for u, ls in logs.items()}
    total_s = sum(shifted.values())
    return {u: s / total_s for u, s in shifted.items()}


def posterior_report(
    free: FreeTree, dist: OffspringDistribution, method: str = "auto"
) -> Dict:
    """JSON-ready posterior summary.

    {"nodes": [{"id": u, "posterior": "a/b" | float}, ...],
     "omega": [sorted candidate nodes], "p_correct": "a/b" | float}

    Rational values are rendered as "a/b" strings so the report stays exact.
    """
    from .estimator import candidate_set, conditional_correctness

    posterior = root_posterior(free, dist, method)

    def render(x):
        return f"{x.numerator}/{x.denominator}" if isinstance(x, Fraction) else x

    omega, _ = candidate_set(free, dist)
    exact = dist.is_rational and isinstance(posterior[0], Fraction)
    p_correct = conditional_correctness(free, dist, exact=exact)
    return {
        "nodes": [{"id": u, "posterior": render(posterior[u])} for u in range(free.n)],
        "omega": sorted(omega),
        "p_correct": render(p_correct),
    }


# -- exhaustive enumeration -------------------------------------------------


@dataclass(frozen=True)
class EnumeratedTree:
    """One plane tree of the conditioned process.

    ``embeddings`` counts the distinguishable child-slot arrangements the
    family assigns to this plane tree (C(k, i) per node for the k-slot
    binomial family, else 1); ``probability`` is the plane tree's total
    conditional mass, shared equally by its embeddings.
    """

    sequence: DegreeSequence
    tree: RootedTree
    probability: Union[Fraction, float]
    embeddings: int


def enumerate_conditional_trees(
    dist: OffspringDistribution,
    n: int,
    expand_embeddings: bool = False,
) -> List[EnumeratedTree]:
    """All trees of size n with positive probability, probabilities summing
    to 1.  Returns [] when no tree of that size is feasible.  Capped at
    n = 10; the state space grows too fast beyond that."""
    if n < 1:
        raise InvalidParamsError("n must be at least 1")
    if n > ENUMERATION_CAP:
        raise TooLargeError(f"enumeration capped at n = {ENUMERATION_CAP}")

    exact = dist.is_rational
    one: Union[Fraction, float] = Fraction(1) if exact else 1.0
    support = dist.support
    max_d = support[-1]
    found: List[Tuple[Tuple[int, ...], Union[Fraction, float], int]] = []

    def rec(prefix: List[int], open_slots: int, total: int, weight, emb: int) -> None:
        t = len(prefix)
        if t == n:
            if open_slots == 0:
                found.append((tuple(prefix), weight, emb))
            return
        remaining_after = n - t - 1
        for d in support:
            new_total = total + d
            if new_total > n - 1:
                break
            if new_total + remaining_after * max_d < n - 1:
                continue
            slots = open_slots - 1 + d
            if remaining_after > 0 and not (1 <= slots <= remaining_after):
                continue
            if remaining_after == 0 and slots != 0:
                continue
            p = dist.prob_exact(d) if exact else dist.prob(d)
            prefix.append(d)
            rec(prefix, slots, new_total, weight * p, emb * dist.embedding_multiplicity(d))
            prefix.pop()

    rec([], 1, 0, one, 1)
    if not found:
        return []
    total_mass = sum(w for _, w, _ in found)
    out: List[EnumeratedTree] = []
    for degrees, weight, emb in found:
        seq = DegreeSequence(degrees)
        entry = EnumeratedTree(
            sequence=seq,
            tree=build_rooted_tree(seq),
            probability=weight / total_mass,
            embeddings=emb,
        )
        out.append(entry)
    if expand_embeddings:
        expanded: List[EnumeratedTree] = []
        for entry in out:
            share = entry.probability / entry.embeddings
            for _ in range(entry.embeddings):
                expanded.append(
                    EnumeratedTree(entry.sequence, entry.tree, share, 1)
                )
        return expanded
    return out


def group_by_free_tree(
    entries: List[EnumeratedTree],
) -> List[Tuple[FreeTree, Union[Fraction, float], int]]:
    """Merge enumerated rooted trees by their underlying free tree.

    Returns (representative free tree, total probability, total embeddings)
    per isomorphism class, in decreasing probability order.
    """
    from .trees import forget_root

    table = CodeTable()
    groups: Dict[int, List] = {}
    for entry in entries:
        free = forget_root(entry.tree)
        key = min(all_root_codes(free, table).values())
        slot = groups.setdefault(key, [free, 0, 0])
        slot[1] = slot[1] + entry.probability
        slot[2] = slot[2] + entry.embeddings
    out = [(f, p, e) for f, p, e in groups.values()]
    out.sort(key=lambda item: (-float(item[1]), item[2]))
    return out


# -- structural checks ------------------------------------------------------


def check_root_invariant(free: FreeTree) -> bool:
    """multiplicity(u) * prod corr_u is the same integer for every rooting."""
    from .isomorphism import rooting_invariant_all

    values = set(rooting_invariant_all(free).values())
    return len(values) == 1


def check_valley(free: FreeTree) -> bool:
    """No path u - v - w has multiplicity strictly larger in the middle."""
    mult = multiplicities(free)
    for v in range(free.n):
        nbrs = free.neighbors[v]
        if len(nbrs) < 2:
            continue
        two_smallest = sorted(mult[w] for w in nbrs)[1]
        if mult[v] > two_smallest:
            return False
    return True


def check_min_multiplicity(free: FreeTree) -> bool:
    """The smallest multiplicity in a tree is 1 or 2."""
    mult = multiplicities(free)
    return min(mult.values()) in (1, 2)


def check_neighbor_divisibility(free: FreeTree) -> bool:
    """Across every edge, one multiplicity divides the other."""
    mult = multiplicities(free)
    for v in range(free.n):
        for w in free.neighbors[v]:
            if v < w:
                a, b = mult[v], mult[w]
                if a % b != 0 and b % a != 0:
                    return False
    return True


def check_clone_containment(free: FreeTree) -> bool:
    """Neighbours u, v are clones exactly when each one's branch across the
    edge contains a clone of the other: a clone of u in the part hanging off
    v, and a clone of v in the part hanging off u."""
    codes = all_root_codes(free, CodeTable())

    def branch(away: int, cut: int) -> set:
        # component of `away` once the edge (cut, away) is removed
        seen = {cut, away}
        stack = [away]
        while stack:
            x = stack.pop()
            for y in free.neighbors[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        seen.discard(cut)
        return seen

    for v in range(free.n):
        for w in free.neighbors[v]:
            if v < w:
                side_w = branch(w, v)
                side_v = set(range(free.n)) - side_w
                has_v_clone = any(codes[x] == codes[v] for x in side_w)
                has_w_clone = any(codes[x] == codes[w] for x in side_v)
                if (codes[v] == codes[w]) != (has_v_clone and has_w_clone):
                    return False
    return True
