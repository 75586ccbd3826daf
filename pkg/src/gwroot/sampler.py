"""Size-conditioned sampling of critical branching-process trees.

The pipeline is rejection sampling on degree sequences:

  1. draw n i.i.d. offspring counts and keep the vector when it sums to n-1
     (acceptance rate about period / (sigma * sqrt(2 pi n))),
  2. rotate it cyclically to the unique rotation that is a valid preorder
     degree sequence (the cycle lemma guarantees exactly one),
  3. decode the rotated sequence into a rooted tree, node ids in preorder.

Step 2 costs the factor-n tilt between "random vector with the right sum"
and "random tree": every valid sequence has exactly n rotations in the
conditioned-vector space, so the decoded tree carries the conditioned
process's law on trees of size n.

Families with native generators (binomial, poisson, geometric, uniform sets)
draw through them, with the vanishing truncation tail redrawn; everything
else goes through inverse-CDF lookup.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .distribution import OffspringDistribution
from .errors import (
    AttemptsExhaustedError,
    InfeasibleSizeError,
    InvalidSequenceError,
)
from .trees import RootedTree

# Keep any one batch of raw draws below this many entries.
_BATCH_CAP = 4_000_000
_ATTEMPT_FACTOR = 1000.0


@dataclass(frozen=True)
class DegreeSequence:
    """Offspring counts per node; valid preorder sequences sum to n-1 and
    keep the stack walk positive until the last node."""

    degrees: Tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.degrees)

    def total(self) -> int:
        return sum(self.degrees)

    def is_valid_preorder(self) -> bool:
        n = self.n
        if n < 1 or self.total() != n - 1:
            return False
        open_slots = 1
        for t, d in enumerate(self.degrees):
            open_slots += d - 1
            if t < n - 1 and open_slots <= 0:
                return False
        return open_slots == 0


def default_max_attempts(dist: OffspringDistribution, n: int) -> int:
    """Attempt budget per accepted sequence, scaled to the expected
    1 / acceptance-rate which grows like sigma * sqrt(n)."""
    return max(1000, int(_ATTEMPT_FACTOR * dist.sigma * math.sqrt(n)))


def is_feasible(dist: OffspringDistribution, n: int) -> bool:
    """Whether any tree of size n has positive probability.

    The period must divide n - 1; for small n the support is additionally
    checked exhaustively (n offspring counts from the support summing to
    n - 1), which catches boundary cases the period test cannot see.
    """
    if n < 1:
        return False
    if n == 1:
        return True
    if (n - 1) % dist.period != 0:
        return False
    if n <= 64:
        # Bitset DP over achievable sums with exactly n draws.
        target = n - 1
        mask = (1 << (target + 1)) - 1
        reachable = 1
        for _ in range(n):
            nxt = 0
            for d in dist.support:
                if d <= target:
                    nxt |= reachable << d
            reachable = nxt & mask
            if reachable == 0:
                return False
        return bool((reachable >> target) & 1)
    return True


def _draw_raw(dist: OffspringDistribution, rng: np.random.Generator, size: int) -> np.ndarray:
    """size i.i.d. offspring counts from the (truncated) law."""
    family = dist.family
    cap = dist.max_degree
    if family == "binomial":
        k = dist.params["k"]
        return rng.binomial(k, 1.0 / k, size)
    if family == "poisson":
        x = rng.poisson(1.0, size)
    elif family == "geometric":
        x = rng.geometric(0.5, size) - 1
    elif family == "uniform-set":
        vals = np.asarray(dist.params["values"])
        if np.array_equal(vals, np.arange(vals.size)):
            return rng.integers(0, vals.size, size)
        return vals[rng.integers(0, vals.size, size)]
    else:
        # Inverse CDF; the final cumulative value is 1 up to rounding, so
        # clip to the last support point.
        u = rng.random(size)
        idx = np.searchsorted(dist.cdf, u, side="right")
        return np.minimum(idx, cap)
    # Native draws may exceed the truncation point; redraw those entries so
    # the sample matches the renormalised law exactly.
    bad = x > cap
    while bad.any():
        x[bad] = _draw_raw(dist, rng, int(bad.sum()))
        bad = x > cap
    return x


def sample_degree_matrix(
    dist: OffspringDistribution,
    n: int,
    count: int,
    rng: np.random.Generator,
    max_attempts: Optional[int] = None,
) -> np.ndarray:
    """count accepted (unrotated) degree vectors as a (count, n) array."""
    if count < 0:
        raise InvalidSequenceError("count must be non-negative")
    if not is_feasible(dist, n):
        raise InfeasibleSizeError(
            f"no tree of size {n} under this distribution (period {dist.period})"
        )
    if count == 0:
        return np.zeros((0, n), dtype=np.int64)
    if n == 1:
        return np.zeros((count, 1), dtype=np.int64)

    per_seq = max_attempts if max_attempts is not None else default_max_attempts(dist, n)
    budget = per_seq * count
    rate_guess = min(1.0, max(dist.period / (dist.sigma * math.sqrt(2 * math.pi * n)), 1e-6))

    rows = []
    have = 0
    attempts = 0
    target = n - 1
    mem_rows = max(1, _BATCH_CAP // n)
    while have < count:
        want = count - have
        batch = int(min(mem_rows, max(64, math.ceil(1.2 * want / rate_guess))))
        if attempts + batch > budget:
            batch = budget - attempts
            if batch <= 0:
                raise AttemptsExhaustedError(
                    f"no acceptance within {budget} attempts (n = {n})"
                )
        x = _draw_raw(dist, rng, batch * n).reshape(batch, n)
        attempts += batch
        hits = x[x.sum(axis=1) == target]
        if hits.shape[0]:
            rows.append(hits[: count - have])
            have += min(hits.shape[0], count - have)
        rate_guess = max(rate_guess, 0.5 * (have + 1) / attempts)
    return np.vstack(rows).astype(np.int64, copy=False)


def sample_degree_sequence(
    dist: OffspringDistribution,
    n: int,
    rng: np.random.Generator,
    max_attempts: Optional[int] = None,
) -> DegreeSequence:
    """One i.i.d. offspring vector conditioned on summing to n - 1 (not yet
    rotated into a valid preorder sequence)."""
    row = sample_degree_matrix(dist, n, 1, rng, max_attempts)[0]
    return DegreeSequence(tuple(int(d) for d in row))


def cycle_offsets(matrix: np.ndarray) -> np.ndarray:
    """Valid-rotation start index for each row of sum-(n-1) degree vectors.

    Row walk W_t = sum_{i <= t} (d_i - 1) ends at -1; the unique valid
    rotation starts right after the first attainment of the minimum.
    """
    walk = np.cumsum(matrix - 1, axis=1)
    first_min = walk.argmin(axis=1)
    return (first_min + 1) % matrix.shape[1]


def cycle_rotate(seq: DegreeSequence) -> Tuple[DegreeSequence, int]:
    """Rotate to the unique valid preorder sequence; returns (rotated, offset)."""
    n = seq.n
    if n < 1 or seq.total() != n - 1:
        raise InvalidSequenceError(
            f"degree sum {seq.total()} != n - 1 = {n - 1}; no rotation is valid"
        )
    offset = int(cycle_offsets(np.array([seq.degrees]))[0])
    rotated = seq.degrees[offset:] + seq.degrees[:offset]
    out = DegreeSequence(rotated)
    assert out.is_valid_preorder()
    return out, offset


def build_rooted_tree(seq: DegreeSequence) -> RootedTree:
    """Decode a valid preorder degree sequence; node ids are preorder ranks."""
    n = seq.n
    degrees = seq.degrees
    if n < 1 or sum(degrees) != n - 1:
        raise InvalidSequenceError("degree sum must be n - 1")
    children: list = [[] for _ in range(n)]
    stack = [[0, degrees[0]]]
    for i in range(1, n):
        while stack and stack[-1][1] == 0:
            stack.pop()
        if not stack:
            raise InvalidSequenceError("sequence closes the tree before node "
                                       f"{i}; not a valid preorder")
        parent = stack[-1]
        parent[1] -= 1
        children[parent[0]].append(i)
        stack.append([i, degrees[i]])
    if any(rem for _, rem in stack):
        raise InvalidSequenceError("unfilled child slots at the end")
    return RootedTree(n, 0, tuple(tuple(kids) for kids in children))


def sample_conditional_tree(
    dist: OffspringDistribution,
    n: int,
    rng: np.random.Generator,
    max_attempts: Optional[int] = None,
) -> RootedTree:
    """One tree of size n from the conditioned process."""
    seq = sample_degree_sequence(dist, n, rng, max_attempts)
    rotated, _ = cycle_rotate(seq)
    return build_rooted_tree(rotated)
