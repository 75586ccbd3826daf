"""Named verification suites over randomly sampled corpora.

Each suite draws trees from a spread of standard critical families and runs
one family of checks, reporting per-item failures.  These are the
self-contained counterparts of the unit tests, runnable from the service and
the CLI:

  root-invariant      multiplicity x correction product agrees across rootings
  valley              no strict multiplicity maximum in the middle of a path
  minmult             minimal multiplicity is 1 or 2, multiplicities divide
                      across edges, neighbours are clones exactly when each
                      branch holds a clone of the far endpoint
  oracle-equivalence  exact posterior argmax equals the estimator's candidate
                      set and the posterior value matches max-ratio / W
  cycle-lemma         random sum-(n-1) vectors admit exactly one valid
                      rotation, the one cycle_rotate picks
  roundtrip           JSON and degree-sequence encodings decode back to the
                      same tree
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List

import numpy as np

from .distribution import OffspringDistribution, make_family
from .errors import InvalidParamsError
from .estimator import candidate_set, conditional_correctness
from .oracle import (
    check_clone_containment,
    check_min_multiplicity,
    check_neighbor_divisibility,
    check_root_invariant,
    check_valley,
    root_posterior,
)
from .sampler import (
    DegreeSequence,
    build_rooted_tree,
    cycle_rotate,
    sample_conditional_tree,
    sample_degree_sequence,
)
from .trees import (
    forget_root,
    free_from_json,
    free_to_json,
    rooted_from_json,
    rooted_to_json,
)

SUITE_NAMES = (
    "root-invariant",
    "valley",
    "minmult",
    "oracle-equivalence",
    "cycle-lemma",
    "roundtrip",
)


@dataclass
class VerifyResult:
    suite: str
    passed: bool
    checked: int
    failures: List[str] = field(default_factory=list)

    def to_json_dict(self) -> Dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "checked": self.checked,
            "failures": self.failures,
        }


def _corpus_dists() -> List[OffspringDistribution]:
    return [
        make_family("binomial", {"k": 2}),
        make_family("poisson"),
        make_family("geometric"),
        make_family("uniform-set", {"values": [0, 1, 2]}),
    ]


def _sampled_corpus(seed: int, trees: int, max_n: int):
    """Yield (dist, free tree, true root id) round-robin over the families."""
    rng = np.random.default_rng(seed)
    dists = _corpus_dists()
    for i in range(trees):
        dist = dists[i % len(dists)]
        n = int(rng.integers(2, max_n + 1))
        rooted = sample_conditional_tree(dist, n, rng)
        yield dist, forget_root(rooted), rooted.root


def run_suite(
    name: str, seed: int = 0, trees: int = 200, max_n: int = 50
) -> VerifyResult:
    """Run one named suite; unknown names raise invalid-params."""
    if name not in SUITE_NAMES:
        raise InvalidParamsError(
            f"unknown suite {name!r}; known: {', '.join(SUITE_NAMES)}"
        )
    failures: List[str] = []
    checked = 0

    if name in ("root-invariant", "valley", "minmult"):
        checks = {
            "root-invariant": [("rooting invariant", check_root_invariant)],
            "valley": [("valley property", check_valley)],
            "minmult": [
                ("minimal multiplicity", check_min_multiplicity),
                ("neighbor divisibility", check_neighbor_divisibility),
                ("clone containment", check_clone_containment),
            ],
        }[name]
        for dist, free, _root in _sampled_corpus(seed, trees, max_n):
            checked += 1
            for label, fn in checks:
                if not fn(free):
                    failures.append(
                        f"{label} failed on n={free.n} tree from {dist!r}"
                    )

    elif name == "oracle-equivalence":
        for dist, free, _root in _sampled_corpus(seed, trees, min(max_n, 12)):
            checked += 1
            err = _oracle_equivalence_failure(dist, free)
            if err:
                failures.append(err)

    elif name == "cycle-lemma":
        rng = np.random.default_rng(seed)
        dists = _corpus_dists()
        for i in range(trees):
            checked += 1
            dist = dists[i % len(dists)]
            n = int(rng.integers(1, min(max_n, 12) + 1))
            seq = sample_degree_sequence(dist, n, rng)
            err = _cycle_lemma_failure(seq)
            if err:
                failures.append(err)

    elif name == "roundtrip":
        for dist, free, root in _sampled_corpus(seed, trees, max_n):
            checked += 1
            from .trees import reroot

            rooted = reroot(free, root)
            seq = DegreeSequence(rooted.degree_sequence())
            rebuilt = build_rooted_tree(seq)
            if rebuilt.degree_sequence() != seq.degrees:
                failures.append(f"degree sequence round trip failed at n={free.n}")
            if rooted_from_json(rooted_to_json(rooted)).degree_sequence() != seq.degrees:
                failures.append(f"rooted JSON round trip failed at n={free.n}")
            if free_from_json(free_to_json(free)) != free:
                failures.append(f"free JSON round trip failed at n={free.n}")

    return VerifyResult(name, not failures, checked, failures)


def _oracle_equivalence_failure(dist, free) -> str:
    """Empty string when posterior argmax and value agree with the estimator."""
    posterior = root_posterior(free, dist)
    omega, max_ratio = candidate_set(free, dist)
    peak = max(posterior.values())
    argmax = {u for u, p in posterior.items() if p == peak}
    if dist.is_rational:
        if argmax != set(omega):
            return f"argmax {sorted(argmax)} != candidates {sorted(omega)} (n={free.n})"
        expected = conditional_correctness(free, dist, exact=True)
        if isinstance(expected, Fraction) and peak != expected:
            return f"posterior {peak} != max-ratio/W {expected} (n={free.n})"
    else:
        # Float-backed laws: allow roundoff in both the argmax set and value.
        near = {u for u, p in posterior.items() if abs(p - peak) <= 1e-9}
        if not set(omega) <= near or not argmax <= set(omega):
            return f"argmax {sorted(argmax)} vs candidates {sorted(omega)} (n={free.n})"
        expected = conditional_correctness(free, dist)
        if not math.isclose(peak, expected, rel_tol=1e-9, abs_tol=1e-12):
            return f"posterior {peak} != max-ratio/W {expected} (n={free.n})"
    return ""


def _cycle_lemma_failure(seq: DegreeSequence) -> str:
    """Empty string when exactly one rotation is valid and it is the one
    cycle_rotate returns."""
    n = seq.n
    valid = [
        r
        for r in range(n)
        if DegreeSequence(seq.degrees[r:] + seq.degrees[:r]).is_valid_preorder()
    ]
    rotated, offset = cycle_rotate(seq)
    if len(valid) != 1:
        return f"{len(valid)} valid rotations for {seq.degrees}"
    if valid[0] != offset or not rotated.is_valid_preorder():
        return f"cycle_rotate picked {offset}, exhaustive says {valid[0]}"
    return ""
