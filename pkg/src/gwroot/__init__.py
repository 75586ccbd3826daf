"""Root recovery in size-conditioned critical branching-process trees.

Sample trees from a critical offspring law conditioned on their size, strip
the root, and recover it again: the maximum-likelihood root is driven by the
per-degree ratios i * p_i / p_{i-1}, and this package bundles the sampler,
the estimator, exact brute-force oracles and Monte Carlo tooling for
checking the closed-form success probabilities, together with an HTTP
service and a thin CLI client.
"""

from .distribution import (
    OffspringDistribution,
    distribution_from_config,
    make_family,
)
from .errors import GWError
from .estimator import RootEstimate, candidate_set, conditional_correctness, estimate_root
from .isomorphism import (
    CodeTable,
    all_root_codes,
    correction_factors,
    embedding_count,
    multiplicity,
    multiplicities,
    rooting_invariant,
    rooting_invariant_all,
    subtree_codes,
)
from .montecarlo import (
    STANDARD_FAMILIES,
    TrialReport,
    campaign_csv_rows,
    check_report,
    family_campaign,
    run_campaign,
    run_trials,
    statistic_suite,
    theory_prediction,
    wilson_interval,
)
from .oracle import (
    EnumeratedTree,
    enumerate_conditional_trees,
    group_by_free_tree,
    posterior_report,
    root_posterior,
)
from .sampler import (
    DegreeSequence,
    build_rooted_tree,
    cycle_rotate,
    is_feasible,
    sample_conditional_tree,
    sample_degree_sequence,
)
from .trees import (
    FreeTree,
    RootedTree,
    degree_census,
    degree_census_rooted,
    forget_root,
    free_from_json,
    free_to_json,
    free_tree_from_edges,
    reroot,
    rooted_from_json,
    rooted_to_json,
    weighted_sum_W,
)
from .verification import SUITE_NAMES, VerifyResult, run_suite

__version__ = "0.1.0"

__all__ = [
    "CodeTable",
    "DegreeSequence",
    "EnumeratedTree",
    "FreeTree",
    "GWError",
    "OffspringDistribution",
    "RootEstimate",
    "RootedTree",
    "STANDARD_FAMILIES",
    "SUITE_NAMES",
    "TrialReport",
    "VerifyResult",
    "all_root_codes",
    "build_rooted_tree",
    "campaign_csv_rows",
    "candidate_set",
    "check_report",
    "conditional_correctness",
    "correction_factors",
    "cycle_rotate",
    "degree_census",
    "degree_census_rooted",
    "distribution_from_config",
    "embedding_count",
    "enumerate_conditional_trees",
    "estimate_root",
    "family_campaign",
    "forget_root",
    "free_from_json",
    "free_to_json",
    "free_tree_from_edges",
    "group_by_free_tree",
    "is_feasible",
    "make_family",
    "multiplicities",
    "multiplicity",
    "posterior_report",
    "reroot",
    "root_posterior",
    "rooted_from_json",
    "rooted_to_json",
    "rooting_invariant",
    "rooting_invariant_all",
    "run_campaign",
    "run_suite",
    "run_trials",
    "sample_conditional_tree",
    "sample_degree_sequence",
    "statistic_suite",
    "subtree_codes",
    "theory_prediction",
    "weighted_sum_W",
    "wilson_interval",
]
