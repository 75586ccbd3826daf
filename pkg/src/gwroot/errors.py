"""Error types shared across the package.

Every error carries a short machine-readable ``code`` so the service layer
and the CLI can map failures onto HTTP responses and exit codes without

string-matching messages.
"""

from __future__ import annotations


class GWError(Exception):
    """Base class; ``code`` identifies the failure category."""

    code = "error"


class InvalidParamsError(GWError):
    """Malformed or out-of-range configuration input."""

    code = "invalid-params"


class CriticalityError(GWError):
    """Offspring mean is not 1 within tolerance after truncation."""

    code = "criticality-violated"


class DegenerateError(GWError):
    """Offspring variance is zero (the process is deterministic)."""

    code = "degenerate"


class InfeasibleSizeError(GWError):
    """No tree of the requested size exists under the distribution."""

    code = "infeasible-size"


class AttemptsExhaustedError(GWError):
    """Rejection sampling hit its attempt budget."""

    code = "attempts-exhausted"


class InvalidSequenceError(GWError):
    """Degree sequence fails the preorder validity condition."""

    code = "invalid-sequence"


class NodeOutOfRangeError(GWError):
    """Node id outside 0..n-1."""

    code = "node-out-of-range"


class InfeasibleTreeError(GWError):
    """Tree cannot arise from the distribution under any rooting."""

    code = "infeasible-tree"


class UnderflowRiskError(GWError):
    """Plain-real likelihood products requested for a tree too large."""

    code = "underflow-risk"


class TooLargeError(GWError):
    """Exhaustive computation requested beyond its size cap."""

    code = "too-large"


#: Error codes that indicate bad input rather than a runtime/sampling failure.
CONFIG_ERROR_CODES = frozenset(
    {
        "invalid-params",
        "criticality-violated",
        "degenerate",
        "invalid-sequence",
        "node-out-of-range",
        "underflow-risk",
        "too-large",
    }
)

#: Error codes for failures that only surface while sampling or estimating.
RUNTIME_ERROR_CODES = frozenset(
    {"infeasible-size", "attempts-exhausted", "infeasible-tree"}
)
