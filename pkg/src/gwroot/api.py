"""HTTP face of the package: sampling, estimation, posteriors, experiments.

Every operation the CLI offers goes through this app, so the wire format is
defined in one place.  The CLI drives it in-process by default; `gwroot
serve` (or any ASGI server pointed at ``gwroot.api:app``) exposes the same
endpoints over the network.

Failures raised by the core surface as HTTP 400 with a machine-readable
body ``{"error": <code>, "detail": <message>}``; the client maps the code
onto its exit-code convention.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Any, Dict, List, Optional

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .distribution import OffspringDistribution, distribution_from_config
from .errors import GWError, TooLargeError
from .estimator import RootEstimate, estimate_root
from .montecarlo import (
    CSV_COLUMNS,
    campaign_csv_rows,
    check_report,
    family_campaign,
    run_campaign,
    run_trials,
    theory_prediction,
)
from .oracle import posterior_report
from .sampler import DegreeSequence, build_rooted_tree, cycle_rotate, sample_degree_matrix
from .trees import FreeTree, forget_root, free_to_json, free_tree_from_edges, rooted_to_json
from .verification import run_suite

# keep one response bounded; 10^5 small trees or a handful of big ones
MAX_SAMPLE_CELLS = 5_000_000


class DistConfig(BaseModel):
    """Offspring law: a named family with parameters, or an explicit pmf."""

    family: Optional[str] = None
    params: Optional[Dict[str, Any]] = None
    tail_epsilon: Optional[float] = None
    pmf: Optional[Dict[str, Any]] = None

    def build(self) -> OffspringDistribution:
        config: Dict[str, Any] = {}
        if self.pmf is not None:
            config["pmf"] = self.pmf
        if self.family is not None:
            config["family"] = self.family
            if self.params is not None:
                config["params"] = self.params
            if self.tail_epsilon is not None:
                config["tail_epsilon"] = self.tail_epsilon
        return distribution_from_config(config)


class FreeTreeModel(BaseModel):
    """Unrooted tree as an edge list over nodes 0..n-1."""

    n: int = Field(ge=1)
    edges: List[List[int]]

    def build(self) -> FreeTree:
        return free_tree_from_edges(self.n, self.edges)


class SampleRequest(BaseModel):
    dist: DistConfig
    n: int = Field(ge=1)
    count: int = Field(default=1, ge=1)
    seed: int = 0
    max_attempts: Optional[int] = Field(default=None, ge=1)


class EstimateRequest(BaseModel):
    dist: DistConfig
    tree: FreeTreeModel
    seed: int = 0


class PosteriorRequest(BaseModel):
    dist: DistConfig
    tree: FreeTreeModel
    method: str = "auto"


class VerifyRequest(BaseModel):
    suite: str
    seed: int = 0
    trees: int = Field(default=200, ge=1)
    max_n: int = Field(default=50, ge=2)


class TrialsRequest(BaseModel):
    dist: DistConfig
    n: int = Field(ge=1)
    trials: int = Field(ge=1)
    seed: int = 0
    workers: int = Field(default=1, ge=1)
    checks: List[str] = Field(default_factory=list)


class CampaignRequest(BaseModel):
    entries: List[Dict[str, Any]]


class PredictRequest(BaseModel):
    dist: DistConfig
    n: int = Field(ge=1)


class FamiliesRequest(BaseModel):
    n: int = Field(default=100, ge=2)
    trials: int = Field(default=10_000, ge=1)
    seed: int = 0
    workers: int = Field(default=1, ge=1)


app = FastAPI(title="gwroot", version=__version__)


@app.exception_handler(GWError)
async def _gw_error(request: Request, exc: GWError) -> JSONResponse:
    return JSONResponse(status_code=400, content={"error": exc.code, "detail": str(exc)})


def _render_fraction(value: Optional[Fraction]) -> Optional[str]:
    if value is None:
        return None
    return f"{value.numerator}/{value.denominator}"


def _estimate_json(est: RootEstimate) -> Dict:
    return {
        "candidates": sorted(est.candidates),
        "chosen": est.chosen,
        "max_ratio": est.max_ratio if math.isfinite(est.max_ratio) else None,
        "conditional_correctness": est.conditional_correctness,
        "special_hit": est.special_hit,
        "exact_correctness": _render_fraction(est.exact_correctness),
    }


@app.get("/health")
def health() -> Dict:
    return {"status": "ok", "version": __version__}


@app.post("/sample")
def sample(request: SampleRequest) -> Dict:
    dist = request.dist.build()
    if request.count * request.n > MAX_SAMPLE_CELLS:
        raise TooLargeError(
            f"count * n exceeds {MAX_SAMPLE_CELLS}; fetch in smaller batches"
        )
    rng = np.random.default_rng(request.seed)
    matrix = sample_degree_matrix(
        dist, request.n, request.count, rng, request.max_attempts
    )
    trees = []
    for row in matrix:
        seq = DegreeSequence(tuple(int(x) for x in row))
        rotated, _ = cycle_rotate(seq)
        rooted = build_rooted_tree(rotated)
        trees.append(
            {
                "rooted": rooted_to_json(rooted),
                "free": free_to_json(forget_root(rooted)),
            }
        )
    return {
        "dist": dist.descriptor(),
        "n": request.n,
        "count": request.count,
        "seed": request.seed,
        "trees": trees,
    }


@app.post("/estimate")
def estimate(request: EstimateRequest) -> Dict:
    dist = request.dist.build()
    free = request.tree.build()
    rng = np.random.default_rng(request.seed)
    est = estimate_root(free, dist, rng)
    out = _estimate_json(est)
    out["n"] = free.n
    out["seed"] = request.seed
    return out


@app.post("/posterior")
def posterior(request: PosteriorRequest) -> Dict:
    dist = request.dist.build()
    free = request.tree.build()
    return posterior_report(free, dist, request.method)


@app.post("/verify")
def verify(request: VerifyRequest) -> Dict:
    result = run_suite(
        request.suite, seed=request.seed, trees=request.trees, max_n=request.max_n
    )
    return result.to_json_dict()


@app.post("/trials")
def trials(request: TrialsRequest) -> Dict:
    dist = request.dist.build()
    report = run_trials(
        dist, request.n, request.trials, request.seed, workers=request.workers
    )
    passed, failures = check_report(report, request.checks)
    row = report.to_json_dict()
    row["checks_passed"] = passed
    row["check_failures"] = failures
    return row


@app.post("/campaign")
def campaign(request: CampaignRequest) -> Dict:
    rows = run_campaign(request.entries)
    return {
        "rows": rows,
        "csv_columns": CSV_COLUMNS,
        "csv_rows": campaign_csv_rows(rows),
    }


@app.post("/families")
def families(request: FamiliesRequest) -> Dict:
    rows = family_campaign(
        n=request.n, trials=request.trials, seed=request.seed, workers=request.workers
    )
    return {
        "rows": rows,
        "csv_columns": CSV_COLUMNS,
        "csv_rows": campaign_csv_rows(rows),
    }


@app.post("/predict")
def predict(request: PredictRequest) -> Dict:
    dist = request.dist.build()
    return {
        "dist": dist.descriptor(),
        "n": request.n,
        "predictions": theory_prediction(dist, request.n),
    }
