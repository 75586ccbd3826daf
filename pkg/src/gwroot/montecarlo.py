"""Monte Carlo experiments: sample, estimate, score, compare with theory.

Each trial samples one size-n tree from the conditioned process, hides the
root, runs the degree-ratio estimator and scores whether its uniform pick
among the candidates recovers the hidden root.  Everything a trial needs
(candidate ranks, ratio sums, maximal degree) is a function of the degree
vector and the rotation offset alone, so trials run vectorised over numpy
chunks; the per-trial semantics match the object-path estimator exactly and
tests cross-check the two trial by trial.

Trials are split into fixed-size chunks, each driven by its own random
stream spawned from the report seed, and chunk summaries are pure sums
combined in chunk order: the same seed and configuration reproduce a report
bit for bit, with any number of worker processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .distribution import OffspringDistribution
from .errors import InvalidParamsError
from .sampler import cycle_offsets, sample_degree_matrix

DEFAULT_CHUNK = 4096


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> Tuple[float, float]:
    """95 percent score interval for a binomial proportion."""
    if trials <= 0:
        return 0.0, 1.0
    phat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / trials + z2 / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass
class TrialReport:
    """Aggregated outcome of a batch of estimation trials."""

    dist: Dict
    n: int
    trials: int
    seed: int
    empirical_correct: int
    empirical_rate: float
    wilson_low: float
    wilson_high: float
    mean_conditional_correctness: float
    mean_max_degree: float
    mean_W_over_n: float
    mean_n_over_W: float
    special_hit_rate: float
    predicted: Dict[str, Dict] = field(default_factory=dict)

    def to_json_dict(self) -> Dict:
        def clean(x):
            if isinstance(x, float) and not math.isfinite(x):
                return None
            return x

        out = {
            "dist": self.dist,
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "empirical_correct": self.empirical_correct,
            "empirical_rate": clean(self.empirical_rate),
            "wilson_low": clean(self.wilson_low),
            "wilson_high": clean(self.wilson_high),
            "mean_conditional_correctness": clean(self.mean_conditional_correctness),
            "mean_max_degree": clean(self.mean_max_degree),
            "mean_W_over_n": clean(self.mean_W_over_n),
            "mean_n_over_W": clean(self.mean_n_over_W),
            "special_hit_rate": clean(self.special_hit_rate),
            "predicted": {
                k: {"value": clean(v["value"]), "kind": v["kind"]}
                for k, v in self.predicted.items()
            },
        }
        return out


def _chunk_stats(
    dist: OffspringDistribution,
    n: int,
    count: int,
    seed_seq: np.random.SeedSequence,
    max_attempts: Optional[int],
    keep_samples: bool,
) -> Dict:
    """Run one chunk of trials; returns pure sums (and samples if asked)."""
    rng = np.random.default_rng(seed_seq)
    table = dist.ratio_table()
    x = sample_degree_matrix(dist, n, count, rng, max_attempts)
    rows = np.arange(count)
    off = cycle_offsets(x) if n > 1 else np.zeros(count, dtype=np.int64)
    root_deg = x[rows, off]

    # Per-node values for graph degree = tree degree + 1, root slot patched
    # to its true graph degree (= its child count).
    vals = table.values  # canonical ratio per graph degree, inf at special
    ranks = table.rank.astype(np.int64)
    v_matrix = vals[x + 1]
    v_matrix[rows, off] = vals[root_deg]
    r_matrix = ranks[x + 1]
    r_matrix[rows, off] = ranks[root_deg]

    if n == 1:
        correct = np.ones(count, dtype=bool)
        p_cond = np.ones(count)
        w = np.zeros(count)
        max_deg = np.zeros(count)
        special_rows = np.zeros(count, dtype=bool)
    else:
        with np.errstate(invalid="ignore"):
            w = v_matrix.sum(axis=1)
            top = r_matrix.max(axis=1)
            omega_size = (r_matrix == top[:, None]).sum(axis=1)
            root_in = r_matrix[rows, off] == top
            m_val = v_matrix.max(axis=1)
            special_rows = np.isinf(m_val)
            p_cond = np.where(special_rows, 1.0, m_val / w)
        # Uniform pick among the omega_size candidates; by symmetry the hidden
        # root sits at a uniformly random position, so compare against slot 0.
        picks = rng.integers(0, omega_size)
        correct = root_in & (picks == 0)
        d_matrix = x + 1
        d_matrix[rows, off] = root_deg
        max_deg = d_matrix.max(axis=1)

    out = {
        "count": count,
        "correct": int(correct.sum()),
        "sum_p_cond": float(p_cond.sum()),
        "sum_max_deg": float(max_deg.sum()),
        "sum_w_over_n": float((w / n).sum()),
        "sum_n_over_w": float((n / w).sum()) if n > 1 else float(count),
        "special": int(special_rows.sum()),
    }
    if keep_samples:
        out["samples"] = {
            "correct": correct.copy(),
            "conditional_correctness": p_cond.copy(),
            "max_degree": max_deg.astype(np.int64),
            "W_over_n": (w / n).copy(),
            "special_hit": special_rows.copy(),
        }
    return out


def _run(
    dist: OffspringDistribution,
    n: int,
    trials: int,
    seed: int,
    chunk_size: int,
    workers: int,
    max_attempts: Optional[int],
    keep_samples: bool,
) -> Tuple[TrialReport, Optional[Dict[str, np.ndarray]]]:
    if trials < 1:
        raise InvalidParamsError("trials must be positive")
    if chunk_size < 1:
        raise InvalidParamsError("chunk_size must be positive")
    # Keep one chunk's degree matrix around 4M entries.
    chunk_size = max(1, min(chunk_size, 4_000_000 // max(n, 1)))
    sizes = [chunk_size] * (trials // chunk_size)
    if trials % chunk_size:
        sizes.append(trials % chunk_size)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))

    if workers > 1 and len(sizes) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(
                pool.map(
                    _chunk_stats,
                    [dist] * len(sizes),
                    [n] * len(sizes),
                    sizes,
                    seeds,
                    [max_attempts] * len(sizes),
                    [keep_samples] * len(sizes),
                )
            )
    else:
        parts = [
            _chunk_stats(dist, n, c, s, max_attempts, keep_samples)
            for c, s in zip(sizes, seeds)
        ]

    correct = sum(p["correct"] for p in parts)
    sum_p = sum(p["sum_p_cond"] for p in parts)
    sum_md = sum(p["sum_max_deg"] for p in parts)
    sum_wn = sum(p["sum_w_over_n"] for p in parts)
    sum_nw = sum(p["sum_n_over_w"] for p in parts)
    special = sum(p["special"] for p in parts)
    low, high = wilson_interval(correct, trials)
    report = TrialReport(
        dist=dist.descriptor(),
        n=n,
        trials=trials,
        seed=seed,
        empirical_correct=correct,
        empirical_rate=correct / trials,
        wilson_low=low,
        wilson_high=high,
        mean_conditional_correctness=sum_p / trials,
        mean_max_degree=sum_md / trials,
        mean_W_over_n=sum_wn / trials,
        mean_n_over_W=sum_nw / trials,
        special_hit_rate=special / trials,
        predicted=theory_prediction(dist, n),
    )
    samples = None
    if keep_samples:
        samples = {
            key: np.concatenate([p["samples"][key] for p in parts])
            for key in parts[0]["samples"]
        }
    return report, samples


def run_trials(
    dist: OffspringDistribution,
    n: int,
    trials: int,
    seed: int,
    chunk_size: int = DEFAULT_CHUNK,
    workers: int = 1,
    max_attempts: Optional[int] = None,
) -> TrialReport:
    """Sample-estimate-score `trials` times and aggregate."""
    report, _ = _run(dist, n, trials, seed, chunk_size, workers, max_attempts, False)
    return report


def statistic_suite(
    dist: OffspringDistribution,
    n: int,
    trials: int,
    seed: int,
    chunk_size: int = DEFAULT_CHUNK,
    workers: int = 1,
    max_attempts: Optional[int] = None,
) -> Tuple[TrialReport, Dict[str, np.ndarray]]:
    """run_trials plus the per-trial sample arrays (max degree, W/n, ...)."""
    report, samples = _run(
        dist, n, trials, seed, chunk_size, workers, max_attempts, True
    )
    return report, samples


def theory_prediction(dist: OffspringDistribution, n: int) -> Dict[str, Dict]:
    """Reference values for P{correct} at size n, each labelled exact or
    asymptotic.

    p_correct           closed form where one is known (binomial k-slot:
                        k/((k-1)n+2); mean-1 poisson: 1/n; geometric:
                        log2(n)/(2(n-1)), asymptotic)
    limit_p_correct     lim_n P{correct} = sum of i*p_i over special i,
                        when special degrees exist
    limit_n_p_correct   lim_n n*P{correct} = sup ratio(i), when no special
                        degree exists and the sup is finite
    """
    out: Dict[str, Dict] = {}
    if n < 1:
        raise InvalidParamsError("n must be positive")
    if dist.family == "binomial":
        k = dist.params["k"]
        out["p_correct"] = {"value": k / ((k - 1) * n + 2), "kind": "exact"}
    elif dist.family == "poisson":
        out["p_correct"] = {"value": 1.0 / n, "kind": "exact"}
    elif dist.family == "geometric" and n > 1:
        out["p_correct"] = {
            "value": math.log2(n) / (2.0 * (n - 1)),
            "kind": "asymptotic",
        }
    if dist.special_set:
        value = sum(i * dist.prob(i) for i in dist.special_set)
        out["limit_p_correct"] = {"value": float(value), "kind": "asymptotic"}
    else:
        sup = max(dist.ratio(i) for i in range(1, dist.max_degree + 1))
        out["limit_n_p_correct"] = {"value": float(sup), "kind": "asymptotic"}
    return out


# -- campaigns --------------------------------------------------------------


def check_report(report: TrialReport, checks: List[str]) -> Tuple[bool, List[str]]:
    """Evaluate named acceptance checks against a report."""
    failures: List[str] = []
    for name in checks:
        if name == "exact-3sigma":
            entry = report.predicted.get("p_correct")
            if entry is None or entry["kind"] != "exact":
                failures.append("exact-3sigma: no exact prediction available")
                continue
            p = entry["value"]
            sigma = math.sqrt(max(p * (1.0 - p), 0.0) / report.trials)
            if abs(report.empirical_rate - p) > 3.0 * sigma + 1e-12:
                failures.append(
                    f"exact-3sigma: rate {report.empirical_rate:.6g} vs {p:.6g}"
                )
        elif name == "asymptotic-band":
            entry = report.predicted.get("p_correct") or report.predicted.get(
                "limit_p_correct"
            )
            if entry is None:
                failures.append("asymptotic-band: no prediction available")
                continue
            p = entry["value"]
            if not (0.5 * p <= report.empirical_rate <= 2.0 * p):
                failures.append(
                    f"asymptotic-band: rate {report.empirical_rate:.6g} vs {p:.6g}"
                )
        else:
            failures.append(f"unknown check {name!r}")
    return not failures, failures


def run_campaign(entries: List[Dict]) -> List[Dict]:
    """Run a list of {dist, n, trials, seed, checks?} experiment configs.

    Returns one JSON-ready dict per entry: the trial report plus the check
    outcomes.
    """
    from .distribution import distribution_from_config

    rows: List[Dict] = []
    for i, entry in enumerate(entries):
        try:
            dist = distribution_from_config(entry["dist"])
            n = int(entry["n"])
            trials = int(entry["trials"])
            seed = int(entry.get("seed", i))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidParamsError(f"campaign entry {i}: {exc}") from exc
        report = run_trials(dist, n, trials, seed, workers=int(entry.get("workers", 1)))
        passed, failures = check_report(report, list(entry.get("checks", [])))
        row = report.to_json_dict()
        row["checks_passed"] = passed
        row["check_failures"] = failures
        rows.append(row)
    return rows


#: The five classic tree families: positional binary, labelled (mean-1
#: poisson), Motzkin, planted plane and full binary.
STANDARD_FAMILIES: Tuple[Dict, ...] = (
    {"family": "binomial", "params": {"k": 2}},
    {"family": "poisson", "params": {}},
    {"family": "uniform-set", "params": {"values": [0, 1, 2]}},
    {"family": "geometric", "params": {}},
    {"family": "uniform-set", "params": {"values": [0, 2]}},
)


def family_campaign(
    n: int = 100, trials: int = 10_000, seed: int = 0, workers: int = 1
) -> List[Dict]:
    """Empirical vs predicted correctness for the standard families.

    Some laws skip sizes (full binary trees only exist at odd n), so each
    family runs at the smallest feasible size >= n.
    """
    from .distribution import distribution_from_config
    from .sampler import is_feasible

    entries = []
    for i, config in enumerate(STANDARD_FAMILIES):
        dist = distribution_from_config(config)
        size = n
        while not is_feasible(dist, size):
            size += 1
        entries.append(
            {
                "dist": dict(config),
                "n": size,
                "trials": trials,
                "seed": seed + i,
                "workers": workers,
            }
        )
    return run_campaign(entries)


CSV_COLUMNS = [
    "label",
    "n",
    "trials",
    "seed",
    "empirical_correct",
    "empirical_rate",
    "wilson_low",
    "wilson_high",
    "mean_conditional_correctness",
    "mean_max_degree",
    "mean_W_over_n",
    "special_hit_rate",
    "predicted_name",
    "predicted_value",
    "predicted_kind",
    "checks_passed",
]


def campaign_csv_rows(rows: List[Dict]) -> List[Dict]:
    """Flatten campaign/report dicts into CSV-ready rows."""
    out = []
    for row in rows:
        predicted = row.get("predicted", {})
        if "p_correct" in predicted:
            pname = "p_correct"
        elif predicted:
            pname = sorted(predicted)[0]
        else:
            pname = ""
        entry = predicted.get(pname, {})
        out.append(
            {
                "label": row.get("label") or _dist_label(row.get("dist", {})),
                "n": row["n"],
                "trials": row["trials"],
                "seed": row["seed"],
                "empirical_correct": row["empirical_correct"],
                "empirical_rate": row["empirical_rate"],
                "wilson_low": row["wilson_low"],
                "wilson_high": row["wilson_high"],
                "mean_conditional_correctness": row["mean_conditional_correctness"],
                "mean_max_degree": row["mean_max_degree"],
                "mean_W_over_n": row["mean_W_over_n"],
                "special_hit_rate": row["special_hit_rate"],
                "predicted_name": pname,
                "predicted_value": entry.get("value", ""),
                "predicted_kind": entry.get("kind", ""),
                "checks_passed": row.get("checks_passed", ""),
            }
        )
    return out


def _dist_label(config: Dict) -> str:
    if "family" in config:
        params = config.get("params") or {}
        inner = ",".join(f"{k}={v}" for k, v in sorted(params.items()))
        return f"{config['family']}({inner})"
    return "explicit"
