"""Critical offspring distributions and their degree-ratio structure.

A branching process with offspring law (p_i) is critical when sum_i i*p_i = 1.
Conditioning the process on total progeny n and forgetting the root turns it
into a distribution over free (unrooted, unlabelled) trees, and root recovery
in that setting is driven entirely by a few quantities of the offspring law:

  ratio(i)    i * p_i / p_{i-1}, the likelihood ratio in favour of a node of
              graph degree i having been the root; 0/0 reads as 0.
  special integers
              i >= 1 with p_i > 0 but p_{i-1} = 0.  A node whose graph degree
              is special has infinite ratio: no other rooting has positive
              probability.  Because p_0 > 0 for any critical non-degenerate
              law, 1 is never special.
  period      gcd of the support; a tree on n nodes is only feasible when
              n - 1 is a multiple of it.

Distributions with infinite support are truncated to finite support at a
configurable tail mass and renormalised; the truncated law is the model
everything downstream (sampling, estimation, oracles) refers to.  When every
mass is a ratio of integers the distribution is rational-backed and exact
arithmetic is available end to end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Tuple, Union

import numpy as np
from scipy.special import zeta

from .errors import CriticalityError, DegenerateError, InvalidParamsError

# Tolerances shared with the estimator and the oracles.
SUM_TOL = 1e-12
MEAN_TOL = 1e-9
RATIO_TIE_RTOL = 1e-12

DEFAULT_TAIL_EPSILON = 1e-12
# The polynomial tail sheds mean mass much faster than probability mass, so
# it needs a tighter default cut to stay critical within MEAN_TOL.
POLYNOMIAL_TAIL_EPSILON = 1e-15
MAX_TRUNCATED_SUPPORT = 1 << 22

ProbLike = Union[int, float, str, Fraction]


def _parse_prob(value: ProbLike) -> Tuple[float, Optional[Fraction]]:
    """Return (float value, exact Fraction or None) for one pmf entry."""
    if isinstance(value, Fraction):
        return float(value), value
    if isinstance(value, int):
        return float(value), Fraction(value)
    if isinstance(value, str):
        try:
            frac = Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidParamsError(f"cannot parse probability {value!r}") from exc
        return float(frac), frac
    if isinstance(value, float):
        return value, None
    raise InvalidParamsError(f"unsupported probability type {type(value).__name__}")


@dataclass(frozen=True)
class RatioTable:
    """Per-degree ratio structure of a distribution, degrees 0..max_degree+1.

    Degrees whose ratios agree (exactly for rational-backed laws, within
    relative RATIO_TIE_RTOL otherwise) share a tie class; ``rank`` orders the
    classes by ratio value with special degrees above everything, and
    ``values`` holds one canonical float per class so that equal-ratio degrees
    contribute identical summands downstream.
    """

    size: int
    values: np.ndarray  # canonical float ratio per degree, inf at special
    special: np.ndarray  # bool per degree
    eligible: np.ndarray  # p_degree > 0
    rank: np.ndarray  # tie-class rank, higher = larger ratio
    exact: Optional[Tuple[Optional[Fraction], ...]]  # None entries at special

    def lookup_value(self, degree: int) -> float:
        if 0 <= degree < self.size:
            return float(self.values[degree])
        return 0.0

    def lookup_exact(self, degree: int) -> Optional[Fraction]:
        if self.exact is None:
            return None
        if 0 <= degree < self.size:
            return self.exact[degree]
        return Fraction(0)


class OffspringDistribution:
    """A validated critical offspring law with finite support.

    Use :func:`make_family` or :meth:`from_pmf` rather than the constructor.
    """

    def __init__(
        self,
        probs: Mapping[int, float],
        exact: Optional[Mapping[int, Fraction]],
        family: Optional[str] = None,
        params: Optional[Dict] = None,
        slot_counts: Optional[Dict[int, int]] = None,
        tail_epsilon: Optional[float] = None,
    ):
        if not probs:
            raise InvalidParamsError("empty probability mapping")
        for i, p in probs.items():
            if not isinstance(i, int) or i < 0:
                raise InvalidParamsError(f"offspring count {i!r} is not a non-negative integer")
            if not math.isfinite(p) or p < 0.0:
                raise InvalidParamsError(f"probability p_{i} = {p!r} out of range")

        max_i = max(i for i, p in probs.items() if p > 0.0)
        dense = np.zeros(max_i + 1)
        for i, p in probs.items():
            if i <= max_i:
                dense[i] = p
        self._dense = dense
        self._exact: Optional[Dict[int, Fraction]] = None
        if exact is not None:
            self._exact = {i: q for i, q in exact.items() if q != 0}

        self.family = family
        self.params = dict(params) if params else {}
        self.tail_epsilon = tail_epsilon
        self._slot_counts = dict(slot_counts) if slot_counts else None
        self._table: Optional[RatioTable] = None
        self._cdf: Optional[np.ndarray] = None

        self._validate()

    # -- validation and derived quantities ---------------------------------

    def _validate(self) -> None:
        dense = self._dense
        total = float(dense.sum())
        if self._exact is not None:
            exact_total = sum(self._exact.values())
            if exact_total != 1:
                raise InvalidParamsError(f"probabilities sum to {exact_total}, not 1")
        elif abs(total - 1.0) > SUM_TOL:
            raise InvalidParamsError(f"probabilities sum to {total!r}, not 1")

        idx = np.arange(dense.size)
        mean = float(idx @ dense)
        if self._exact is not None:
            exact_mean = sum(i * q for i, q in self._exact.items())
            mean_err = abs(float(exact_mean - 1))
            self.mean = float(exact_mean)
        else:
            mean_err = abs(mean - 1.0)
            self.mean = mean
        if mean_err > MEAN_TOL:
            raise CriticalityError(
                f"offspring mean {self.mean!r} is not 1 within {MEAN_TOL:g}"
            )

        second = float((idx * idx) @ dense)
        self.variance = max(second - self.mean**2, 0.0)
        if self.variance <= 0.0:
            raise DegenerateError("offspring variance is zero")
        self.sigma = math.sqrt(self.variance)

        self.support: Tuple[int, ...] = tuple(int(i) for i in np.flatnonzero(dense > 0.0))
        if self.prob(0) <= 0.0:
            # Unreachable for a critical non-degenerate law; kept as a guard.
            raise InvalidParamsError("p_0 must be positive")
        self.max_degree = self.support[-1]
        self.period = math.gcd(*[i for i in self.support if i >= 1])
        self.special_set = frozenset(
            i for i in self.support if i >= 1 and self.prob(i - 1) == 0.0
        )
        # kappa: sup of p_i / p_{i-1} over non-special i >= 1.
        kappa = 0.0
        for i in range(1, self.max_degree + 1):
            if i in self.special_set or self.prob(i - 1) == 0.0:
                continue
            kappa = max(kappa, self.prob(i) / self.prob(i - 1))
        self.sup_ratio = kappa

    # -- basic access -------------------------------------------------------

    def prob(self, i: int) -> float:
        if 0 <= i < self._dense.size:
            return float(self._dense[i])
        return 0.0

    def prob_exact(self, i: int) -> Optional[Fraction]:
        """Exact mass at i, or None when the law is not rational-backed."""
        if self._exact is None:
            return None
        return self._exact.get(i, Fraction(0))

    @property
    def is_rational(self) -> bool:
        return self._exact is not None

    @property
    def dense_probs(self) -> np.ndarray:
        return self._dense

    def embedding_multiplicity(self, i: int) -> int:
        """Distinguishable child-slot arrangements for a node with i children.

        1 for most families; C(k, i) for the k-slot binomial family, whose
        natural uniform object assigns children to named slots.
        """
        if self._slot_counts is None:
            return 1
        return self._slot_counts.get(i, 1)

    def ratio(self, i: int) -> float:
        """i * p_i / p_{i-1} with the 0/0 = 0 convention; inf when i is special."""
        if i < 1:
            return 0.0
        if i in self.special_set:
            return math.inf
        p_prev = self.prob(i - 1)
        if p_prev == 0.0:
            return 0.0
        return i * self.prob(i) / p_prev

    def ratio_exact(self, i: int) -> Union[Fraction, float, None]:
        """Exact ratio (Fraction), inf at special degrees, None if float-backed."""
        if self._exact is None:
            return None
        if i < 1:
            return Fraction(0)
        if i in self.special_set:
            return math.inf
        p_prev = self.prob_exact(i - 1)
        if not p_prev:
            return Fraction(0)
        return i * self.prob_exact(i) / p_prev

    def special_integers(self) -> frozenset:
        return self.special_set

    # -- tie classes --------------------------------------------------------

    def ratio_table(self) -> RatioTable:
        """Tie-class table over degrees 0..max_degree+1 (larger degrees have
        zero mass and zero ratio, so callers clamp to the zero class)."""
        if self._table is not None:
            return self._table
        size = self.max_degree + 2
        degrees = list(range(size))
        special = np.array([i in self.special_set for i in degrees])
        eligible = np.array([self.prob(i) > 0.0 for i in degrees])

        if self.is_rational:
            exact_vals: list = [self.ratio_exact(i) for i in degrees]
            finite = sorted(
                {v for v in exact_vals if isinstance(v, Fraction)}
            )
            rank_of = {v: r for r, v in enumerate(finite)}
            rank = np.array(
                [len(finite) if special[i] else rank_of[exact_vals[i]] for i in degrees]
            )
            values = np.array(
                [math.inf if special[i] else float(exact_vals[i]) for i in degrees]
            )
            # Canonical float per class: representative of the smallest degree.
            canon: Dict[int, float] = {}
            for i in degrees:
                canon.setdefault(int(rank[i]), float(values[i]))
            values = np.array([canon[int(rank[i])] for i in degrees])
            exact = tuple(None if special[i] else exact_vals[i] for i in degrees)
        else:
            raw = [self.ratio(i) for i in degrees]
            finite_sorted = sorted({v for v in raw if math.isfinite(v)})
            # Merge values that agree within relative tolerance into one class.
            reps: list = []
            for v in finite_sorted:
                if reps and abs(v - reps[-1][-1]) <= RATIO_TIE_RTOL * max(abs(v), abs(reps[-1][-1]), 1e-300):
                    reps[-1].append(v)
                else:
                    reps.append([v])
            rank_of = {}
            for r, group in enumerate(reps):
                for v in group:
                    rank_of[v] = r
            rank = np.array(
                [len(reps) if special[i] else rank_of[raw[i]] for i in degrees]
            )
            # Canonical float per class: representative of the smallest degree,
            # so e.g. an all-ones ratio family keeps the exact 1.0 of R_1 even
            # if a far-tail ratio drifted an ulp inside the tie tolerance.
            canon = {}
            for i in degrees:
                if not special[i]:
                    canon.setdefault(int(rank[i]), raw[i])
            values = np.array(
                [math.inf if special[i] else canon[int(rank[i])] for i in degrees]
            )
            exact = None

        self._table = RatioTable(
            size=size,
            values=values,
            special=special,
            eligible=eligible,
            rank=rank,
            exact=exact,
        )
        return self._table

    # -- sampling support ---------------------------------------------------

    @property
    def cdf(self) -> np.ndarray:
        if self._cdf is None:
            self._cdf = np.cumsum(self._dense)
        return self._cdf

    # -- description --------------------------------------------------------

    def descriptor(self) -> Dict:
        """JSON-ready description; families keep their name and parameters,
        explicit laws serialise their pmf."""
        if self.family and self.family != "explicit":
            out: Dict = {"family": self.family, "params": dict(self.params)}
            if self.tail_epsilon is not None:
                out["tail_epsilon"] = self.tail_epsilon
            return out
        if self.is_rational:
            pmf = {str(i): str(self.prob_exact(i)) for i in self.support}
        else:
            pmf = {str(i): self.prob(i) for i in self.support}
        return {"pmf": pmf}

    def __repr__(self) -> str:
        if self.family and self.family != "explicit":
            return f"OffspringDistribution({self.family}, {self.params})"
        return f"OffspringDistribution(support={self.support})"

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_pmf(
        cls,
        pmf: Mapping[Union[int, str], ProbLike],
        family: Optional[str] = None,
        params: Optional[Dict] = None,
        slot_counts: Optional[Dict[int, int]] = None,
        tail_epsilon: Optional[float] = None,
    ) -> "OffspringDistribution":
        probs: Dict[int, float] = {}
        exact: Dict[int, Fraction] = {}
        all_exact = True
        for key, value in pmf.items():
            try:
                i = int(key)
            except (TypeError, ValueError) as exc:
                raise InvalidParamsError(f"bad offspring count {key!r}") from exc
            f, q = _parse_prob(value)
            probs[i] = f
            if q is None:
                all_exact = False
            else:
                exact[i] = q
        return cls(
            probs,
            exact if all_exact else None,
            family=family,
            params=params,
            slot_counts=slot_counts,
            tail_epsilon=tail_epsilon,
        )


# -- parametric families ----------------------------------------------------


def _binomial(k: int) -> OffspringDistribution:
    if not isinstance(k, int) or k < 2:
        raise InvalidParamsError("binomial family needs integer k >= 2")
    pmf = {
        i: Fraction(math.comb(k, i) * (k - 1) ** (k - i), k**k) for i in range(k + 1)
    }
    slots = {i: math.comb(k, i) for i in range(k + 1)}
    return OffspringDistribution.from_pmf(
        pmf, family="binomial", params={"k": k}, slot_counts=slots
    )


def _poisson(tail_epsilon: float) -> OffspringDistribution:
    # Mean-1 Poisson; irrational masses, so float-backed.
    terms = [math.exp(-1.0)]
    while sum(terms) < 1.0 - tail_epsilon:
        terms.append(terms[-1] / len(terms))
        if len(terms) > 200:
            raise InvalidParamsError("tail_epsilon too small for poisson truncation")
    total = sum(terms)
    pmf = {i: t / total for i, t in enumerate(terms)}
    return OffspringDistribution(
        pmf, None, family="poisson", params={}, tail_epsilon=tail_epsilon
    )


def _geometric(tail_epsilon: float) -> OffspringDistribution:
    # p_i = 2^-(i+1); dyadic, so rational backing survives truncation.
    m = 1
    while 2.0 ** -(m + 1) > tail_epsilon:
        m += 1
    norm = 1 - Fraction(1, 2 ** (m + 1))
    pmf = {i: Fraction(1, 2 ** (i + 1)) / norm for i in range(m + 1)}
    return OffspringDistribution.from_pmf(
        pmf, family="geometric", params={}, tail_epsilon=tail_epsilon
    )


def _uniform_set(values: Iterable[int]) -> OffspringDistribution:
    vals = sorted(set(int(v) for v in values))
    if not vals:
        raise InvalidParamsError("uniform-set needs at least one value")
    if any(v < 0 for v in vals):
        raise InvalidParamsError("uniform-set values must be non-negative")
    pmf = {v: Fraction(1, len(vals)) for v in vals}
    return OffspringDistribution.from_pmf(
        pmf, family="uniform-set", params={"values": vals}
    )


def _polynomial_tail(alpha: float, tail_epsilon: float) -> OffspringDistribution:
    """p_i = theta / (i+1)^alpha for i >= 1, p_0 making the law a critical pmf."""
    alpha = float(alpha)
    if not alpha > 3.0:
        raise InvalidParamsError("polynomial-tail needs alpha > 3 (finite variance)")
    theta = 1.0 / (zeta(alpha - 1.0) - zeta(alpha))
    p0 = 1.0 - theta * (zeta(alpha) - 1.0)
    if p0 <= 0.0:
        raise InvalidParamsError(f"alpha = {alpha} leaves no mass at zero")
    # Support cut from the integral bound: tail past m is at most
    # theta * (m+1)^(1-alpha) / (alpha-1).  The cut is chosen analytically
    # because a float cumsum cannot resolve mass differences near 1e-15.
    m = math.ceil((theta / ((alpha - 1.0) * tail_epsilon)) ** (1.0 / (alpha - 1.0)))
    if m > MAX_TRUNCATED_SUPPORT:
        raise InvalidParamsError(
            "polynomial-tail support too large; raise tail_epsilon or alpha"
        )
    i = np.arange(1, m + 1)
    masses = theta * (i + 1.0) ** (-alpha)
    total = p0 + math.fsum(masses)
    pmf = {0: p0 / total}
    pmf.update({int(j): float(masses[j - 1] / total) for j in range(1, m + 1)})
    return OffspringDistribution(
        pmf, None, family="polynomial-tail", params={"alpha": alpha},
        tail_epsilon=tail_epsilon,
    )


FAMILY_NAMES = (
    "binomial",
    "poisson",
    "geometric",
    "uniform-set",
    "polynomial-tail",
    "explicit",
)


def make_family(
    name: str,
    params: Optional[Mapping] = None,
    tail_epsilon: Optional[float] = None,
) -> OffspringDistribution:
    """Build a named critical family.

    binomial        params {"k": int}; offspring Binomial(k, 1/k)
    poisson         mean-1 Poisson, truncated
    geometric       p_i = 2^-(i+1), truncated
    uniform-set     params {"values": [..]}; uniform on the given set
    polynomial-tail params {"alpha": float > 3}; p_i = theta/(i+1)^alpha, i >= 1
    explicit        params {"pmf": {count: probability}}

    ``tail_epsilon`` bounds the probability mass removed when truncating an
    infinite-support family; it must lie in (0, 1e-6].
    """
    params = dict(params or {})
    if tail_epsilon is not None:
        if not (0.0 < tail_epsilon <= 1e-6):
            raise InvalidParamsError("tail_epsilon must lie in (0, 1e-6]")
    if name == "binomial":
        return _binomial(params.get("k"))
    if name == "poisson":
        return _poisson(tail_epsilon or DEFAULT_TAIL_EPSILON)
    if name == "geometric":
        return _geometric(tail_epsilon or DEFAULT_TAIL_EPSILON)
    if name == "uniform-set":
        if "values" not in params:
            raise InvalidParamsError("uniform-set needs params['values']")
        return _uniform_set(params["values"])
    if name == "polynomial-tail":
        if "alpha" not in params:
            raise InvalidParamsError("polynomial-tail needs params['alpha']")
        return _polynomial_tail(params["alpha"], tail_epsilon or POLYNOMIAL_TAIL_EPSILON)
    if name == "explicit":
        if "pmf" not in params:
            raise InvalidParamsError("explicit needs params['pmf']")
        return OffspringDistribution.from_pmf(params["pmf"], family="explicit")
    raise InvalidParamsError(f"unknown family {name!r}; known: {', '.join(FAMILY_NAMES)}")


def distribution_from_config(config: Mapping) -> OffspringDistribution:
    """Parse the JSON configuration form: either {"family", "params"} or
    {"pmf": {...}}, probabilities as numbers, decimal strings or "a/b"."""
    if "pmf" in config:
        return OffspringDistribution.from_pmf(config["pmf"], family="explicit")
    if "family" in config:
        return make_family(
            config["family"],
            config.get("params"),
            tail_epsilon=config.get("tail_epsilon"),
        )
    raise InvalidParamsError("distribution config needs 'family' or 'pmf'")
