"""Models for the number of users competing for scheduling in a cell.

Two analytic approximations bracket the truth:

* VORONOI_CELL — user count of a typical Poisson-Voronoi cell (gamma-area
  fit with shape c = 3.5), accurate when the achievable range covers the
  whole cell (dense BSs);
* ACHIEVABLE_RANGE — Poisson count of the users inside the power-control
  range R, accurate when that disc sits inside the cell (sparse BSs).

Each comes with the probability that its own validity event holds, and a
histogram-backed EMPIRICAL variant closes the loop with the simulator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaln

from .params import NetworkParams, ParameterError, outage_probability

VORONOI_SHAPE = 3.5  # gamma-fit shape constant for Poisson-Voronoi cell areas

_SUPPORT_CAP = 200_000


class ModelVariant(Enum):
    VORONOI_CELL = "voronoi"
    ACHIEVABLE_RANGE = "range"
    EMPIRICAL = "empirical"


# ----------------------------------------------------------------- PMFs

def _log_pmf_voronoi(n: int, ratio: float) -> float:
    """Log-PMF of the typical-cell user count: a negative binomial with
    stopping parameter c mixed over the gamma cell-area fit,

        f(n) = Gamma(n+c)/(n! Gamma(c)) * (c/(r+c))^c * (r/(r+c))^n,

    r = lambda_ue/lambda_bs.  Mean is exactly r.  (Equivalently
    (r/c)^n / ((c-1) B(n+1, c-1) (1 + r/c)^(n+c)) via the beta function;
    computed through log-gamma so n ~ 100 does not overflow.)
    """
    c = VORONOI_SHAPE
    if ratio == 0.0:
        return 0.0 if n == 0 else -math.inf
    lg = gammaln(n + c) - gammaln(n + 1) - gammaln(c)
    lg += c * math.log(c / (ratio + c)) + n * math.log(ratio / (ratio + c))
    return float(lg)


def pmf_voronoi(n: int, p: NetworkParams) -> float:
    """P(typical Voronoi cell holds exactly n users)."""
    if n < 0:
        raise ValueError(f"user count must be non-negative, got n={n}")
    if p.lambda_bs <= 0.0:
        raise ParameterError("Voronoi user-count model requires lambda_bs > 0")
    return math.exp(_log_pmf_voronoi(n, p.density_ratio))


def range_mean_users(p: NetworkParams) -> float:
    """Mean number of users inside the achievable-radius disc."""
    return p.lambda_ue * math.pi * p.achievable_radius ** 2


def pmf_range(n: int, p: NetworkParams) -> float:
    """P(exactly n users inside the achievable range) — Poisson."""
    if n < 0:
        raise ValueError(f"user count must be non-negative, got n={n}")
    mu = range_mean_users(p)
    if mu == 0.0:
        return 1.0 if n == 0 else 0.0
    return math.exp(n * math.log(mu) - mu - gammaln(n + 1))


# ------------------------------------------------------ validity weights

def validity_cell_in_range(p: NetworkParams) -> float:
    """Probability that the typical Voronoi cell lies inside the achievable
    range (at least one BS within R of a typical user): supports the
    VORONOI_CELL model.  Complements the power outage exactly."""
    return 1.0 - outage_probability(p)


def validity_range_in_cell(p: NetworkParams) -> float:
    """Probability that no other BS sits within 2R of the typical BS, so
    the achievable-range disc is not contested: supports ACHIEVABLE_RANGE."""
    return math.exp(-4.0 * p.bs_in_range)


# Regime boundaries are quoted to two significant digits (0.894 counts as
# clearing 0.9), so the comparison gets matching slack.
_THRESHOLD_SLACK = 0.01


def recommend_model(p: NetworkParams, threshold: float = 0.9) -> Optional[ModelVariant]:
    """Pick the user-count model whose validity event clears `threshold`,
    or None when neither does (mid-density regime: no analytic model is
    trustworthy and only the simulator applies).  The two events cannot
    both clear any threshold >= 0.5."""
    bar = threshold - _THRESHOLD_SLACK
    g_cell = validity_cell_in_range(p)
    g_range = validity_range_in_cell(p)
    if g_cell >= bar and g_range >= bar:  # impossible for threshold >= 0.5
        raise AssertionError("both validity probabilities cleared the threshold")
    if g_cell >= bar:
        return ModelVariant.VORONOI_CELL
    if g_range >= bar:
        return ModelVariant.ACHIEVABLE_RANGE
    return None


# ------------------------------------------------------------ model type

@dataclass(frozen=True)
class UserCountModel:
    """A distribution over the number of users contending in the typical
    cell.  Immutable; histogram is only set for the EMPIRICAL variant."""

    variant: ModelVariant
    params: Optional[NetworkParams] = None
    histogram: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.variant is ModelVariant.EMPIRICAL:
            h = np.asarray(self.histogram, dtype=float)
            if h.ndim != 1 or h.size == 0:
                raise ParameterError("empirical histogram must be a 1-D sequence")
            if np.any(h < 0.0):
                raise ParameterError(
                    "empirical histogram entries must be non-negative")
            tot = h.sum()
            if not math.isclose(tot, 1.0, rel_tol=0.0, abs_tol=1e-9):
                raise ParameterError(
                    f"empirical histogram must be normalized, sums to {tot}")
            object.__setattr__(self, "histogram", h)
        else:
            if self.params is None:
                raise ParameterError(f"{self.variant} model requires NetworkParams")
            if self.histogram is not None:
                raise ParameterError(
                    "histogram only applies to the EMPIRICAL variant")

    # constructors ----------------------------------------------------
    @classmethod
    def voronoi_cell(cls, p: NetworkParams) -> "UserCountModel":
        if p.lambda_bs <= 0.0:
            raise ParameterError("Voronoi user-count model requires lambda_bs > 0")
        return cls(ModelVariant.VORONOI_CELL, params=p)

    @classmethod
    def achievable_range(cls, p: NetworkParams) -> "UserCountModel":
        return cls(ModelVariant.ACHIEVABLE_RANGE, params=p)

    @classmethod
    def empirical(cls, histogram: Sequence[float]) -> "UserCountModel":
        return cls(ModelVariant.EMPIRICAL, histogram=np.asarray(histogram, dtype=float))

    # pmf -------------------------------------------------------------
    def pmf(self, n: int) -> float:
        if self.variant is ModelVariant.VORONOI_CELL:
            return pmf_voronoi(n, self.params)
        if self.variant is ModelVariant.ACHIEVABLE_RANGE:
            return pmf_range(n, self.params)
        h = self.histogram
        return float(h[n]) if 0 <= n < h.size else 0.0

    @property
    def zero_prob(self) -> float:
        """P(no user to schedule) — the supremum deficit of the SINR CCDF."""
        return self.pmf(0)

    def pmf_table(self, n_max: int) -> np.ndarray:
        return np.array([self.pmf(n) for n in range(n_max + 1)])


def truncation_support(model: UserCountModel, tail_mass: float = 1e-9) -> int:
    """Smallest n_max with sum_{n > n_max} pmf(n) < tail_mass."""
    if not 0.0 < tail_mass < 1.0:
        raise ValueError(f"tail_mass must be in (0,1), got {tail_mass}")
    if model.variant is ModelVariant.EMPIRICAL:
        h = model.histogram
        tail = 0.0
        for n in range(h.size - 1, -1, -1):
            if tail + h[n] >= tail_mass:
                return n
            tail += h[n]
        return 0
    acc = 0.0
    for n in range(_SUPPORT_CAP + 1):
        acc += model.pmf(n)
        if 1.0 - acc < tail_mass:
            return n
    raise RuntimeError(
        f"user-count support exceeds {_SUPPORT_CAP} at tail mass {tail_mass}")
