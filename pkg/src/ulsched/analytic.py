"""Analytic engine: SINR coverage and rates under best-fade scheduling.

Model summary.  Every cell schedules, per resource block, the involved user
(serving distance within the power-control range R) whose instantaneous
over mean SNR is largest; with unit-mean Rayleigh fades that is simply the
largest fade among n contenders.  Conditioned on n, the CCDF of the uplink
SINR at the serving BS is an alternating binomial sum over k of

    exp(-k theta sigma^2 / rho_o) * L_I(k theta / rho_o),

where L_I is the Laplace transform of the aggregate interference from the
scheduled users of all other cells (approximated as a thinned PPP of
intensity (1 - f_N(0)) lambda_bs with i.i.d. inverted powers).  The
marginal CCDF mixes the conditional over a user-count model, the mean
spectral efficiencies follow by integrating CCDFs, and the scheduling gain
is the ratio of the scheduled rate to the round-robin baseline.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import mpmath as mp
import numpy as np

from .params import NetworkParams, SinrThreshold
from .specfun import (QuadratureSpec, alternating_binomial_sum,
                      integrate_semiinfinite, interference_exponent_scaled,
                      interference_exponent_scaled_mp, lower_incomplete_gamma)
from .usercount import ModelVariant, UserCountModel, truncation_support

_MP_PATH_MIN_N = 26  # alternating sums at or above this may need mpf terms

Theta = Union[float, SinrThreshold]


class UndefinedGainError(ValueError):
    """Round-robin rate is zero; the scheduling gain ratio is undefined."""


def _theta_value(theta: Theta) -> float:
    v = theta.value if isinstance(theta, SinrThreshold) else float(theta)
    if not (v > 0.0 and math.isfinite(v)):
        raise ValueError(f"SINR threshold must be positive and finite, got {v}")
    return v


# ------------------------------------------------------------ curve types

@dataclass(frozen=True)
class CcdfCurve:
    """A sampled SINR CCDF: P(SINR > theta) over an ordered theta grid."""

    thetas: np.ndarray            # linear thresholds, increasing
    probs: np.ndarray
    provenance: str               # "analytic" or "simulated"
    params: NetworkParams
    model_variant: Optional[ModelVariant] = None
    stderr: Optional[np.ndarray] = None   # per-point MC standard error

    def __post_init__(self):
        th = np.asarray(self.thetas, dtype=float)
        pr = np.asarray(self.probs, dtype=float)
        if th.shape != pr.shape or th.ndim != 1:
            raise ValueError("thetas and probs must be 1-D arrays of equal length")
        if np.any(np.diff(th) <= 0.0):
            raise ValueError("theta grid must be strictly increasing")
        if np.any(pr < -1e-12) or np.any(pr > 1.0 + 1e-12):
            raise ValueError("CCDF values must lie in [0, 1]")
        if np.any(np.diff(pr) > 1e-9):
            raise ValueError("CCDF must be non-increasing in theta")
        object.__setattr__(self, "thetas", th)
        object.__setattr__(self, "probs", pr)

    @property
    def thetas_db(self) -> np.ndarray:
        return 10.0 * np.log10(self.thetas)


@dataclass(frozen=True)
class RateReport:
    """Mean uplink spectral efficiencies (nats per channel use) and their
    ratio, the multi-user scheduling gain."""

    rate_scheduled: float
    rate_round_robin: float
    gain: float
    params: NetworkParams
    model_variant: ModelVariant
    # Monte Carlo reports carry standard errors; analytic ones leave None
    rate_scheduled_stderr: Optional[float] = None
    rate_round_robin_stderr: Optional[float] = None
    gain_stderr: Optional[float] = None

    def __post_init__(self):
        if self.rate_scheduled < 0.0 or self.rate_round_robin < 0.0:
            raise ValueError("rates must be non-negative")


def default_theta_grid_db(start_db: float = -20.0, stop_db: float = 30.0,
                          count: int = 101) -> np.ndarray:
    """The standard logarithmic threshold grid (values in dB)."""
    if count < 2:
        raise ValueError(f"theta grid needs at least 2 points, got {count}")
    return np.linspace(start_db, stop_db, count)


# ------------------------------------------------- interference transform

def _geometry_factor(p: NetworkParams, fN0: float) -> float:
    """K in L_I(s) = exp(-K * u(s rho_o)): all the geometry and power
    moments of the interferer field collapse into

        K = 2 (1 - fN0) * gamma(2, b) / (1 - e^(-b)),   b = pi lambda_bs R^2.

    The pi*lambda_bs of the PPP intensity cancels against the denominator
    of the fractional power moment E[p^(2/alpha)], which is where gamma(2,b)
    comes from (transmit powers are rho_o * d^alpha for serving distances
    conditioned to be within R).
    """
    if not 0.0 <= fN0 <= 1.0:
        raise ValueError(f"fN0 must be a probability, got {fN0}")
    b = p.bs_in_range
    if b == 0.0 or fN0 == 1.0:
        return 0.0
    return 2.0 * (1.0 - fN0) * lower_incomplete_gamma(2.0, b) / (-math.expm1(-b))


def laplace_interference(s: float, p: NetworkParams, fN0: float) -> float:
    """L_I(s) = E[e^(-s I)] for the scheduled-interferer field."""
    if s < 0.0:
        raise ValueError(f"Laplace argument must be non-negative, got s={s}")
    if s == 0.0:
        return 1.0
    K = _geometry_factor(p, fN0)
    if K == 0.0:
        return 1.0
    return math.exp(-K * interference_exponent_scaled(s * p.rho_target, p.alpha))


# ----------------------------------------------------- conditional  CCDF

def _sum_terms(theta: float, p: NetworkParams, fN0: float,
               interference_limited: bool):
    """Build the k -> term callables (double and high-precision) for the
    conditional CCDF at one threshold.  Both are memoized so that sweeping
    n re-uses every Laplace evaluation at the scaled arguments k*theta."""
    K = _geometry_factor(p, fN0)
    noise = 0.0 if interference_limited else p.noise_power / p.rho_target
    alpha = p.alpha
    cache_f: dict = {}
    cache_m: dict = {}

    def term(k: int) -> float:
        v = cache_f.get(k)
        if v is None:
            tk = k * theta
            v = math.exp(-tk * noise - K * interference_exponent_scaled(tk, alpha))
            cache_f[k] = v
        return v

    def term_mp(k: int):
        v = cache_m.get(k)
        if v is None:
            tk = mp.mpf(k) * theta
            v = mp.exp(-tk * noise - K * interference_exponent_scaled_mp(tk, alpha))
            cache_m[k] = v
        return v

    return term, term_mp, cache_m


def conditional_ccdf(theta: Theta, n: int, p: NetworkParams, fN0: float,
                     interference_limited: bool = False) -> float:
    """P(SINR > theta | n involved users), n >= 1."""
    th = _theta_value(theta)
    if n < 1:
        raise ValueError(f"conditional CCDF needs n >= 1, got n={n}")
    term, term_mp, _ = _sum_terms(th, p, fN0, interference_limited)
    return alternating_binomial_sum(n, term, term_mp=term_mp)


def conditional_ccdf_closed_form(theta: Theta, n: int, fN0: float) -> float:
    """The fully collapsed regime (alpha=4, interference-limited, cap so
    high that truncation never binds): each summand is
    exp(-(1-fN0) sqrt(k theta) arctan sqrt(k theta))."""
    th = _theta_value(theta)
    if n < 1:
        raise ValueError(f"conditional CCDF needs n >= 1, got n={n}")
    if not 0.0 <= fN0 <= 1.0:
        raise ValueError(f"fN0 must be a probability, got {fN0}")
    w = 1.0 - fN0

    def term(k: int) -> float:
        r = math.sqrt(k * th)
        return math.exp(-w * r * math.atan(r))

    def term_mp(k: int):
        r = mp.sqrt(mp.mpf(k) * th)
        return mp.exp(-w * r * mp.atan(r))

    return alternating_binomial_sum(n, term, term_mp=term_mp)


def _conditional_profile(theta: float, n_max: int, p: NetworkParams, fN0: float,
                         interference_limited: bool) -> np.ndarray:
    """conditional_ccdf(theta, n) for n = 1..n_max, sharing one term table.

    When any n needs the extended-precision path, the whole term table is
    precomputed at the working precision of the largest n first: terms
    cached at too low a precision would silently poison the bigger sums.
    """
    term, term_mp, cache_m = _sum_terms(theta, p, fN0, interference_limited)
    if n_max >= _MP_PATH_MIN_N:
        from .specfun import _alternating_sum_dps
        with mp.workdps(_alternating_sum_dps(n_max)):
            for k in range(1, n_max + 1):
                term_mp(k)
    out = np.empty(n_max)
    for n in range(1, n_max + 1):
        out[n - 1] = alternating_binomial_sum(n, term, term_mp=term_mp)
    return out


# -------------------------------------------------------- marginal  CCDF

def marginal_ccdf(theta: Theta, model: UserCountModel, p: NetworkParams,
                  interference_limited: bool = False,
                  tail_mass: float = 1e-9) -> float:
    """P(SINR > theta) with the user count marginalized out.  The model's
    own zero-probability drives both the n=0 outage mass and the interferer
    thinning inside the Laplace transform (one value, both places)."""
    th = _theta_value(theta)
    n_max = truncation_support(model, tail_mass)
    if n_max == 0:
        return 0.0
    pmf = model.pmf_table(n_max)
    profile = _conditional_profile(th, n_max, p, float(pmf[0]), interference_limited)
    return float(pmf[1:] @ profile)


def sinr_ccdf_curve(model: UserCountModel, p: NetworkParams,
                    theta_db: Optional[Sequence[float]] = None,
                    interference_limited: bool = False) -> CcdfCurve:
    """Marginal CCDF sampled over a dB grid (default −20..+30, 101 pts)."""
    grid_db = np.asarray(default_theta_grid_db() if theta_db is None else theta_db,
                         dtype=float)
    thetas = 10.0 ** (grid_db / 10.0)
    n_max = truncation_support(model)
    if n_max == 0:
        probs = np.zeros_like(thetas)
        return CcdfCurve(thetas, probs, "analytic", p, model.variant)
    pmf = model.pmf_table(n_max)
    fN0 = float(pmf[0])
    probs = np.empty_like(thetas)
    for i, th in enumerate(thetas):
        profile = _conditional_profile(float(th), n_max, p, fN0, interference_limited)
        probs[i] = pmf[1:] @ profile
    if np.any(probs > 1.0 - fN0 + 1e-9):
        raise AssertionError("analytic CCDF exceeded its supremum 1 - f_N(0)")
    probs = np.minimum(probs, 1.0 - fN0)
    # enforce exact monotonicity against ~1e-15 quadrature jitter
    probs = np.minimum.accumulate(probs)
    return CcdfCurve(thetas, probs, "analytic", p, model.variant)


# ------------------------------------------------------------------ rates

def rate_scheduled(model: UserCountModel, p: NetworkParams,
                   spec: Optional[QuadratureSpec] = None,
                   interference_limited: bool = False) -> float:
    """Mean ln(1+SINR) under best-fade scheduling, in nats: the expectation
    over n of the per-n rate integral_0^inf P(SINR > x | n)/(1+x) dx.  All
    per-n integrals ride one vector-valued adaptive quadrature."""
    n_max = truncation_support(model)
    if n_max == 0:
        return 0.0
    pmf = model.pmf_table(n_max)
    fN0 = float(pmf[0])

    def integrand(x: float) -> np.ndarray:
        return _conditional_profile(x, n_max, p, fN0, interference_limited) / (1.0 + x)

    per_n = integrate_semiinfinite(integrand, spec)
    return float(pmf[1:] @ per_n)


def rate_round_robin(model: UserCountModel, p: NetworkParams,
                     spec: Optional[QuadratureSpec] = None,
                     interference_limited: bool = False) -> float:
    """Mean ln(1+SINR) when the scheduled user is drawn uniformly from the
    involved ones: (1-fN0) * integral_0^inf e^(-x sigma^2/rho_o)/(1+x) *
    L_I(x/rho_o) dx.  Empty cells contribute zero rate."""
    fN0 = model.zero_prob
    if fN0 >= 1.0:
        return 0.0
    K = _geometry_factor(p, fN0)
    noise = 0.0 if interference_limited else p.noise_power / p.rho_target
    alpha = p.alpha

    def integrand(x: float) -> float:
        return math.exp(-x * noise - K * interference_exponent_scaled(x, alpha)) / (1.0 + x)

    val = integrate_semiinfinite(integrand, spec)
    return (1.0 - fN0) * float(val)


def scheduling_gain(model: UserCountModel, p: NetworkParams,
                    spec: Optional[QuadratureSpec] = None,
                    interference_limited: bool = False) -> RateReport:
    """Scheduled over round-robin rate ratio; >= 1 whenever defined."""
    tau_s = rate_scheduled(model, p, spec, interference_limited)
    tau_r = rate_round_robin(model, p, spec, interference_limited)
    if tau_r == 0.0:
        raise UndefinedGainError(
            "round-robin rate is zero (no users to schedule); gain undefined")
    return RateReport(rate_scheduled=tau_s, rate_round_robin=tau_r,
                      gain=tau_s / tau_r, params=p, model_variant=model.variant)
