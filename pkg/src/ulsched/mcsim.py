"""Ground-truth Monte Carlo engine.

Each trial realizes the full system once — fresh Poisson point processes
for base stations and users in a disc window, nearest-BS association,
truncated channel inversion, per-cell best-fade (or round-robin)
scheduling — and measures the SINR at a uniformly chosen "typical" BS
near the window center.  Nothing is approximated: interference comes from
the actually scheduled users of the other cells, with their actual
inverted transmit powers and independent cross-link Rayleigh fades.

Reproducibility: trial t draws from a counter-based stream
Philox(key=seed, counter=t << 128), so any partition of trials across
workers produces bit-identical per-trial records, and all aggregation
happens over the concatenated record array in trial order.
"""
from __future__ import annotations

import math
import multiprocessing
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .analytic import CcdfCurve, RateReport, UndefinedGainError
from .params import NetworkParams, ParameterError
from .usercount import ModelVariant, UserCountModel

_TWO_PI = 2.0 * math.pi

_RECORD_DTYPE = np.dtype([
    ("valid", np.bool_),              # a measurement BS existed
    ("sinr", np.float64),             # best-fade scheduler; NaN if cell idle
    ("sinr_rr", np.float64),          # round-robin scheduler; NaN if cell idle
    ("interference", np.float64),     # at the measurement BS, best-fade interferers (mW)
    ("interference_rr", np.float64),
    ("meas_involved", np.int64),      # involved users in the measurement cell
    # user totals restricted to the core half-window, where association is
    # free of window-edge bias (a user near the rim sees no BSs beyond it)
    ("n_users", np.int64),
    ("n_involved", np.int64),
])


class Scheduler(Enum):
    NORMALIZED_SNR = "normalized-snr"
    ROUND_ROBIN = "round-robin"


class MeasurementRule(Enum):
    TYPICAL_BS = "typical-bs"


@dataclass(frozen=True)
class SimulationConfig:
    trials: int = 10_000
    window_radius: Optional[float] = None      # meters; None -> max(10/sqrt(lambda_bs), 4R)
    seed: int = 0
    measurement: MeasurementRule = MeasurementRule.TYPICAL_BS
    scheduler: Scheduler = Scheduler.NORMALIZED_SNR
    jobs: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ParameterError(f"trials must be >= 1, got {self.trials}")
        if self.window_radius is not None and not self.window_radius > 0.0:
            raise ParameterError(
                f"window_radius must be positive, got {self.window_radius}")
        if not 0 <= self.seed < 2 ** 64:
            raise ParameterError(f"seed must be a 64-bit value, got {self.seed}")
        if self.jobs < 1:
            raise ParameterError(f"jobs must be >= 1, got {self.jobs}")


def default_window_radius(p: NetworkParams) -> float:
    """max(10/sqrt(lambda_bs), 4R): wide enough that truncating interferers
    at the edge is negligible next to Monte Carlo error."""
    if p.lambda_bs <= 0.0:
        raise ParameterError(
            "no default window for lambda_bs = 0; pass window_radius explicitly")
    return max(10.0 / math.sqrt(p.lambda_bs), 4.0 * p.achievable_radius)


def resolve_window_radius(p: NetworkParams, cfg: SimulationConfig) -> float:
    w = cfg.window_radius if cfg.window_radius is not None else default_window_radius(p)
    if w < 2.0 * p.achievable_radius:
        raise ParameterError(
            f"window_radius {w:.1f} m is below 2R = {2 * p.achievable_radius:.1f} m")
    return w


@dataclass(frozen=True)
class NetworkRealization:
    """One snapshot of the network plus everything the measurement needs."""

    bs_points: np.ndarray             # (B, 2) meters
    user_points: np.ndarray           # (U, 2)
    association: np.ndarray           # (U,) serving BS index
    serving_distance: np.ndarray      # (U,) meters
    involved_flags: np.ndarray        # (U,) bool: within R of the serving BS
    fading: np.ndarray                # (U,) unit-mean exponential h
    cross_fades: np.ndarray           # (B,) per-interfering-cell fade g to the measurement BS
    scheduled: np.ndarray             # (B,) scheduled user index, -1 = idle cell
    scheduled_round_robin: np.ndarray
    tx_power: np.ndarray              # (U,) mW for involved users, NaN otherwise
    measurement_bs: int               # -1 when no candidate BS exists
    window_radius: float
    trial_index: int

    @property
    def empty(self) -> bool:
        return self.bs_points.shape[0] == 0


def select_best_fade(association: np.ndarray, fades: np.ndarray,
                     involved: np.ndarray, n_bs: int) -> np.ndarray:
    """Per-cell argmax of the fade over involved users; -1 for idle cells.
    The normalized-SNR rule reduces to this because the deterministic mean
    SNR divides out.  Ties (measure zero) go to the lowest user index."""
    chosen = np.full(n_bs, -1, dtype=np.int64)
    idx = np.nonzero(involved)[0]
    if idx.size == 0:
        return chosen
    cells = association[idx]
    # sort by cell, then fade; equal fades ordered by descending index so the
    # run's last element is the lowest-index maximizer
    order = np.lexsort((-idx, fades[idx], cells))
    cells_sorted = cells[order]
    last = np.nonzero(np.r_[cells_sorted[1:] != cells_sorted[:-1], True])[0]
    chosen[cells_sorted[last]] = idx[order][last]
    return chosen


def _trial_arrays(p: NetworkParams, cfg: SimulationConfig, trial_index: int):
    """All random draws and derived arrays for one trial, in a fixed order."""
    w = resolve_window_radius(p, cfg)
    rng = np.random.Generator(np.random.Philox(key=cfg.seed,
                                               counter=trial_index << 128))
    area = math.pi * w * w
    n_bs = int(rng.poisson(p.lambda_bs * area))
    n_ue = int(rng.poisson(p.lambda_ue * area))

    def disc(n: int) -> np.ndarray:
        radius = w * np.sqrt(rng.random(n))
        angle = _TWO_PI * rng.random(n)
        return np.column_stack((radius * np.cos(angle), radius * np.sin(angle)))

    bs = disc(n_bs)
    ue = disc(n_ue)
    h = rng.standard_exponential(n_ue)
    rr_key = rng.random(n_ue)
    g = rng.standard_exponential(n_bs)

    if n_bs == 0:
        assoc = np.zeros(0, dtype=np.int64)
        dist = np.zeros(0)
    else:
        dist, assoc = cKDTree(bs).query(ue)
        assoc = assoc.astype(np.int64)
    involved = dist <= p.achievable_radius

    sched = select_best_fade(assoc, h, involved, n_bs)
    sched_rr = select_best_fade(assoc, rr_key, involved, n_bs)

    tx = np.full(n_ue, np.nan)
    tx[involved] = p.rho_target * dist[involved] ** p.alpha

    core = np.nonzero(np.hypot(bs[:, 0], bs[:, 1]) <= 0.5 * w)[0]
    meas = int(core[rng.integers(core.size)]) if core.size else -1
    return w, bs, ue, assoc, dist, involved, h, rr_key, g, sched, sched_rr, tx, meas


def sample_realization(p: NetworkParams, cfg: SimulationConfig,
                       trial_index: int) -> NetworkRealization:
    """Deterministic function of (params, config, seed, trial_index)."""
    (w, bs, ue, assoc, dist, involved, h, rr_key, g, sched, sched_rr, tx,
     meas) = _trial_arrays(p, cfg, trial_index)
    if cfg.scheduler is Scheduler.ROUND_ROBIN:
        sched, sched_rr = sched_rr, sched
    return NetworkRealization(
        bs_points=bs, user_points=ue, association=assoc, serving_distance=dist,
        involved_flags=involved, fading=h, cross_fades=g, scheduled=sched,
        scheduled_round_robin=sched_rr, tx_power=tx, measurement_bs=meas,
        window_radius=w, trial_index=trial_index)


def _interference_at(bs: np.ndarray, ue: np.ndarray, tx: np.ndarray,
                     g: np.ndarray, sched: np.ndarray, meas: int,
                     alpha: float) -> float:
    """Sum of g * p * d^-alpha over the scheduled users of all other cells."""
    cells = np.nonzero(sched >= 0)[0]
    cells = cells[cells != meas]
    if cells.size == 0:
        return 0.0
    users = sched[cells]
    d = np.hypot(ue[users, 0] - bs[meas, 0], ue[users, 1] - bs[meas, 1])
    return float(np.sum(g[cells] * tx[users] * d ** -alpha))


def measure_sinr(r: NetworkRealization, p: NetworkParams) -> Optional[float]:
    """SINR of the scheduled user at the measurement BS, or None when the
    measurement cell has no involved user (or no BS exists at all)."""
    if r.measurement_bs < 0:
        return None
    u = int(r.scheduled[r.measurement_bs])
    if u < 0:
        return None
    intf = _interference_at(r.bs_points, r.user_points, r.tx_power,
                            r.cross_fades, r.scheduled, r.measurement_bs, p.alpha)
    return float(r.fading[u] * p.rho_target / (p.noise_power + intf))


def _run_one(p: NetworkParams, cfg: SimulationConfig, trial_index: int) -> tuple:
    (w, bs, ue, assoc, dist, involved, h, rr_key, g, sched, sched_rr, tx,
     meas) = _trial_arrays(p, cfg, trial_index)
    core_ue = np.hypot(ue[:, 0], ue[:, 1]) <= 0.5 * w
    n_users = int(np.count_nonzero(core_ue))
    n_involved = int(np.count_nonzero(core_ue & involved))
    if meas < 0:
        return (False, math.nan, math.nan, math.nan, math.nan, 0,
                n_users, n_involved)
    alpha = p.alpha
    i_ns = _interference_at(bs, ue, tx, g, sched, meas, alpha)
    i_rr = _interference_at(bs, ue, tx, g, sched_rr, meas, alpha)
    u_ns = int(sched[meas])
    u_rr = int(sched_rr[meas])
    sinr_ns = (h[u_ns] * p.rho_target / (p.noise_power + i_ns)
               if u_ns >= 0 else math.nan)
    sinr_rr = (h[u_rr] * p.rho_target / (p.noise_power + i_rr)
               if u_rr >= 0 else math.nan)
    n_meas = int(np.count_nonzero(involved & (assoc == meas)))
    return (True, sinr_ns, sinr_rr, i_ns, i_rr, n_meas, n_users, n_involved)


def _run_chunk(args) -> np.ndarray:
    p, cfg, lo, hi = args
    out = np.empty(hi - lo, dtype=_RECORD_DTYPE)
    for i, t in enumerate(range(lo, hi)):
        out[i] = _run_one(p, cfg, t)
    return out


def run_trials(p: NetworkParams, cfg: SimulationConfig) -> np.ndarray:
    """Per-trial measurement records, always in trial order; the worker
    count never changes a single bit of the result."""
    trials = cfg.trials
    if cfg.jobs == 1 or trials < 4:
        return _run_chunk((p, cfg, 0, trials))
    n_chunks = min(cfg.jobs * 4, trials)
    bounds = np.linspace(0, trials, n_chunks + 1).astype(int)
    tasks = [(p, cfg, int(lo), int(hi))
             for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(cfg.jobs) as pool:
        parts = pool.map(_run_chunk, tasks)
    return np.concatenate(parts)


# ------------------------------------------------------------- estimators

def empirical_ccdf(p: NetworkParams, cfg: SimulationConfig,
                   thetas: Sequence[float],
                   records: Optional[np.ndarray] = None) -> CcdfCurve:
    """P(SINR > theta) across trials; idle-cell trials count as not
    exceeding any threshold, so the curve tops out near 1 - f_N(0)."""
    th = np.asarray(thetas, dtype=float)
    rec = run_trials(p, cfg) if records is None else records
    key = "sinr" if cfg.scheduler is Scheduler.NORMALIZED_SNR else "sinr_rr"
    samples = rec[key]
    trials = rec.shape[0]
    # NaN (idle or invalid) never exceeds
    exceed = np.array([np.count_nonzero(samples > t) for t in th], dtype=float)
    probs = exceed / trials
    stderr = np.sqrt(probs * (1.0 - probs) / trials)
    return CcdfCurve(thetas=th, probs=probs, provenance="simulated", params=p,
                     model_variant=None, stderr=stderr)


def empirical_user_count(p: NetworkParams, cfg: SimulationConfig,
                         records: Optional[np.ndarray] = None) -> UserCountModel:
    """Normalized histogram of involved-user counts in the measurement cell."""
    rec = run_trials(p, cfg) if records is None else records
    counts = rec["meas_involved"][rec["valid"]]
    if counts.size == 0:
        raise ParameterError("no valid trials: window never contained a BS")
    hist = np.bincount(counts).astype(float)
    return UserCountModel.empirical(hist / counts.size)


def empirical_rates(p: NetworkParams, cfg: SimulationConfig,
                    records: Optional[np.ndarray] = None) -> RateReport:
    """Mean ln(1+SINR) under both schedulers from common realizations, the
    gain ratio, and delta-method standard errors (the two rates share
    randomness, so the ratio error uses their covariance)."""
    rec = run_trials(p, cfg) if records is None else records
    trials = rec.shape[0]
    x = np.log1p(np.nan_to_num(rec["sinr"], nan=0.0))
    y = np.log1p(np.nan_to_num(rec["sinr_rr"], nan=0.0))
    tau_s = float(np.mean(x))
    tau_r = float(np.mean(y))
    se_s = float(np.std(x, ddof=1) / math.sqrt(trials)) if trials > 1 else math.nan
    se_r = float(np.std(y, ddof=1) / math.sqrt(trials)) if trials > 1 else math.nan
    if tau_r == 0.0:
        raise UndefinedGainError(
            "round-robin rate estimate is zero; gain undefined")
    gain = tau_s / tau_r
    if trials > 1:
        cov = float(np.cov(x, y, ddof=1)[0, 1])
        var_gain = (np.var(x, ddof=1) / tau_r ** 2
                    + tau_s ** 2 * np.var(y, ddof=1) / tau_r ** 4
                    - 2.0 * tau_s * cov / tau_r ** 3) / trials
        se_gain = float(math.sqrt(max(var_gain, 0.0)))
    else:
        se_gain = math.nan
    return RateReport(rate_scheduled=tau_s, rate_round_robin=tau_r, gain=gain,
                      params=p, model_variant=ModelVariant.EMPIRICAL,
                      rate_scheduled_stderr=se_s, rate_round_robin_stderr=se_r,
                      gain_stderr=se_gain)


def empirical_laplace(p: NetworkParams, cfg: SimulationConfig,
                      s_values: Sequence[float],
                      records: Optional[np.ndarray] = None
                      ) -> Tuple[np.ndarray, np.ndarray]:
    """MC estimate of E[e^(-s I)] at the measurement BS with best-fade
    interferers, one (estimate, stderr) pair per s.  This is the audit
    hook for the analytic engine's thinned-PPP interference transform."""
    rec = run_trials(p, cfg) if records is None else records
    intf = rec["interference"][rec["valid"]]
    intf = intf[np.isfinite(intf)]
    if intf.size == 0:
        raise ParameterError("no valid trials to estimate the transform from")
    est = np.empty(len(s_values))
    err = np.empty(len(s_values))
    for i, s in enumerate(s_values):
        if s < 0.0:
            raise ValueError(f"Laplace argument must be non-negative, got {s}")
        e = np.exp(-s * intf)
        est[i] = np.mean(e)
        err[i] = np.std(e, ddof=1) / math.sqrt(e.size) if e.size > 1 else math.nan
    return est, err


# --------------------------------------------------------------- plumbing

_REALIZATION_COLUMNS = ("kind", "x_m", "y_m", "serving_bs", "involved",
                        "scheduled", "tx_power_mw")


def realization_table(r: NetworkRealization) -> Tuple[Tuple[str, ...], List[list]]:
    """Flatten one snapshot to rows for a plain-text dump: BS rows first
    (serving/involved/tx blank), then user rows."""
    rows: List[list] = []
    sched_users = set(int(u) for u in r.scheduled if u >= 0)
    for b in range(r.bs_points.shape[0]):
        rows.append(["bs", float(r.bs_points[b, 0]), float(r.bs_points[b, 1]),
                     "", "", "", ""])
    for u in range(r.user_points.shape[0]):
        tx = r.tx_power[u]
        rows.append(["user", float(r.user_points[u, 0]),
                     float(r.user_points[u, 1]), int(r.association[u]),
                     int(bool(r.involved_flags[u])), int(u in sched_users),
                     "" if math.isnan(tx) else float(tx)])
    return _REALIZATION_COLUMNS, rows
