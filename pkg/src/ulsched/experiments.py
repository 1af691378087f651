"""Figure-reproduction experiments: each returns (columns, rows, manifest).

This is the engine room behind both the service endpoints and the CLI.
Rows hold plain numbers (None for absent cells); the manifest records
every resolved parameter in SI units plus the seed and library versions,
and deliberately nothing time- or host-dependent, so identical requests
yield identical tables.
"""
from __future__ import annotations

import math
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
import scipy

from . import __version__
from .analytic import (RateReport, UndefinedGainError, scheduling_gain,
                       sinr_ccdf_curve)
from .csvio import Cell
from .mcsim import (SimulationConfig, empirical_ccdf, empirical_rates,
                    empirical_user_count, realization_table,
                    resolve_window_radius, run_trials, sample_realization)
from .params import (NetworkParams, ParameterError, outage_probability,
                     per_km2_to_per_m2)
from .usercount import (ModelVariant, UserCountModel, recommend_model,
                        truncation_support, validity_cell_in_range,
                        validity_range_in_cell)

Table = Tuple[List[str], List[List[Cell]], Dict[str, Cell]]

_ANALYTIC_ENGINES = {"analytic-1": ModelVariant.VORONOI_CELL,
                     "analytic-2": ModelVariant.ACHIEVABLE_RANGE}


def _model_for(engine: str, p: NetworkParams) -> UserCountModel:
    variant = _ANALYTIC_ENGINES[engine]
    if variant is ModelVariant.VORONOI_CELL:
        return UserCountModel.voronoi_cell(p)
    return UserCountModel.achievable_range(p)


def choose_model(p: NetworkParams, choice: str) -> UserCountModel:
    """Resolve a user-count model name; "auto" picks the variant whose
    validity indicator is higher (preferring one that clears the 0.9 bar)."""
    if choice == "voronoi":
        return UserCountModel.voronoi_cell(p)
    if choice == "range":
        return UserCountModel.achievable_range(p)
    if choice != "auto":
        raise ParameterError(f"unknown model choice {choice!r}")
    rec = recommend_model(p)
    if rec is ModelVariant.ACHIEVABLE_RANGE:
        return UserCountModel.achievable_range(p)
    if rec is ModelVariant.VORONOI_CELL:
        return UserCountModel.voronoi_cell(p)
    if validity_range_in_cell(p) > validity_cell_in_range(p):
        return UserCountModel.achievable_range(p)
    return UserCountModel.voronoi_cell(p)


def _clean(v) -> Cell:
    if v is None:
        return None
    f = float(v)
    return None if math.isnan(f) else f


def _base_manifest(command: str, p: NetworkParams) -> Dict[str, Cell]:
    return {
        "command": command,
        "package": f"ulsched {__version__}",
        "engine_versions": (f"numpy {np.__version__}; scipy {scipy.__version__}; "
                            f"mpmath {mpmath.__version__}"),
        "lambda_bs_per_m2": p.lambda_bs,
        "lambda_ue_per_m2": p.lambda_ue,
        "alpha": p.alpha,
        "noise_mw": p.noise_power,
        "p_max_mw": p.p_max,
        "rho_target_mw": p.rho_target,
        "achievable_radius_m": p.achievable_radius,
    }


def _sim_manifest(p: NetworkParams, cfg: SimulationConfig) -> Dict[str, Cell]:
    # deliberately excludes the worker count: outputs are defined by
    # (params, trials, seed, window) alone and must not vary with it
    return {
        "trials": cfg.trials,
        "seed": cfg.seed,
        "window_radius_m": resolve_window_radius(p, cfg),
        "scheduler": cfg.scheduler.value,
    }


def theta_grid_db(start_db: float, stop_db: float, count: int) -> np.ndarray:
    if count < 1:
        raise ParameterError(f"grid count must be >= 1, got {count}")
    if count == 1:
        return np.array([start_db])
    if not stop_db > start_db:
        raise ParameterError("grid needs stop > start")
    return np.linspace(start_db, stop_db, count)


def run_ccdf(p: NetworkParams, cfg: SimulationConfig, grid_db: Sequence[float],
             engines: Sequence[str]) -> Table:
    """SINR CCDF per engine over a dB threshold grid."""
    _check_engines(engines)
    grid_db = np.asarray(grid_db, dtype=float)
    thetas = 10.0 ** (grid_db / 10.0)
    cols = ["theta_db", "analytic_fn1", "analytic_fn2", "sim_mean", "sim_stderr"]
    series: Dict[str, Optional[np.ndarray]] = {c: None for c in cols[1:]}
    for engine, col in (("analytic-1", "analytic_fn1"),
                        ("analytic-2", "analytic_fn2")):
        if engine in engines:
            model = _model_for(engine, p)
            series[col] = sinr_ccdf_curve(model, p, theta_db=grid_db).probs
    if "sim" in engines:
        curve = empirical_ccdf(p, cfg, thetas)
        series["sim_mean"] = curve.probs
        series["sim_stderr"] = curve.stderr
    rows: List[List[Cell]] = []
    for i, th in enumerate(grid_db):
        rows.append([float(th)] + [
            _clean(series[c][i]) if series[c] is not None else None
            for c in cols[1:]])
    manifest = _base_manifest("ccdf", p)
    manifest.update(_sim_manifest(p, cfg) if "sim" in engines else {})
    manifest.update({"engines": " ".join(engines),
                     "theta_db_grid": f"{grid_db[0]}:{grid_db[-1]}:{grid_db.size}"})
    return cols, rows, manifest


def run_rate(p: NetworkParams, cfg: SimulationConfig,
             engines: Sequence[str]) -> Table:
    """Spectral efficiencies and gain, one row per engine."""
    _check_engines(engines)
    cols = ["engine", "rate_scheduled", "rate_round_robin", "gain",
            "rate_scheduled_stderr", "rate_round_robin_stderr", "gain_stderr"]
    rows: List[List[Cell]] = []

    def add(engine: str, rep: RateReport):
        rows.append([engine, rep.rate_scheduled, rep.rate_round_robin, rep.gain,
                     _clean(rep.rate_scheduled_stderr),
                     _clean(rep.rate_round_robin_stderr),
                     _clean(rep.gain_stderr)])

    for engine in ("analytic-1", "analytic-2"):
        if engine in engines:
            add(engine, scheduling_gain(_model_for(engine, p), p))
    if "sim" in engines:
        add("sim", empirical_rates(p, cfg))
    manifest = _base_manifest("rate", p)
    manifest.update(_sim_manifest(p, cfg) if "sim" in engines else {})
    manifest.update({"engines": " ".join(engines)})
    return cols, rows, manifest


def run_gain(p_template: NetworkParams, cfg: SimulationConfig,
             ratios: Sequence[float], engines: Sequence[str],
             model_choice: str = "auto") -> Table:
    """Scheduling gain vs user-to-BS density ratio at fixed lambda_bs."""
    _check_engines(engines)
    if p_template.lambda_bs <= 0.0:
        raise ParameterError("gain sweep needs lambda_bs > 0")
    cols = ["ratio", "gain_analytic", "gain_sim", "gain_sim_stderr"]
    rows: List[List[Cell]] = []
    want_analytic = any(e in engines for e in _ANALYTIC_ENGINES)
    model_names = []
    for ratio in ratios:
        if ratio <= 0.0:
            raise ParameterError(f"density ratio must be positive, got {ratio}")
        p = NetworkParams(lambda_bs=p_template.lambda_bs,
                          lambda_ue=p_template.lambda_bs * ratio,
                          alpha=p_template.alpha,
                          noise_power=p_template.noise_power,
                          p_max=p_template.p_max,
                          rho_target=p_template.rho_target)
        g_ana: Cell = None
        if want_analytic:
            forced = {"analytic-1": "voronoi", "analytic-2": "range"}
            picks = [forced[e] for e in engines if e in forced]
            pick = picks[0] if len(picks) == 1 else model_choice
            model = choose_model(p, pick)
            model_names.append(model.variant.value)
            g_ana = scheduling_gain(model, p).gain
        g_sim: Cell = None
        g_err: Cell = None
        if "sim" in engines:
            rep = empirical_rates(p, cfg)
            g_sim = rep.gain
            g_err = _clean(rep.gain_stderr)
        rows.append([float(ratio), g_ana, g_sim, g_err])
    manifest = _base_manifest("gain", p_template)
    del manifest["lambda_ue_per_m2"]   # swept, not fixed
    manifest.update(_sim_manifest(p_template, cfg) if "sim" in engines else {})
    manifest.update({"engines": " ".join(engines),
                     "ratios": " ".join(repr(float(r)) for r in ratios)})
    if model_names:
        manifest["analytic_models"] = " ".join(model_names)
    return cols, rows, manifest


def run_validity(p_template: NetworkParams,
                 lambdas_per_km2: Sequence[float]) -> Table:
    """g1/g2 model-validity indicators over a BS-density sweep."""
    cols = ["lambda_bs_per_km2", "g1", "g2"]
    rows: List[List[Cell]] = []
    for lam in lambdas_per_km2:
        if lam < 0.0:
            raise ParameterError(f"lambda_bs must be non-negative, got {lam}")
        p = NetworkParams(lambda_bs=per_km2_to_per_m2(lam), lambda_ue=0.0,
                          alpha=p_template.alpha,
                          noise_power=p_template.noise_power,
                          p_max=p_template.p_max,
                          rho_target=p_template.rho_target)
        rows.append([float(lam), validity_cell_in_range(p),
                     validity_range_in_cell(p)])
    manifest = _base_manifest("validity", p_template)
    del manifest["lambda_bs_per_m2"]
    del manifest["lambda_ue_per_m2"]
    manifest["lambda_bs_grid_per_km2"] = " ".join(
        repr(float(v)) for v in lambdas_per_km2)
    return cols, rows, manifest


def run_pmf(p: NetworkParams, cfg: SimulationConfig, engines: Sequence[str],
            n_max: Optional[int] = None) -> Table:
    """Involved-user count PMF per engine, n = 0..n_max."""
    _check_engines(engines)
    models: Dict[str, Optional[UserCountModel]] = {
        "analytic-1": None, "analytic-2": None, "sim": None}
    if "analytic-1" in engines:
        models["analytic-1"] = UserCountModel.voronoi_cell(p)
    if "analytic-2" in engines:
        models["analytic-2"] = UserCountModel.achievable_range(p)
    if "sim" in engines:
        models["sim"] = empirical_user_count(p, cfg)
    if n_max is None:
        n_max = 0
        for m in models.values():
            if m is not None:
                n_max = max(n_max, truncation_support(m, 1e-9))
    cols = ["n", "f_n1", "f_n2", "empirical"]
    rows: List[List[Cell]] = []
    for n in range(n_max + 1):
        rows.append([n] + [
            float(m.pmf(n)) if m is not None else None
            for m in (models["analytic-1"], models["analytic-2"], models["sim"])])
    manifest = _base_manifest("pmf", p)
    manifest.update(_sim_manifest(p, cfg) if "sim" in engines else {})
    manifest.update({"engines": " ".join(engines), "n_max": n_max})
    return cols, rows, manifest


def run_dump(p: NetworkParams, cfg: SimulationConfig,
             trial_index: int = 0) -> Table:
    """One network snapshot flattened to a point table."""
    if trial_index < 0:
        raise ParameterError(f"trial_index must be >= 0, got {trial_index}")
    r = sample_realization(p, cfg, trial_index)
    cols, rows = realization_table(r)
    manifest = _base_manifest("dump-realization", p)
    manifest.update(_sim_manifest(p, cfg))
    manifest.update({"trial_index": trial_index,
                     "measurement_bs": r.measurement_bs,
                     "outage_probability": outage_probability(p)})
    return list(cols), rows, manifest


def _check_engines(engines: Sequence[str]) -> None:
    if not engines:
        raise ParameterError("at least one engine must be selected")
    bad = [e for e in engines if e not in ("analytic-1", "analytic-2", "sim")]
    if bad:
        raise ParameterError(f"unknown engines: {bad}")
