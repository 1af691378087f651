"""Uplink Poisson cellular networks under best-fade scheduling with
truncated channel-inversion power control: analytic SINR/rate engine,
ground-truth Monte Carlo engine, and figure-reproduction experiments.
"""

__version__ = "0.1.0"

from .params import (NetworkParams, ParameterError, PathLossExponentError,
                     SinrThreshold, make_params, outage_probability)
from .specfun import ConvergenceError, PrecisionError, QuadratureSpec
from .usercount import ModelVariant, UserCountModel, recommend_model
from .analytic import (CcdfCurve, RateReport, UndefinedGainError,
                       conditional_ccdf, laplace_interference, marginal_ccdf,
                       rate_round_robin, rate_scheduled, scheduling_gain,
                       sinr_ccdf_curve)
from .mcsim import (NetworkRealization, Scheduler, SimulationConfig,
                    empirical_ccdf, empirical_rates, empirical_user_count,
                    measure_sinr, sample_realization)

__all__ = [
    "NetworkParams", "ParameterError", "PathLossExponentError", "SinrThreshold",
    "make_params", "outage_probability",
    "ConvergenceError", "PrecisionError", "QuadratureSpec",
    "ModelVariant", "UserCountModel", "recommend_model",
    "CcdfCurve", "RateReport", "UndefinedGainError", "conditional_ccdf",
    "laplace_interference", "marginal_ccdf", "rate_round_robin",
    "rate_scheduled", "scheduling_gain", "sinr_ccdf_curve",
    "NetworkRealization", "Scheduler", "SimulationConfig", "empirical_ccdf",
    "empirical_rates", "empirical_user_count", "measure_sinr",
    "sample_realization",
    "__version__",
]
