"""Request/response models for the experiment service.

These are the wire contract: human-facing units (per-km², dBm, dB) come
in, get converted exactly once, and every response is a self-describing
table (columns + rows + resolved-parameter manifest) ready to serialize
as CSV.
"""
from __future__ import annotations

from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field, model_validator

from ..mcsim import SimulationConfig
from ..params import NetworkParams, make_params

Engine = Literal["analytic-1", "analytic-2", "sim"]
ModelChoice = Literal["auto", "voronoi", "range"]

DEFAULT_ENGINES: List[Engine] = ["analytic-1", "analytic-2", "sim"]


class ChannelIn(BaseModel):
    """Propagation and power-control knobs shared by every experiment."""
    alpha: float = Field(default=4.0, gt=2.0)
    noise_dbm: float = -90.0
    pu_dbm: float = 23.0
    rho_dbm: float = -70.0


class ParamsIn(ChannelIn):
    lambda_bs_per_km2: float = Field(ge=0.0)
    lambda_ue_per_km2: float = Field(default=0.0, ge=0.0)

    def to_params(self) -> NetworkParams:
        return make_params(self.lambda_bs_per_km2, self.lambda_ue_per_km2,
                           alpha=self.alpha, noise_dbm=self.noise_dbm,
                           p_max_dbm=self.pu_dbm, rho_target_dbm=self.rho_dbm)


class SimIn(BaseModel):
    trials: int = Field(default=10_000, ge=1)
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    window_radius_m: Optional[float] = Field(default=None, gt=0.0)
    jobs: int = Field(default=1, ge=1)

    def to_config(self) -> SimulationConfig:
        return SimulationConfig(trials=self.trials, seed=self.seed,
                                window_radius=self.window_radius_m,
                                jobs=self.jobs)


class ThetaGridIn(BaseModel):
    """SINR threshold grid in dB, linearly spaced."""
    start_db: float = -20.0
    stop_db: float = 30.0
    count: int = Field(default=101, ge=1)

    @model_validator(mode="after")
    def _ordered(self):
        if self.count > 1 and not self.stop_db > self.start_db:
            raise ValueError("theta grid needs stop_db > start_db")
        return self


class RatioGridIn(BaseModel):
    """lambda_ue / lambda_bs sweep, linearly spaced."""
    start: float = Field(default=1.0, gt=0.0)
    stop: float = Field(default=10.0, gt=0.0)
    count: int = Field(default=10, ge=1)

    @model_validator(mode="after")
    def _ordered(self):
        if self.count > 1 and not self.stop > self.start:
            raise ValueError("ratio grid needs stop > start")
        return self


class LambdaGridIn(BaseModel):
    """BS density sweep (per km²), log spaced."""
    start_per_km2: float = Field(default=0.1, gt=0.0)
    stop_per_km2: float = Field(default=100.0, gt=0.0)
    count: int = Field(default=31, ge=1)

    @model_validator(mode="after")
    def _ordered(self):
        if self.count > 1 and not self.stop_per_km2 > self.start_per_km2:
            raise ValueError("lambda grid needs stop > start")
        return self


class _EnginesMixin(BaseModel):
    engines: List[Engine] = Field(default_factory=lambda: list(DEFAULT_ENGINES),
                                  min_length=1)


class CcdfRequest(_EnginesMixin):
    params: ParamsIn
    sim: SimIn = SimIn()
    grid: ThetaGridIn = ThetaGridIn()


class RateRequest(_EnginesMixin):
    params: ParamsIn
    sim: SimIn = SimIn()


class GainRequest(_EnginesMixin):
    params: ParamsIn          # lambda_ue_per_km2 is ignored; the sweep sets it
    sim: SimIn = SimIn()
    ratios: RatioGridIn = RatioGridIn()
    model: ModelChoice = "auto"


class ValidityRequest(BaseModel):
    channel: ChannelIn = ChannelIn()
    lambdas: LambdaGridIn = LambdaGridIn()


class PmfRequest(_EnginesMixin):
    params: ParamsIn
    sim: SimIn = SimIn()
    n_max: Optional[int] = Field(default=None, ge=0)


class DumpRequest(BaseModel):
    params: ParamsIn
    sim: SimIn = SimIn()
    trial_index: int = Field(default=0, ge=0)


Cell = Union[float, int, str, None]


class TableResponse(BaseModel):
    columns: List[str]
    rows: List[List[Cell]]
    manifest: Dict[str, Cell]


class HealthResponse(BaseModel):
    status: str
    version: str
