"""HTTP face of the toolkit: one POST endpoint per experiment.

Domain errors (bad parameters, undefined gain) come back as 400 with a
machine-readable body; schema violations are FastAPI's usual 422.  The
CLI drives this app in-process by default, so the service is also the
single code path for every experiment.
"""
from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, experiments
from ..params import ParameterError
from .schemas import (CcdfRequest, DumpRequest, GainRequest, HealthResponse,
                      ParamsIn, PmfRequest, RateRequest, TableResponse,
                      ValidityRequest)

app = FastAPI(
    title="ulsched",
    version=__version__,
    description="Uplink SINR / rate experiments for Poisson cellular "
                "networks with best-fade scheduling",
)


@app.exception_handler(ParameterError)
@app.exception_handler(ValueError)
async def _domain_error(request: Request, exc: Exception) -> JSONResponse:
    return JSONResponse(status_code=400,
                        content={"error": type(exc).__name__,
                                 "message": str(exc)})


def _table(result) -> TableResponse:
    cols, rows, manifest = result
    return TableResponse(columns=cols, rows=rows, manifest=manifest)


@app.get("/health", response_model=HealthResponse)
async def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/ccdf", response_model=TableResponse)
def ccdf(req: CcdfRequest) -> TableResponse:
    grid = experiments.theta_grid_db(req.grid.start_db, req.grid.stop_db,
                                     req.grid.count)
    return _table(experiments.run_ccdf(req.params.to_params(),
                                       req.sim.to_config(), grid, req.engines))


@app.post("/rate", response_model=TableResponse)
def rate(req: RateRequest) -> TableResponse:
    return _table(experiments.run_rate(req.params.to_params(),
                                       req.sim.to_config(), req.engines))


@app.post("/gain", response_model=TableResponse)
def gain(req: GainRequest) -> TableResponse:
    import numpy as np
    r = req.ratios
    ratios = (np.array([r.start]) if r.count == 1
              else np.linspace(r.start, r.stop, r.count))
    return _table(experiments.run_gain(req.params.to_params(),
                                       req.sim.to_config(), ratios.tolist(),
                                       req.engines, req.model))


@app.post("/validity", response_model=TableResponse)
def validity(req: ValidityRequest) -> TableResponse:
    import numpy as np
    g = req.lambdas
    lams = (np.array([g.start_per_km2]) if g.count == 1
            else np.geomspace(g.start_per_km2, g.stop_per_km2, g.count))
    ch = req.channel
    p = ParamsIn(lambda_bs_per_km2=1.0, alpha=ch.alpha, noise_dbm=ch.noise_dbm,
                 pu_dbm=ch.pu_dbm, rho_dbm=ch.rho_dbm).to_params()
    return _table(experiments.run_validity(p, lams.tolist()))


@app.post("/pmf", response_model=TableResponse)
def pmf(req: PmfRequest) -> TableResponse:
    return _table(experiments.run_pmf(req.params.to_params(),
                                      req.sim.to_config(), req.engines,
                                      req.n_max))


@app.post("/dump-realization", response_model=TableResponse)
def dump_realization(req: DumpRequest) -> TableResponse:
    return _table(experiments.run_dump(req.params.to_params(),
                                       req.sim.to_config(), req.trial_index))
