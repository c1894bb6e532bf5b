"""FastAPI application exposing the simulation pipeline.

The service is computation-only: it accepts configs plus CSV payloads and
returns reports plus CSV payloads, never touching the server filesystem.
Handlers are plain module-level functions so the CLI's local mode can call
them without going through HTTP. Run the server with `inferwatt serve` or
`uvicorn inferwatt.service:app`.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, engine, experiments, grid, pipeline, profiles, timeseries, workload
from ..errors import ConfigError, DataError
from . import schemas


def healthz() -> dict:
    return {"status": "ok", "version": __version__}


def list_gpus() -> list[str]:
    return profiles.gpu_names()


def get_gpu(name: str) -> schemas.GpuProfileOut:
    return schemas.GpuProfileOut(**profiles.builtin_gpu(name).__dict__)


def list_models() -> list[str]:
    return profiles.model_names()


def get_model(name: str) -> schemas.ModelProfileOut:
    return schemas.ModelProfileOut(**profiles.builtin_model(name).__dict__)


def simulate(req: schemas.SimulateRequest) -> schemas.SimulateResponse:
    requests, records, summary = pipeline.run_simulate(
        req.workload.to_core(), req.cluster.to_core()
    )
    return schemas.SimulateResponse(
        summary=schemas.summary_out(summary),
        records_csv=engine.records_to_csv(records),
        trace_csv=workload.trace_to_csv(requests) if req.include_trace else None,
    )


def power(req: schemas.PowerRequest) -> schemas.PowerResponse:
    records = engine.parse_records_csv(req.records_csv, "records_csv")
    if not records:
        raise DataError("records_csv contains no stage records")
    _, series, energy, carbon = pipeline.run_power(
        records, req.cluster.to_core(), req.power.to_core()
    )
    return schemas.PowerResponse(
        energy=schemas.energy_out(energy),
        carbon=schemas.carbon_out(carbon),
        load_profile_csv=timeseries.load_profile_to_csv(series),
    )


def cosim(req: schemas.CosimRequest) -> schemas.CosimResponse:
    series = timeseries.parse_load_profile(req.load_profile_csv, "load_profile_csv")
    solar = timeseries.parse_env_csv(req.solar_csv, "solar_irradiance", "solar_csv")
    ci = timeseries.parse_env_csv(req.ci_csv, "carbon_intensity", "ci_csv")
    states, report = pipeline.run_cosim(series, solar, ci, req.grid.to_core())
    return schemas.CosimResponse(
        report=schemas.cosim_report_out(report),
        step_log_csv=grid.step_log_to_csv(states),
    )


def experiment(name: str, req: schemas.ExperimentRequest) -> schemas.ExperimentResponse:
    base = pipeline.ScenarioConfig(
        workload=req.workload.to_core(), cluster=req.cluster.to_core()
    )
    kwargs = {}
    if name == "requests":
        if req.counts is not None:
            kwargs["counts"] = req.counts
        if req.models is not None:
            kwargs["models"] = req.models
    elif name == "qps":
        if req.qps_points is not None:
            kwargs["grid"] = req.qps_points
        if req.num_requests is not None:
            kwargs["num_requests"] = req.num_requests
    rows = experiments.run_experiment(name, base, **kwargs)
    return schemas.ExperimentResponse(name=name, rows=rows)


def create_app() -> FastAPI:
    app = FastAPI(
        title="inferwatt",
        version=__version__,
        description="GPU power, energy, and carbon co-simulation for LLM inference",
    )

    @app.exception_handler(ConfigError)
    async def _config_error(request: Request, exc: ConfigError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc), "kind": "config"})

    @app.exception_handler(DataError)
    async def _data_error(request: Request, exc: DataError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc), "kind": "data"})

    app.get("/healthz")(healthz)
    app.get("/profiles/gpus", response_model=list[str])(list_gpus)
    app.get("/profiles/gpus/{name}", response_model=schemas.GpuProfileOut)(get_gpu)
    app.get("/profiles/models", response_model=list[str])(list_models)
    app.get("/profiles/models/{name}", response_model=schemas.ModelProfileOut)(get_model)
    app.post("/simulate", response_model=schemas.SimulateResponse)(simulate)
    app.post("/power", response_model=schemas.PowerResponse)(power)
    app.post("/cosim", response_model=schemas.CosimResponse)(cosim)
    app.post("/experiments/{name}", response_model=schemas.ExperimentResponse)(experiment)
    return app


app = create_app()
