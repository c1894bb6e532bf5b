"""Request/response models for the service API.

These mirror the core dataclasses one-to-one; bulk data (stage records,
load profiles, traces, step logs) travels as CSV text in the canonical
file formats, so a saved response body and a CLI output file are
byte-identical.
"""

from __future__ import annotations

from datetime import datetime
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field

from .. import accounting, engine, grid, pipeline, profiles, workload

_STRICT = ConfigDict(extra="forbid")


class WorkloadSpec(BaseModel):
    model_config = _STRICT
    num_requests: int = 1024
    qps: float = 6.45
    zipf_theta: float = 0.6
    len_min: int = 1024
    len_max: int = 4096
    pd_ratio: float = 20.0
    max_tokens: int = 4096
    seed: int = 42

    def to_core(self) -> workload.WorkloadConfig:
        return workload.WorkloadConfig(**self.model_dump())


class ClusterSpec(BaseModel):
    model_config = _STRICT
    gpu: str = "a100-sxm4-80g"
    model: str = "llama-3-8b"
    replicas: int = 1
    tensor_parallel: int = 1
    pipeline_parallel: int = 1
    batch_cap: int = 128
    max_tokens: int = 4096
    roofline_efficiency: float = 0.55
    stage_overhead_s: float = 0.003

    def to_core(self) -> engine.ClusterConfig:
        data = self.model_dump()
        return engine.ClusterConfig(
            gpu=profiles.builtin_gpu(data.pop("gpu")),
            model=profiles.builtin_model(data.pop("model")),
            **data,
        )


class PowerSpec(BaseModel):
    model_config = _STRICT
    pue: float = 1.2
    resolution_s: float = 60.0
    epoch: datetime = pipeline.DEFAULT_EPOCH
    idle_fill: bool = True
    ci_static_g_per_kwh: float = 418.2

    def to_core(self) -> pipeline.PowerConfig:
        return pipeline.PowerConfig(**self.model_dump())


class BatterySpec(BaseModel):
    model_config = _STRICT
    capacity_wh: float = 100.0
    soc_init: float = 0.5
    soc_min: float = 0.2
    soc_max: float = 0.8
    max_charge_w: float = 100.0
    max_discharge_w: float = 100.0
    round_trip_efficiency: float = 0.9

    def to_core(self) -> grid.BatteryConfig:
        return grid.BatteryConfig(**self.model_dump())


class GridSpec(BaseModel):
    model_config = _STRICT
    solar_capacity_w: float = 600.0
    step_s: float = 60.0
    ci_low: float = 100.0
    ci_high: float = 200.0
    policy: Literal["passive", "carbon-threshold"] = "passive"
    interp_method: Literal["nearest", "linear", "cubic"] = "cubic"
    battery: BatterySpec = Field(default_factory=BatterySpec)

    def to_core(self) -> pipeline.GridConfig:
        data = self.model_dump()
        data["battery"] = self.battery.to_core()
        return pipeline.GridConfig(**data)


class GpuProfileOut(BaseModel):
    name: str
    p_idle_w: float
    p_max_inst_w: float
    mfu_sat: float
    gamma: float
    peak_flops: float
    mem_bandwidth: float
    phi_manuf_g_per_gpu_h: float


class ModelProfileOut(BaseModel):
    name: str
    num_layers: int
    d_model: int
    d_ff: int
    n_heads: int
    n_kv_heads: int
    vocab_size: int
    param_count: float
    bytes_per_param: int
    mlp_gated: bool


class SummaryOut(BaseModel):
    makespan_s: float
    total_requests: int
    mean_batch_size: float
    num_records: int


class SimulateRequest(BaseModel):
    model_config = _STRICT
    workload: WorkloadSpec = Field(default_factory=WorkloadSpec)
    cluster: ClusterSpec = Field(default_factory=ClusterSpec)
    include_trace: bool = False


class SimulateResponse(BaseModel):
    summary: SummaryOut
    records_csv: str
    trace_csv: str | None = None


class PowerRequest(BaseModel):
    model_config = _STRICT
    records_csv: str
    cluster: ClusterSpec = Field(default_factory=ClusterSpec)
    power: PowerSpec = Field(default_factory=PowerSpec)


class EnergyOut(BaseModel):
    e_op_kwh: float
    gpu_hours: float
    mean_power_w: float
    mean_power_per_gpu_w: float
    makespan_s: float
    pue: float


class CarbonOut(BaseModel):
    c_total_g: float
    c_operational_g: float
    c_embodied_g: float
    ci_g_per_kwh: float


class PowerResponse(BaseModel):
    energy: EnergyOut
    carbon: CarbonOut
    load_profile_csv: str


class CosimRequest(BaseModel):
    model_config = _STRICT
    load_profile_csv: str
    solar_csv: str
    ci_csv: str
    grid: GridSpec = Field(default_factory=GridSpec)


class CosimReportOut(BaseModel):
    total_demand_kwh: float
    solar_gen_kwh: float
    solar_consumed_kwh: float
    grid_import_kwh: float
    grid_export_kwh: float
    renewable_share_pct: float
    grid_dependency_pct: float
    total_emissions_g: float
    offset_by_solar_g: float
    net_footprint_g: float
    carbon_offset_pct: float
    avg_ci_g_per_kwh: float
    hours_high_ci: float
    avg_soc_pct: float
    hours_below_50_soc: float
    hours_above_80_soc: float
    charging_frac_pct: float
    discharging_frac_pct: float
    idle_frac_pct: float
    full_cycles: float


class CosimResponse(BaseModel):
    report: CosimReportOut
    step_log_csv: str


class ExperimentRequest(BaseModel):
    model_config = _STRICT
    workload: WorkloadSpec = Field(default_factory=WorkloadSpec)
    cluster: ClusterSpec = Field(default_factory=ClusterSpec)
    # optional grid shrinkers for faster sweeps
    counts: list[int] | None = None
    models: list[str] | None = None
    qps_points: list[float] | None = None
    num_requests: int | None = None


class ExperimentResponse(BaseModel):
    name: str
    rows: list[dict[str, Any]]


def energy_out(report: accounting.EnergyReport) -> EnergyOut:
    return EnergyOut(**report.__dict__)


def carbon_out(report: accounting.CarbonReport) -> CarbonOut:
    return CarbonOut(**report.__dict__)


def summary_out(summary: engine.SimSummary) -> SummaryOut:
    return SummaryOut(**summary.__dict__)


def cosim_report_out(report: grid.CosimReport) -> CosimReportOut:
    return CosimReportOut(**report.__dict__)
