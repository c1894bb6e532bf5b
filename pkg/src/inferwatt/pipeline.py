"""Composition of the simulation stages plus declarative configuration.

The scenario config file has four sections (workload, cluster, power,
grid) mirroring the two default parameter panels; every CLI flag
overrides one key. All functions here are pure given their inputs, so
the service endpoints and the CLI share them verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import yaml

from . import accounting, engine, power, profiles, timeseries, workload
from .engine import BatchStageRecord, ClusterConfig, SimSummary
from .errors import ConfigError
from .grid import BatteryConfig, CosimReport, GridScenario, StepState, cosimulate
from .power import PowerSample
from .profiles import builtin_gpu, builtin_model
from .timeseries import EnvTrace, PowerSeries, parse_utc
from .workload import Request, WorkloadConfig

DEFAULT_EPOCH = datetime(2023, 6, 1, tzinfo=timezone.utc)


@dataclass(frozen=True)
class PowerConfig:
    pue: float = 1.2
    resolution_s: float = 60.0
    epoch: datetime = DEFAULT_EPOCH
    idle_fill: bool = True
    ci_static_g_per_kwh: float = 418.2  # used by the static carbon report

    def __post_init__(self):
        if self.pue < 1:
            raise ConfigError(f"pue must be >= 1, got {self.pue}")
        if self.resolution_s <= 0:
            raise ConfigError(f"resolution must be positive, got {self.resolution_s}")


@dataclass(frozen=True)
class GridConfig:
    solar_capacity_w: float = 600.0
    step_s: float = 60.0
    ci_low: float = 100.0
    ci_high: float = 200.0
    policy: str = "passive"
    interp_method: str = "cubic"
    battery: BatteryConfig = field(default_factory=lambda: BatteryConfig(capacity_wh=100.0))


@dataclass(frozen=True)
class ScenarioConfig:
    workload: WorkloadConfig
    cluster: ClusterConfig
    power: PowerConfig = field(default_factory=PowerConfig)
    grid: GridConfig = field(default_factory=GridConfig)


def default_scenario() -> ScenarioConfig:
    """The shipped default: Llama-3-8B on one A100, 1,024 Zipf requests at QPS 6.45."""
    return ScenarioConfig(
        workload=WorkloadConfig(num_requests=1024, qps=6.45),
        cluster=ClusterConfig(gpu=builtin_gpu("a100-sxm4-80g"), model=builtin_model("llama-3-8b")),
    )


def _subset(data: dict, cls, path: str) -> dict:
    valid = {f.name for f in fields(cls)}
    unknown = set(data) - valid
    if unknown:
        raise ConfigError(f"unknown {path} keys: {', '.join(sorted(unknown))}")
    return data


def scenario_from_dict(raw: dict) -> ScenarioConfig:
    """Build a scenario from a parsed config mapping (YAML layout)."""
    raw = dict(raw or {})
    unknown = set(raw) - {"workload", "cluster", "power", "grid"}
    if unknown:
        raise ConfigError(f"unknown config sections: {', '.join(sorted(unknown))}")

    wl = WorkloadConfig(**_subset(dict(raw.get("workload", {})), WorkloadConfig, "workload"))

    cl = dict(raw.get("cluster", {}))
    gpu_name = cl.pop("gpu", "a100-sxm4-80g")
    model_name = cl.pop("model", "llama-3-8b")
    cluster = ClusterConfig(
        gpu=builtin_gpu(gpu_name), model=builtin_model(model_name),
        **_subset(cl, ClusterConfig, "cluster"),
    )

    pw = dict(raw.get("power", {}))
    if isinstance(pw.get("epoch"), str):
        pw["epoch"] = parse_utc(pw["epoch"])
    power_cfg = PowerConfig(**_subset(pw, PowerConfig, "power"))

    gr = dict(raw.get("grid", {}))
    if "battery" in gr:
        gr["battery"] = BatteryConfig(**_subset(dict(gr["battery"]), BatteryConfig, "grid.battery"))
    grid_cfg = GridConfig(**_subset(gr, GridConfig, "grid"))

    return ScenarioConfig(workload=wl, cluster=cluster, power=power_cfg, grid=grid_cfg)


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        raw = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    if raw is not None and not isinstance(raw, dict):
        raise ConfigError(f"{path}: config root must be a mapping")
    try:
        return scenario_from_dict(raw or {})
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def run_simulate(
    wl: WorkloadConfig, cluster: ClusterConfig
) -> tuple[list[Request], list[BatchStageRecord], SimSummary]:
    requests = workload.generate(wl)
    records, summary = engine.run(requests, cluster)
    return requests, records, summary


def run_power(
    records: Sequence[BatchStageRecord], cluster: ClusterConfig, pcfg: PowerConfig
) -> tuple[list[PowerSample], PowerSeries, accounting.EnergyReport, accounting.CarbonReport]:
    samples = power.stages_to_power(records, cluster, emit_idle=pcfg.idle_fill)
    idle_w = cluster.gpu.p_idle_w * cluster.total_gpus if pcfg.idle_fill else None
    series = timeseries.bin_power(samples, pcfg.resolution_s, pcfg.epoch, idle_fill_w=idle_w)
    energy = accounting.energy(samples, cluster, pcfg.pue)
    carbon = accounting.carbon_static(energy, pcfg.ci_static_g_per_kwh, cluster.gpu)
    return samples, series, energy, carbon


def run_cosim(
    series: PowerSeries, solar: EnvTrace, ci: EnvTrace, gcfg: GridConfig
) -> tuple[list[StepState], CosimReport]:
    scenario = GridScenario(
        load=series, solar=solar, ci=ci, battery=gcfg.battery,
        solar_capacity_w=gcfg.solar_capacity_w, step_s=gcfg.step_s,
        ci_low=gcfg.ci_low, ci_high=gcfg.ci_high, policy=gcfg.policy,
        interp_method=gcfg.interp_method,
    )
    return cosimulate(scenario)


@dataclass(frozen=True)
class RunAggregate:
    """Streaming power/energy aggregation of one simulation run.

    Numerically equivalent to stages_to_power -> energy() but never
    materializes the record list; experiment sweeps use this.
    """

    makespan_s: float
    num_records: int
    total_flops: float
    mean_batch_size: float
    mean_mfu_pct: float        # duration-weighted over stage records
    mean_power_w: float        # cluster draw averaged over the makespan
    mean_power_per_gpu_w: float
    e_op_kwh: float            # PUE-adjusted
    gpu_hours: float


def aggregate_run(
    requests: Sequence[Request],
    cluster: ClusterConfig,
    pcfg: PowerConfig | None = None,
) -> RunAggregate:
    pcfg = pcfg or PowerConfig()
    gpu = cluster.gpu
    tp = cluster.tensor_parallel
    busy_joules = 0.0
    busy_s: dict[tuple[int, int], float] = {}
    makespan = 0.0
    num = 0
    total_flops = 0.0
    mfu_weighted = 0.0
    dur_total = 0.0
    batch_sum = 0.0
    for rec in engine.simulate_stream(requests, cluster):
        watts = power.power_of_mfu(gpu, rec.mfu_pct / 100.0) * tp
        busy_joules += watts * rec.duration_s
        lane = (rec.replica_id, rec.stage_id)
        busy_s[lane] = busy_s.get(lane, 0.0) + rec.duration_s
        makespan = max(makespan, rec.start_time_s + rec.duration_s)
        num += 1
        total_flops += rec.flops_mlp + rec.flops_attn
        mfu_weighted += rec.mfu_pct * rec.duration_s
        dur_total += rec.duration_s
        batch_sum += rec.batch_size

    joules = busy_joules
    if pcfg.idle_fill:
        lanes = cluster.replicas * cluster.pipeline_parallel
        idle_w = gpu.p_idle_w * tp
        total_busy = sum(busy_s.values())
        joules += idle_w * (lanes * makespan - total_busy)

    g = cluster.total_gpus
    mean_power = joules / makespan if makespan > 0 else 0.0
    return RunAggregate(
        makespan_s=makespan,
        num_records=num,
        total_flops=total_flops,
        mean_batch_size=batch_sum / num if num else 0.0,
        mean_mfu_pct=mfu_weighted / dur_total if dur_total else 0.0,
        mean_power_w=mean_power,
        mean_power_per_gpu_w=mean_power / g,
        e_op_kwh=joules * pcfg.pue / accounting.JOULES_PER_KWH,
        gpu_hours=makespan / 3600.0 * g,
    )


def scenario_with(scenario: ScenarioConfig, **kwargs) -> ScenarioConfig:
    """Functional update helper for sweep construction."""
    wl_keys = {f.name for f in fields(WorkloadConfig)}
    cl_keys = {f.name for f in fields(ClusterConfig)} - {"gpu", "model"}
    wl_updates = {k: v for k, v in kwargs.items() if k in wl_keys}
    cl_updates = {k: v for k, v in kwargs.items() if k in cl_keys}
    leftovers = set(kwargs) - set(wl_updates) - set(cl_updates) - {"gpu", "model"}
    if leftovers:
        raise ConfigError(f"unknown scenario override keys: {', '.join(sorted(leftovers))}")
    wl = replace(scenario.workload, **wl_updates) if wl_updates else scenario.workload
    cluster = scenario.cluster
    if "gpu" in kwargs:
        cluster = replace(cluster, gpu=builtin_gpu(kwargs["gpu"]))
    if "model" in kwargs:
        cluster = replace(cluster, model=builtin_model(kwargs["model"]))
    if cl_updates:
        cluster = replace(cluster, **cl_updates)
    return replace(scenario, workload=wl, cluster=cluster)
