"""The five scripted scenario sweeps.

Each experiment varies one knob of the default scenario and emits one row
per grid point with energy and power aggregates. Sweeps stream stage
records through the power model instead of materializing them, so even
the 2^16-request points stay in bounded memory.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from . import workload
from .errors import ConfigError
from .pipeline import RunAggregate, ScenarioConfig, aggregate_run, default_scenario, scenario_with

EXPERIMENTS = ("requests", "pd-ratio", "batch-size", "qps", "parallelism")

# Request-count sweep: models up to 34B run single-GPU, 70B+ run TP=2, PP=2.
SMALL_MODELS = ("phi-2", "llama-2-7b", "llama-3-8b", "codellama-34b")
LARGE_MODELS = ("llama-3-70b", "qwen-72b")

PD_RATIOS = (50.0, 10.0, 5.0, 1.0, 0.2, 0.1, 0.02)
PD_LENGTHS = (128, 512, 1024, 2048, 4096)
BATCH_CAPS = (1, 2, 4, 8, 16, 32, 64, 128)
PARALLELISM_DEGREES = (1, 2, 4)
QPS_DISPLAY_MAX = 12.6  # plots focus on the stable regime


def qps_grid(lo: float = 0.1, hi: float = 50.0, points: int = 10) -> list[float]:
    """Logarithmic QPS grid, rounded so grid points name themselves."""
    grid = np.logspace(np.log10(lo), np.log10(hi), points)
    return [float(round(q, 3)) for q in grid]


def request_count_grid(min_exp: int = 8, max_exp: int = 16) -> list[int]:
    return [2**e for e in range(min_exp, max_exp + 1)]


def _row(scenario: ScenarioConfig, agg: RunAggregate, **extra) -> dict:
    row = {
        "model": scenario.cluster.model.name,
        "gpu": scenario.cluster.gpu.name,
        "requests": scenario.workload.num_requests,
        "qps": scenario.workload.qps,
        "pd_ratio": scenario.workload.pd_ratio,
        "batch_cap": scenario.cluster.batch_cap,
        "tp": scenario.cluster.tensor_parallel,
        "pp": scenario.cluster.pipeline_parallel,
        "replicas": scenario.cluster.replicas,
    }
    row.update(extra)
    row.update({
        "makespan_s": agg.makespan_s,
        "mean_batch_size": agg.mean_batch_size,
        "mean_mfu_pct": agg.mean_mfu_pct,
        "mean_power_w_per_gpu": agg.mean_power_per_gpu_w,
        "total_energy_kwh": agg.e_op_kwh,
        "stage_records": agg.num_records,
    })
    return row


def _run_point(scenario: ScenarioConfig) -> RunAggregate:
    requests = workload.generate(scenario.workload)
    return aggregate_run(requests, scenario.cluster, scenario.power)


def sweep_requests(
    base: ScenarioConfig | None = None,
    counts: list[int] | None = None,
    models: list[str] | None = None,
) -> list[dict]:
    """Experiment 1: request volume from 2^8 to 2^16 across the model list."""
    base = base or default_scenario()
    counts = counts or request_count_grid()
    models = models or list(SMALL_MODELS + LARGE_MODELS)
    rows = []
    for model in models:
        tp = pp = 2 if model in LARGE_MODELS else 1
        for count in counts:
            sc = scenario_with(base, model=model, num_requests=count,
                               tensor_parallel=tp, pipeline_parallel=pp)
            rows.append(_row(sc, _run_point(sc)))
    return rows


def sweep_pd_ratio(
    base: ScenarioConfig | None = None,
    ratios: tuple[float, ...] = PD_RATIOS,
    lengths: tuple[int, ...] = PD_LENGTHS,
) -> list[dict]:
    """Experiment 2: prefill:decode ratio over a symmetric log grid x fixed lengths."""
    base = base or default_scenario()
    rows = []
    for length in lengths:
        for ratio in ratios:
            sc = scenario_with(base, pd_ratio=ratio, len_min=length, len_max=length)
            rows.append(_row(sc, _run_point(sc), req_length=length))
    return rows


def sweep_batch_size(
    base: ScenarioConfig | None = None, caps: tuple[int, ...] = BATCH_CAPS
) -> list[dict]:
    """Experiment 3: batch size cap from 1 to 128."""
    base = base or default_scenario()
    return [
        _row(sc, _run_point(sc))
        for cap in caps
        for sc in [scenario_with(base, batch_cap=cap)]
    ]


def sweep_qps(
    base: ScenarioConfig | None = None,
    grid: list[float] | None = None,
    num_requests: int = 2**14,
) -> list[dict]:
    """Experiment 4: throughput sweep at a fixed request volume."""
    base = base or default_scenario()
    grid = grid or qps_grid()
    rows = []
    for qps in grid:
        sc = scenario_with(base, qps=qps, num_requests=num_requests)
        rows.append(_row(sc, _run_point(sc)))
    return rows


def sweep_parallelism(
    base: ScenarioConfig | None = None,
    degrees: tuple[int, ...] = PARALLELISM_DEGREES,
    model: str = "codellama-34b",
) -> list[dict]:
    """Experiment 5: the 9 TP-PP combinations on the 34B model."""
    base = base or default_scenario()
    rows = []
    for tp in degrees:
        for pp in degrees:
            sc = scenario_with(base, model=model, tensor_parallel=tp, pipeline_parallel=pp)
            rows.append(_row(sc, _run_point(sc)))
    return rows


def run_experiment(name: str, base: ScenarioConfig | None = None, **kwargs) -> list[dict]:
    runners = {
        "requests": sweep_requests,
        "pd-ratio": sweep_pd_ratio,
        "batch-size": sweep_batch_size,
        "qps": sweep_qps,
        "parallelism": sweep_parallelism,
    }
    if name not in runners:
        raise ConfigError(f"unknown experiment '{name}'; choose from {', '.join(EXPERIMENTS)}")
    return runners[name](base, **kwargs)


def rows_to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)
    return out.getvalue()


def write_rows_csv(rows: list[dict], path: str | Path) -> None:
    Path(path).write_text(rows_to_csv(rows))
