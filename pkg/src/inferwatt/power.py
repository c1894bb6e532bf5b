"""MFU-to-watts conversion via the calibrated sublinear power law.

Per-GPU power rises from p_idle with a concave exponent and saturates at
p_max_inst once utilization reaches mfu_sat; above that the curve is
clamped flat (saturation is the maximum effective utilization level).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

from .errors import ConfigError
from .profiles import GpuProfile

if TYPE_CHECKING:
    from .engine import BatchStageRecord, ClusterConfig


@dataclass(frozen=True)
class PowerSample:
    """Constant-power interval attributed to one replica pipeline stage.

    watts covers every GPU serving the stage (per-GPU power times the
    tensor-parallel group size).
    """

    start_time_s: float
    duration_s: float
    watts: float


def power_of_mfu(gpu: GpuProfile, mfu: float) -> float:
    """Per-GPU watts at the given MFU fraction.

    mfu is clamped to mfu_sat before exponentiation, so the curve is
    strictly increasing and concave on [0, mfu_sat] (for gamma < 1) and
    flat at p_max_inst beyond.
    """
    if not 0.0 <= mfu <= 1.0:
        raise ConfigError(f"mfu must be within [0, 1], got {mfu}")
    x = min(mfu, gpu.mfu_sat) / gpu.mfu_sat
    return gpu.p_idle_w + (gpu.p_max_inst_w - gpu.p_idle_w) * x**gpu.gamma


def stages_to_power(
    records: Iterable["BatchStageRecord"],
    cluster: "ClusterConfig",
    emit_idle: bool = True,
) -> list[PowerSample]:
    """Convert stage records into stage-attributed power samples.

    Each record yields one sample at power_of_mfu(gpu, mfu) x TP watts.
    With emit_idle, every (replica, stage) lane is padded with explicit
    p_idle x TP samples over its gaps in [0, makespan], so a provisioned
    but momentarily idle lane still draws its floor and the cluster
    timeline has no holes. Samples from different lanes overlap in time;
    downstream consumers sum them.
    """
    gpu = cluster.gpu
    tp = cluster.tensor_parallel
    idle_w = gpu.p_idle_w * tp

    lanes: dict[tuple[int, int], list] = {
        (r, s): []
        for r in range(cluster.replicas)
        for s in range(cluster.pipeline_parallel)
    }
    makespan = 0.0
    for rec in records:
        lanes[(rec.replica_id, rec.stage_id)].append(rec)
        makespan = max(makespan, rec.start_time_s + rec.duration_s)

    samples: list[PowerSample] = []
    for lane_records in lanes.values():
        cursor = 0.0
        for rec in lane_records:
            if emit_idle and rec.start_time_s > cursor:
                samples.append(PowerSample(cursor, rec.start_time_s - cursor, idle_w))
            watts = power_of_mfu(gpu, rec.mfu_pct / 100.0) * tp
            samples.append(PowerSample(rec.start_time_s, rec.duration_s, watts))
            cursor = rec.start_time_s + rec.duration_s
        if emit_idle and cursor < makespan:
            samples.append(PowerSample(cursor, makespan - cursor, idle_w))
    samples.sort(key=lambda s: s.start_time_s)
    return samples
