"""Operational energy with PUE and carbon with operational plus embodied terms.

Energy integrates the power samples in joules and reports kWh; PUE scales
operational energy only, never the embodied term. GPU-hours count all
provisioned GPUs over the makespan, since embodied carbon amortizes over
wall-clock hardware occupancy, not busy time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .engine import ClusterConfig
from .errors import ConfigError, DataError
from .power import PowerSample
from .profiles import GpuProfile

JOULES_PER_KWH = 3.6e6


@dataclass(frozen=True)
class EnergyReport:
    e_op_kwh: float          # PUE-adjusted operational energy
    gpu_hours: float         # provisioned GPU-hours over the makespan
    mean_power_w: float      # time-weighted mean over the sample set
    mean_power_per_gpu_w: float
    makespan_s: float
    pue: float


@dataclass(frozen=True)
class CarbonReport:
    c_total_g: float
    c_operational_g: float
    c_embodied_g: float
    ci_g_per_kwh: float


def energy(
    samples: Sequence[PowerSample], cluster: ClusterConfig, pue: float
) -> EnergyReport:
    """Integrate power samples into an operational-energy report.

    Samples from different replica-stage lanes may overlap in time; their
    energies add. mean_power_w is cluster draw (energy over makespan before
    PUE), assuming the samples tile the whole provisioned timeline.
    """
    if pue < 1:
        raise ConfigError(f"pue must be >= 1, got {pue}")
    if not samples:
        raise DataError("cannot compute energy from an empty sample sequence")
    joules = 0.0
    makespan = 0.0
    for s in samples:
        joules += s.watts * s.duration_s
        makespan = max(makespan, s.start_time_s + s.duration_s)
    g = cluster.total_gpus
    mean_power = joules / makespan if makespan > 0 else 0.0
    return EnergyReport(
        e_op_kwh=joules * pue / JOULES_PER_KWH,
        gpu_hours=makespan / 3600.0 * g,
        mean_power_w=mean_power,
        mean_power_per_gpu_w=mean_power / g,
        makespan_s=makespan,
        pue=pue,
    )


def carbon_static(report: EnergyReport, ci_g_per_kwh: float, gpu: GpuProfile) -> CarbonReport:
    """Emissions at a static grid intensity plus the embodied GPU-hour term."""
    if ci_g_per_kwh < 0:
        raise ConfigError(f"carbon intensity must be >= 0, got {ci_g_per_kwh}")
    c_op = report.e_op_kwh * ci_g_per_kwh
    c_emb = report.gpu_hours * gpu.phi_manuf_g_per_gpu_h
    return CarbonReport(
        c_total_g=c_op + c_emb,
        c_operational_g=c_op,
        c_embodied_g=c_emb,
        ci_g_per_kwh=ci_g_per_kwh,
    )
