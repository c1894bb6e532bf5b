"""inferwatt: GPU power, energy, and carbon co-simulation for LLM inference."""

__version__ = "0.1.0"

from .accounting import CarbonReport, EnergyReport, carbon_static, energy
from .engine import BatchStageRecord, ClusterConfig, SimSummary, run
from .grid import BatteryConfig, CosimReport, GridScenario, StepState, cosimulate
from .power import PowerSample, power_of_mfu, stages_to_power
from .profiles import GpuProfile, ModelProfile, builtin_gpu, builtin_model
from .timeseries import EnvTrace, PowerSeries, bin_power, resample_env
from .workload import Request, WorkloadConfig, generate

__all__ = [
    "BatchStageRecord", "BatteryConfig", "CarbonReport", "ClusterConfig",
    "CosimReport", "EnergyReport", "EnvTrace", "GpuProfile", "GridScenario",
    "ModelProfile", "PowerSample", "PowerSeries", "Request", "SimSummary",
    "StepState", "WorkloadConfig", "bin_power", "builtin_gpu", "builtin_model",
    "carbon_static", "cosimulate", "energy", "generate", "power_of_mfu",
    "resample_env", "run", "stages_to_power", "__version__",
]
