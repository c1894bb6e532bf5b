"""Builtin GPU calibrations and transformer architecture constants.

Both catalogs are frozen dataclasses and safe to share across workers.
GPU idle/peak watts follow published server measurements; compute and
bandwidth figures are vendor datasheet values for dense (non-sparsity)
FP16/BF16 tensor throughput, since sparsity-inflated peaks would halve
every reported MFU. Model architectures are transcribed from the public
model cards.
"""

from dataclasses import dataclass, replace

from .errors import ConfigError, UnknownProfileError


@dataclass(frozen=True)
class GpuProfile:
    """Power and throughput calibration of one accelerator."""

    name: str
    p_idle_w: float          # idle draw, watts
    p_max_inst_w: float      # observed draw under saturation, watts
    mfu_sat: float           # MFU fraction where power saturates
    gamma: float             # sublinear power-law exponent
    peak_flops: float        # dense FP16/BF16 FLOPs/s
    mem_bandwidth: float     # bytes/s
    phi_manuf_g_per_gpu_h: float = 0.0  # embodied carbon rate, gCO2 per GPU-hour

    def __post_init__(self):
        if not 0 < self.p_idle_w < self.p_max_inst_w:
            raise ConfigError(
                f"{self.name}: need 0 < p_idle ({self.p_idle_w}) < p_max_inst ({self.p_max_inst_w})"
            )
        if not 0 < self.mfu_sat <= 1:
            raise ConfigError(f"{self.name}: mfu_sat must be in (0, 1], got {self.mfu_sat}")
        if not 0 < self.gamma <= 1:
            raise ConfigError(f"{self.name}: gamma must be in (0, 1], got {self.gamma}")
        if self.peak_flops <= 0 or self.mem_bandwidth <= 0:
            raise ConfigError(f"{self.name}: peak_flops and mem_bandwidth must be positive")
        if self.phi_manuf_g_per_gpu_h < 0:
            raise ConfigError(f"{self.name}: embodied carbon rate must be >= 0")


@dataclass(frozen=True)
class ModelProfile:
    """Architecture constants needed for FLOPs and memory-traffic accounting."""

    name: str
    num_layers: int
    d_model: int
    d_ff: int
    n_heads: int
    n_kv_heads: int
    vocab_size: int
    param_count: float
    bytes_per_param: int = 2   # 16-bit weights
    mlp_gated: bool = True     # 3-matrix SwiGLU-style MLP vs plain 2-matrix

    def __post_init__(self):
        counts = (self.num_layers, self.d_model, self.d_ff, self.n_heads,
                  self.n_kv_heads, self.vocab_size, self.bytes_per_param)
        if any(c <= 0 for c in counts) or self.param_count <= 0:
            raise ConfigError(f"{self.name}: all architecture counts must be positive")
        if self.d_model % self.n_heads != 0:
            raise ConfigError(f"{self.name}: d_model must divide evenly into n_heads")
        if self.n_heads % self.n_kv_heads != 0:
            raise ConfigError(f"{self.name}: n_heads must divide evenly into n_kv_heads")

    @property
    def head_dim(self) -> int:
        return self.d_model // self.n_heads

    @property
    def kv_dim(self) -> int:
        """Width of the K (or V) projection output."""
        return self.head_dim * self.n_kv_heads

    def kv_bytes_per_token(self) -> int:
        """KV-cache bytes appended per token across all layers (K and V)."""
        return 2 * self.kv_dim * self.bytes_per_param * self.num_layers

    def weight_bytes(self) -> float:
        return self.param_count * self.bytes_per_param

    def reconstructed_param_count(self) -> float:
        """Analytic parameter count: embeddings plus per-layer matrices.

        Untied input/output embeddings; biases and norms are ignored (they
        are <0.1% of any model shipped here).
        """
        embed = 2 * self.vocab_size * self.d_model
        attn = 2 * self.d_model * self.d_model + 2 * self.d_model * self.kv_dim
        mlp_mats = 3 if self.mlp_gated else 2
        mlp = mlp_mats * self.d_model * self.d_ff
        return embed + self.num_layers * (attn + mlp)


# Idle/peak watts: A100 SXM4 measured 100 W idle / 400 W full load on DGX-class
# hosts; H100 SXM5 60 W / 700 W; A40 PCIe 30 W / 300 W. mfu_sat = 0.45 and
# gamma = 0.7 are the common calibration for all three. peak_flops are dense
# FP16/BF16 tensor figures (A100: 312 TFLOPS, H100 SXM: 989.5 TFLOPS,
# A40: 149.7 TFLOPS); bandwidths 2039 / 3350 / 696 GB/s from the datasheets.
_GPUS = {
    "a100-sxm4-80g": GpuProfile(
        name="a100-sxm4-80g", p_idle_w=100.0, p_max_inst_w=400.0,
        mfu_sat=0.45, gamma=0.7, peak_flops=312e12, mem_bandwidth=2.039e12,
    ),
    "h100-sxm5": GpuProfile(
        name="h100-sxm5", p_idle_w=60.0, p_max_inst_w=700.0,
        mfu_sat=0.45, gamma=0.7, peak_flops=989.5e12, mem_bandwidth=3.35e12,
    ),
    "a40-pcie": GpuProfile(
        name="a40-pcie", p_idle_w=30.0, p_max_inst_w=300.0,
        mfu_sat=0.45, gamma=0.7, peak_flops=149.7e12, mem_bandwidth=6.96e11,
    ),
}

# Architecture constants from the public model cards. param_count is the
# declared total; reconstructed_param_count() must land within 10% of it.
_MODELS = {
    "llama-2-7b": ModelProfile(
        name="llama-2-7b", num_layers=32, d_model=4096, d_ff=11008,
        n_heads=32, n_kv_heads=32, vocab_size=32000, param_count=6.74e9,
    ),
    "llama-3-8b": ModelProfile(
        name="llama-3-8b", num_layers=32, d_model=4096, d_ff=14336,
        n_heads=32, n_kv_heads=8, vocab_size=128256, param_count=8.03e9,
    ),
    "codellama-34b": ModelProfile(
        name="codellama-34b", num_layers=48, d_model=8192, d_ff=22016,
        n_heads=64, n_kv_heads=8, vocab_size=32016, param_count=33.74e9,
    ),
    "llama-3-70b": ModelProfile(
        name="llama-3-70b", num_layers=80, d_model=8192, d_ff=28672,
        n_heads=64, n_kv_heads=8, vocab_size=128256, param_count=70.6e9,
    ),
    "qwen-72b": ModelProfile(
        name="qwen-72b", num_layers=80, d_model=8192, d_ff=24576,
        n_heads=64, n_kv_heads=64, vocab_size=151936, param_count=72.7e9,
    ),
    # phi-2 uses a plain GELU MLP (two matrices), not a gated one.
    "phi-2": ModelProfile(
        name="phi-2", num_layers=32, d_model=2560, d_ff=10240,
        n_heads=32, n_kv_heads=32, vocab_size=51200, param_count=2.78e9,
        mlp_gated=False,
    ),
}


def builtin_gpu(name: str, **overrides) -> GpuProfile:
    """Look up a builtin GPU calibration, optionally overriding fields."""
    try:
        profile = _GPUS[name]
    except KeyError:
        raise UnknownProfileError("gpu", name, list(_GPUS)) from None
    return replace(profile, **overrides) if overrides else profile


def builtin_model(name: str, **overrides) -> ModelProfile:
    """Look up a builtin model architecture, optionally overriding fields."""
    try:
        profile = _MODELS[name]
    except KeyError:
        raise UnknownProfileError("model", name, list(_MODELS)) from None
    return replace(profile, **overrides) if overrides else profile


def gpu_names() -> list[str]:
    return sorted(_GPUS)


def model_names() -> list[str]:
    return sorted(_MODELS)
