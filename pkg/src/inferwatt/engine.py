"""Discrete-event simulation of continuous-batching inference.

Each replica runs a single-queue FCFS loop: every scheduler iteration
batches one prefill chunk per newly admitted request with one decode
token per in-flight request, up to batch_cap requests. Iteration latency
comes from a roofline surrogate (max of compute and memory time plus a
constant overhead) instead of a learned execution-time predictor. One
record is emitted per pipeline stage per iteration, carrying the FLOPs
split and the resulting MFU.

FLOPs accounting is standard multiply-add = 2 FLOPs transformer math with
grouped-query attention and (by default) a gated three-matrix MLP. The
attention score/value term is causal: the token at KV position j attends
to j keys, so a prefill chunk costs the triangular sum rather than
new_tokens x context.
"""

from __future__ import annotations

import csv
import heapq
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import CapacityError, ConfigError, ParseError
from .profiles import GpuProfile, ModelProfile
from .workload import Request

RECORD_HEADER = [
    "replica_id", "stage_id", "start_time_s", "duration_s",
    "flops_mlp", "flops_attn", "batch_size", "tokens_processed", "mfu_pct",
]


@dataclass(frozen=True)
class ClusterConfig:
    gpu: GpuProfile
    model: ModelProfile
    replicas: int = 1
    tensor_parallel: int = 1
    pipeline_parallel: int = 1
    batch_cap: int = 128
    max_tokens: int = 4096
    scheduler: str = "vllm-like"
    roofline_efficiency: float = 0.55  # fraction of peak FLOPs reachable when compute-bound
    stage_overhead_s: float = 0.003    # per-iteration launch + interconnect cost

    def __post_init__(self):
        if min(self.replicas, self.tensor_parallel, self.pipeline_parallel) < 1:
            raise ConfigError("replicas, tensor_parallel, pipeline_parallel must be >= 1")
        if self.batch_cap < 1:
            raise ConfigError(f"batch_cap must be >= 1, got {self.batch_cap}")
        if not 0 < self.roofline_efficiency <= 1:
            raise ConfigError(
                f"roofline_efficiency must be in (0, 1], got {self.roofline_efficiency}"
            )
        if self.stage_overhead_s < 0:
            raise ConfigError(f"stage_overhead_s must be >= 0, got {self.stage_overhead_s}")
        if self.scheduler != "vllm-like":
            raise ConfigError(f"unknown scheduler '{self.scheduler}'")

    @property
    def total_gpus(self) -> int:
        return self.replicas * self.tensor_parallel * self.pipeline_parallel


@dataclass(frozen=True, slots=True)
class BatchStageRecord:
    replica_id: int
    stage_id: int
    start_time_s: float
    duration_s: float
    flops_mlp: float
    flops_attn: float
    batch_size: int
    tokens_processed: int
    mfu_pct: float


@dataclass(frozen=True)
class SimSummary:
    makespan_s: float
    total_requests: int
    mean_batch_size: float
    num_records: int


def _ctx_units(new_tokens: int, context_len: int) -> float:
    """Sum of KV positions attended by a chunk: sum_{j=c-n+1..c} j."""
    n, c = new_tokens, context_len
    return n * c - n * (n - 1) / 2.0


def flops_for_stage(
    model: ModelProfile, batch: Iterable[tuple[int, int]]
) -> tuple[float, float]:
    """FLOPs split for one batch of (new_tokens, context_len) entries.

    context_len counts the KV cache including the new tokens. Per layer and
    entry: Q/K/V projections 2*n*d*(d + 2*kv_dim) plus output projection
    2*n*d^2; causal scores+values 4*d*sum(attended positions); MLP
    6*n*d*d_ff gated or 4*n*d*d_ff plain.
    """
    d = model.d_model
    proj_per_token = 2 * d * (d + 2 * model.kv_dim) + 2 * d * d
    mlp_per_token = (6 if model.mlp_gated else 4) * d * model.d_ff

    total_new = 0
    total_units = 0.0
    for new_tokens, context_len in batch:
        if not 1 <= new_tokens <= context_len:
            raise ConfigError(
                f"need context_len >= new_tokens >= 1, got ({new_tokens}, {context_len})"
            )
        total_new += new_tokens
        total_units += _ctx_units(new_tokens, context_len)

    layers = model.num_layers
    flops_mlp = float(layers * mlp_per_token * total_new)
    flops_attn = float(layers * (proj_per_token * total_new + 4 * d * total_units))
    return flops_mlp, flops_attn


def stage_latency(cluster: ClusterConfig, flops: float, bytes_moved: float) -> float:
    """Roofline latency: max of compute and memory time plus fixed overhead."""
    if flops < 0 or bytes_moved < 0:
        raise ConfigError("flops and bytes_moved must be >= 0")
    tp = cluster.tensor_parallel
    compute = flops / (tp * cluster.roofline_efficiency * cluster.gpu.peak_flops)
    memory = bytes_moved / (tp * cluster.gpu.mem_bandwidth)
    return max(compute, memory) + cluster.stage_overhead_s


def mfu_of_stage(flops: float, duration_s: float, cluster: ClusterConfig) -> float:
    """Achieved over peak FLOPs for one stage, in percent, clamped to [0, 100].

    Device capacity for a replica stage is peak_flops x TP.
    """
    if duration_s <= 0:
        raise ConfigError(f"duration_s must be positive, got {duration_s}")
    pct = flops / (cluster.gpu.peak_flops * cluster.tensor_parallel * duration_s) * 100.0
    return min(max(pct, 0.0), 100.0)


def _iteration_bytes(cluster: ClusterConfig, new_tokens: int, units: float) -> float:
    """Bytes touched per iteration: per-stage weights plus batch KV traffic."""
    model = cluster.model
    kv_per_token = model.kv_bytes_per_token()
    weights = model.weight_bytes() / cluster.pipeline_parallel
    return weights + kv_per_token * (units + new_tokens)


def simulate_stream(
    requests: Sequence[Request], cluster: ClusterConfig
) -> Iterator[BatchStageRecord]:
    """Yield stage records in deterministic (replica_id, start_time, stage_id) order.

    Replicas are independent given round-robin request assignment; each is
    simulated sequentially and exhausted before the next starts.
    """
    if not requests:
        raise ConfigError("request trace is empty")
    for r in requests:
        if r.total_tokens > cluster.max_tokens:
            raise CapacityError(
                f"request {r.id} needs {r.total_tokens} tokens, "
                f"cluster max_tokens is {cluster.max_tokens}"
            )

    model = cluster.model
    d = model.d_model
    layers = model.num_layers
    proj_per_token = layers * (2 * d * (d + 2 * model.kv_dim) + 2 * d * d)
    mlp_per_token = layers * (6 if model.mlp_gated else 4) * d * model.d_ff
    score_per_unit = layers * 4 * d

    pp = cluster.pipeline_parallel
    peak_stage = cluster.gpu.peak_flops * cluster.tensor_parallel

    for replica_id in range(cluster.replicas):
        mine = [r for r in requests if r.id % cluster.replicas == replica_id]
        mine.sort(key=lambda r: (r.arrival_time_s, r.id))
        n = len(mine)
        ptr = 0
        now = 0.0
        inflight = 0
        ctx_sum = 0          # sum of current context lengths across in-flight requests
        finish_heap: list[tuple[int, int]] = []  # (finish iteration, final context)
        iteration = 0

        while ptr < n or inflight > 0:
            iteration += 1
            if inflight == 0 and mine[ptr].arrival_time_s > now:
                now = mine[ptr].arrival_time_s

            n_dec = inflight
            new_tokens = n_dec
            units = float(ctx_sum + n_dec)  # each decode entry attends ctx+1 positions
            batch_size = n_dec
            while ptr < n and batch_size < cluster.batch_cap and mine[ptr].arrival_time_s <= now:
                req = mine[ptr]
                ptr += 1
                batch_size += 1
                pf = req.prefill_tokens
                new_tokens += pf
                units += pf * (pf + 1) / 2.0
                ctx_sum += pf
                heapq.heappush(finish_heap, (iteration + req.decode_tokens, pf + req.decode_tokens))

            flops_mlp = float(mlp_per_token * new_tokens)
            flops_attn = float(proj_per_token * new_tokens + score_per_unit * units)
            flops_total = flops_mlp + flops_attn
            bytes_moved = _iteration_bytes(cluster, new_tokens, units)
            duration = stage_latency(cluster, flops_total, bytes_moved)

            stage_dur = duration / pp
            mfu = min(max(flops_total / (peak_stage * duration) * 100.0, 0.0), 100.0)
            for stage_id in range(pp):
                yield BatchStageRecord(
                    replica_id=replica_id,
                    stage_id=stage_id,
                    start_time_s=now + stage_id * stage_dur,
                    duration_s=stage_dur,
                    flops_mlp=flops_mlp / pp,
                    flops_attn=flops_attn / pp,
                    batch_size=batch_size,
                    tokens_processed=new_tokens,
                    mfu_pct=mfu,
                )
            now += duration

            ctx_sum += n_dec
            inflight = batch_size
            while finish_heap and finish_heap[0][0] == iteration:
                _, final_ctx = heapq.heappop(finish_heap)
                inflight -= 1
                ctx_sum -= final_ctx


def run(
    requests: Sequence[Request], cluster: ClusterConfig
) -> tuple[list[BatchStageRecord], SimSummary]:
    """Materialize the full record stream plus its summary."""
    records = list(simulate_stream(requests, cluster))
    makespan = max((r.start_time_s + r.duration_s for r in records), default=0.0)
    mean_batch = (
        sum(r.batch_size for r in records) / len(records) if records else 0.0
    )
    summary = SimSummary(
        makespan_s=makespan,
        total_requests=len(requests),
        mean_batch_size=mean_batch,
        num_records=len(records),
    )
    return records, summary


def records_to_csv(records: Iterable[BatchStageRecord]) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(RECORD_HEADER)
    for r in records:
        writer.writerow([
            r.replica_id, r.stage_id, repr(r.start_time_s), repr(r.duration_s),
            repr(r.flops_mlp), repr(r.flops_attn), r.batch_size,
            r.tokens_processed, repr(r.mfu_pct),
        ])
    return out.getvalue()


def parse_records_csv(text: str, source: str = "<string>") -> list[BatchStageRecord]:
    records = []
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != RECORD_HEADER:
        raise ParseError(source, 1, f"expected header {','.join(RECORD_HEADER)}")
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            records.append(BatchStageRecord(
                replica_id=int(row[0]), stage_id=int(row[1]),
                start_time_s=float(row[2]), duration_s=float(row[3]),
                flops_mlp=float(row[4]), flops_attn=float(row[5]),
                batch_size=int(row[6]), tokens_processed=int(row[7]),
                mfu_pct=float(row[8]),
            ))
        except (ValueError, IndexError) as exc:
            raise ParseError(source, lineno, f"bad stage record: {exc}") from None
    return records


def write_records_csv(records: Iterable[BatchStageRecord], path: str | Path) -> None:
    Path(path).write_text(records_to_csv(records))


def read_records_csv(path: str | Path) -> list[BatchStageRecord]:
    return parse_records_csv(Path(path).read_text(), str(path))
