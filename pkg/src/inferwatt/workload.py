"""Synthetic inference request traces.

Arrivals are Poisson (i.i.d. exponential gaps at rate qps). Total request
length is drawn from a discrete power law over [len_min, len_max]: mass
proportional to rank^(-theta) with rank 1 at len_min, sampled by inverse
CDF. The prefill:decode ratio splits each length deterministically, which
keeps ratio sweeps noise-free.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, ParseError

TRACE_HEADER = ["request_id", "arrival_time_s", "prefill_tokens", "decode_tokens"]


@dataclass(frozen=True)
class Request:
    id: int
    arrival_time_s: float
    prefill_tokens: int
    decode_tokens: int

    @property
    def total_tokens(self) -> int:
        return self.prefill_tokens + self.decode_tokens


@dataclass(frozen=True)
class WorkloadConfig:
    num_requests: int
    qps: float                 # Poisson arrival rate, requests/s
    zipf_theta: float = 0.6
    len_min: int = 1024
    len_max: int = 4096
    pd_ratio: float = 20.0     # prefill:decode token ratio
    max_tokens: int = 4096
    seed: int = 42

    def __post_init__(self):
        if self.num_requests < 1:
            raise ConfigError(f"num_requests must be >= 1, got {self.num_requests}")
        if self.qps <= 0:
            raise ConfigError(f"qps must be positive, got {self.qps}")
        if self.zipf_theta < 0:
            raise ConfigError(f"zipf_theta must be >= 0, got {self.zipf_theta}")
        if not 1 <= self.len_min <= self.len_max:
            raise ConfigError(
                f"need 1 <= len_min <= len_max, got [{self.len_min}, {self.len_max}]"
            )
        if self.pd_ratio <= 0:
            raise ConfigError(f"pd_ratio must be positive, got {self.pd_ratio}")
        if self.len_max > self.max_tokens:
            raise ConfigError(
                f"len_max ({self.len_max}) exceeds max_tokens ({self.max_tokens})"
            )


def split_length(total: int, pd_ratio: float) -> tuple[int, int]:
    """Deterministic prefill/decode split of one request length.

    prefill = round(total * r/(r+1)), both sides clamped to >= 1.
    """
    if total < 2:
        raise ConfigError(f"request length must be >= 2 to split, got {total}")
    prefill = round(total * pd_ratio / (pd_ratio + 1.0))
    prefill = min(max(prefill, 1), total - 1)
    return prefill, total - prefill


def zipf_pmf(len_min: int, len_max: int, theta: float) -> np.ndarray:
    """Probability mass over lengths len_min..len_max, rank 1 at len_min."""
    ranks = np.arange(1, len_max - len_min + 2, dtype=float)
    weights = ranks**-theta
    return weights / weights.sum()


def generate(config: WorkloadConfig) -> list[Request]:
    """Generate the request trace; identical (config, seed) gives identical bytes."""
    rng = np.random.default_rng(config.seed)
    gaps = rng.exponential(1.0 / config.qps, size=config.num_requests)
    arrivals = np.cumsum(gaps)

    pmf = zipf_pmf(config.len_min, config.len_max, config.zipf_theta)
    cdf = np.cumsum(pmf)
    cdf[-1] = 1.0  # guard against rounding shortfall
    draws = rng.random(config.num_requests)
    lengths = config.len_min + np.searchsorted(cdf, draws, side="left")

    requests = []
    for i in range(config.num_requests):
        total = int(lengths[i])
        if total < 2:
            total = 2  # single-token support still needs one prefill and one decode
        prefill, decode = split_length(total, config.pd_ratio)
        requests.append(Request(i, float(arrivals[i]), prefill, decode))
    return requests


def trace_to_csv(requests: list[Request]) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(TRACE_HEADER)
    for r in requests:
        writer.writerow([r.id, repr(r.arrival_time_s), r.prefill_tokens, r.decode_tokens])
    return out.getvalue()


def parse_trace_csv(text: str, source: str = "<string>") -> list[Request]:
    requests = []
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != TRACE_HEADER:
        raise ParseError(source, 1, f"expected header {','.join(TRACE_HEADER)}")
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            requests.append(
                Request(int(row[0]), float(row[1]), int(row[2]), int(row[3]))
            )
        except (ValueError, IndexError) as exc:
            raise ParseError(source, lineno, f"bad trace row: {exc}") from None
    return requests


def write_trace_csv(requests: list[Request], path: str | Path) -> None:
    Path(path).write_text(trace_to_csv(requests))


def read_trace_csv(path: str | Path) -> list[Request]:
    return parse_trace_csv(Path(path).read_text(), str(path))
