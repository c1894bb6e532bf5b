"""Bridge between variable-duration power samples and fixed-resolution series.

Stage-level power is aggregated into uniform bins with a duration-weighted
average; environment traces (solar, carbon intensity) are resampled onto
the co-simulation grid. Load profiles round-trip through a small CSV
format: header `timestamp,power_watts`, ISO-8601 UTC, one row per bin,
bin timestamps labeling the bin start.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicSpline, interp1d

from .errors import ConfigError, CoverageError, DataError, ParseError
from .power import PowerSample

LOAD_PROFILE_COMMENT = "# power load profile; timestamps label bin start (UTC)"
LOAD_PROFILE_HEADER = ["timestamp", "power_watts"]
ENV_TRACE_HEADER = ["timestamp", "value"]

ENV_KINDS = ("carbon_intensity", "solar_irradiance")


def _require_utc(ts: datetime) -> datetime:
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_utc(ts: datetime) -> str:
    return _require_utc(ts).isoformat().replace("+00:00", "Z")


def parse_utc(text: str) -> datetime:
    return _require_utc(datetime.fromisoformat(text.replace("Z", "+00:00")))


@dataclass(frozen=True)
class PowerSeries:
    """Uniform, gap-free average-power profile; values are bin means in watts."""

    start: datetime
    resolution_s: float
    values: list[float]

    def __post_init__(self):
        if self.resolution_s <= 0:
            raise ConfigError(f"resolution must be positive, got {self.resolution_s}")
        if any(v < 0 for v in self.values):
            raise ConfigError("power series values must be >= 0")
        object.__setattr__(self, "start", _require_utc(self.start))

    def timestamps(self) -> list[datetime]:
        return [
            self.start + timedelta(seconds=i * self.resolution_s)
            for i in range(len(self.values))
        ]


@dataclass(frozen=True)
class EnvTrace:
    """Timestamped environment signal: grid carbon intensity or solar output."""

    kind: str
    timestamps: list[datetime] = field(default_factory=list)
    values: list[float] = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in ENV_KINDS:
            raise ConfigError(f"trace kind must be one of {ENV_KINDS}, got '{self.kind}'")
        if len(self.timestamps) != len(self.values):
            raise ConfigError("timestamps and values must have equal length")
        if len(self.timestamps) < 2:
            raise ConfigError("an environment trace needs at least two points")
        ts = [_require_utc(t) for t in self.timestamps]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ConfigError("trace timestamps must be strictly increasing")
        if any(v < 0 for v in self.values):
            raise ConfigError("trace values must be >= 0")
        object.__setattr__(self, "timestamps", ts)

    def span(self) -> tuple[datetime, datetime]:
        return self.timestamps[0], self.timestamps[-1]


def bin_power(
    samples: Sequence[PowerSample],
    resolution_s: float,
    epoch: datetime,
    idle_fill_w: float | None = None,
) -> PowerSeries:
    """Duration-weighted binning of power samples onto a uniform grid.

    Simulation second 0 maps to `epoch`. Each bin's value is
    sum(P_i * overlap_i) / sum(overlap_i) over the sample portions that
    intersect the bin; overlapping samples (parallel replica-stage lanes)
    simply add their weighted contributions, which sums coincident power.

    idle_fill_w=None is zero-fill mode: bins with no coverage get 0 and
    partially covered bins average over covered time only (this mode
    preserves total joules when samples tile the bins). With a wattage
    given, uncovered time inside any bin counts at that idle floor.
    """
    if resolution_s <= 0:
        raise ConfigError(f"resolution must be positive, got {resolution_s}")
    if not samples:
        raise DataError("cannot bin an empty power sample sequence")

    t_min = min(s.start_time_s for s in samples)
    t_max = max(s.start_time_s + s.duration_s for s in samples)
    first = math.floor(t_min / resolution_s)
    last = math.ceil(t_max / resolution_s)
    n_bins = max(last - first, 1)

    weighted = np.zeros(n_bins)
    covered = np.zeros(n_bins)
    for s in samples:
        lo = s.start_time_s
        hi = s.start_time_s + s.duration_s
        b = int(math.floor(lo / resolution_s)) - first
        while True:
            bin_lo = (first + b) * resolution_s
            bin_hi = bin_lo + resolution_s
            overlap = min(hi, bin_hi) - max(lo, bin_lo)
            if overlap > 0:
                weighted[b] += s.watts * overlap
                covered[b] += overlap
            if hi <= bin_hi:
                break
            b += 1

    values = []
    for b in range(n_bins):
        if idle_fill_w is None:
            values.append(weighted[b] / covered[b] if covered[b] > 0 else 0.0)
        else:
            gap = max(resolution_s - covered[b], 0.0)
            values.append((weighted[b] + idle_fill_w * gap) / resolution_s)

    start = _require_utc(epoch) + timedelta(seconds=first * resolution_s)
    return PowerSeries(start=start, resolution_s=resolution_s, values=values)


def resample_env(
    trace: EnvTrace,
    resolution_s: float,
    window: tuple[datetime, datetime],
    method: str = "cubic",
    extrapolate: bool = False,
) -> EnvTrace:
    """Interpolate a trace onto a uniform grid spanning `window` (inclusive).

    Cubic interpolation is a natural spline (zero second derivative at the
    ends); it may undershoot near sharp edges, so results are clamped at 0.
    """
    if resolution_s <= 0:
        raise ConfigError(f"resolution must be positive, got {resolution_s}")
    if method not in ("nearest", "linear", "cubic"):
        raise ConfigError(f"unknown resampling method '{method}'")
    w_start, w_end = (_require_utc(window[0]), _require_utc(window[1]))
    if w_end < w_start:
        raise ConfigError("window end precedes window start")
    t0, t1 = trace.span()
    if not extrapolate and (w_start < t0 or w_end > t1):
        raise CoverageError(
            f"{trace.kind} trace covers [{format_utc(t0)}, {format_utc(t1)}] "
            f"but the window is [{format_utc(w_start)}, {format_utc(w_end)}]"
        )

    base = t0
    xs = np.array([(t - base).total_seconds() for t in trace.timestamps])
    ys = np.array(trace.values, dtype=float)
    n_points = int(math.floor((w_end - w_start).total_seconds() / resolution_s + 1e-9)) + 1
    grid = (w_start - base).total_seconds() + resolution_s * np.arange(n_points)

    if method == "cubic" and len(xs) >= 4:
        spline = CubicSpline(xs, ys, bc_type="natural", extrapolate=True)
        out = spline(grid)
    elif method == "nearest":
        f = interp1d(xs, ys, kind="nearest", fill_value="extrapolate")
        out = f(grid)
    else:  # linear, or too few knots for a cubic
        f = interp1d(xs, ys, kind="linear", fill_value="extrapolate")
        out = f(grid)
    out = np.clip(out, 0.0, None)

    timestamps = [w_start + timedelta(seconds=resolution_s * i) for i in range(n_points)]
    return EnvTrace(kind=trace.kind, timestamps=timestamps, values=[float(v) for v in out])


def load_profile_to_csv(series: PowerSeries) -> str:
    """Render a load-profile CSV; values carry 6 significant digits."""
    if not series.values:
        raise DataError("refusing to export an empty power series")
    out = io.StringIO()
    out.write(LOAD_PROFILE_COMMENT + "\n")
    writer = csv.writer(out)
    writer.writerow(LOAD_PROFILE_HEADER)
    for ts, value in zip(series.timestamps(), series.values):
        writer.writerow([format_utc(ts), format(value, ".6g")])
    return out.getvalue()


def _parse_timestamped_rows(
    text: str, header: list[str], source: str
) -> tuple[list[datetime], list[float]]:
    timestamps: list[datetime] = []
    values: list[float] = []
    header_seen = False
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or row[0].startswith("#"):
            continue
        if not header_seen:
            if row != header:
                raise ParseError(source, lineno, f"expected header {','.join(header)}")
            header_seen = True
            continue
        try:
            timestamps.append(parse_utc(row[0]))
            values.append(float(row[1]))
        except (ValueError, IndexError) as exc:
            raise ParseError(source, lineno, f"bad row: {exc}") from None
    if not header_seen:
        raise ParseError(source, 1, f"missing header {','.join(header)}")
    return timestamps, values


def parse_load_profile(text: str, source: str = "<string>") -> PowerSeries:
    timestamps, values = _parse_timestamped_rows(text, LOAD_PROFILE_HEADER, source)
    if not values:
        raise ParseError(source, 2, "load profile has no rows")
    if len(values) == 1:
        resolution = 60.0
    else:
        gaps = {round((b - a).total_seconds(), 9) for a, b in zip(timestamps, timestamps[1:])}
        if len(gaps) != 1:
            raise ParseError(source, None, "load profile bins are not uniformly spaced")
        resolution = gaps.pop()
    return PowerSeries(start=timestamps[0], resolution_s=resolution, values=values)


def export_load_profile(series: PowerSeries, path: str | Path) -> None:
    Path(path).write_text(load_profile_to_csv(series))


def import_load_profile(path: str | Path) -> PowerSeries:
    return parse_load_profile(Path(path).read_text(), str(path))


def env_trace_to_csv(trace: EnvTrace) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(ENV_TRACE_HEADER)
    for ts, value in zip(trace.timestamps, trace.values):
        writer.writerow([format_utc(ts), format(value, ".6g")])
    return out.getvalue()


def parse_env_csv(text: str, kind: str, source: str = "<string>") -> EnvTrace:
    timestamps, values = _parse_timestamped_rows(text, ENV_TRACE_HEADER, source)
    return EnvTrace(kind=kind, timestamps=timestamps, values=values)


def read_env_csv(path: str | Path, kind: str) -> EnvTrace:
    return parse_env_csv(Path(path).read_text(), kind, str(path))


def write_env_csv(trace: EnvTrace, path: str | Path) -> None:
    Path(path).write_text(env_trace_to_csv(trace))
