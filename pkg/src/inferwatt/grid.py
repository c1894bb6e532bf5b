"""Time-stepped microgrid co-simulation: load, solar, battery, grid carbon.

Every step enforces the power balance load = solar + battery + grid
(battery positive when discharging, grid positive when importing). The
passive policy charges from solar surplus and discharges against deficit
within SoC and power limits; the carbon-threshold policy switches the
battery to grid-charging below ci_low and falls back to passive rules in
the dead band. Charge efficiency is applied single-sided on charge.

Emissions bookkeeping follows the reporting convention where the total is
gross demand-attributed carbon: total = offset_by_solar + net_footprint,
with the offset valuing on-site solar consumption at the prevailing grid
intensity and the net footprint integrating actual imports. Grid export
is tracked but earns no negative emissions.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path
from typing import Sequence

from .errors import ConfigError, DataError, ParseError
from .timeseries import EnvTrace, PowerSeries, format_utc, parse_utc, resample_env

STEP_LOG_HEADER = [
    "timestamp", "load_w", "solar_w", "battery_w", "grid_w", "soc", "ci",
    "step_emissions_g",
]

POLICIES = ("passive", "carbon-threshold")


@dataclass(frozen=True)
class BatteryConfig:
    capacity_wh: float
    soc_init: float = 0.5
    soc_min: float = 0.2
    soc_max: float = 0.8
    max_charge_w: float = 100.0
    max_discharge_w: float = 100.0
    round_trip_efficiency: float = 0.9

    def __post_init__(self):
        if self.capacity_wh <= 0:
            raise ConfigError(f"battery capacity must be positive, got {self.capacity_wh}")
        if not 0 <= self.soc_min < self.soc_max <= 1:
            raise ConfigError(
                f"need 0 <= soc_min < soc_max <= 1, got [{self.soc_min}, {self.soc_max}]"
            )
        if not self.soc_min <= self.soc_init <= self.soc_max:
            raise ConfigError(
                f"soc_init {self.soc_init} outside [{self.soc_min}, {self.soc_max}]"
            )
        if self.max_charge_w < 0 or self.max_discharge_w < 0:
            raise ConfigError("battery power limits must be >= 0")
        if not 0 < self.round_trip_efficiency <= 1:
            raise ConfigError(
                f"round_trip_efficiency must be in (0, 1], got {self.round_trip_efficiency}"
            )


@dataclass(frozen=True)
class GridScenario:
    load: PowerSeries
    solar: EnvTrace            # values are capacity fractions in [0, 1]
    ci: EnvTrace               # gCO2/kWh
    battery: BatteryConfig
    solar_capacity_w: float = 600.0
    step_s: float = 60.0
    ci_low: float = 100.0
    ci_high: float = 200.0
    policy: str = "passive"
    interp_method: str = "cubic"

    def __post_init__(self):
        if self.step_s <= 0:
            raise ConfigError(f"step must be positive, got {self.step_s}")
        if self.solar_capacity_w < 0:
            raise ConfigError("solar capacity must be >= 0")
        if not self.ci_low < self.ci_high:
            raise ConfigError(
                f"need ci_low < ci_high, got {self.ci_low} / {self.ci_high}"
            )
        if self.policy not in POLICIES:
            raise ConfigError(f"policy must be one of {POLICIES}, got '{self.policy}'")
        if abs(self.step_s - self.load.resolution_s) > 1e-9:
            raise ConfigError(
                f"step ({self.step_s}s) must match the load profile resolution "
                f"({self.load.resolution_s}s)"
            )
        if self.solar.kind != "solar_irradiance" or self.ci.kind != "carbon_intensity":
            raise ConfigError("solar/ci traces have the wrong kind")


@dataclass(frozen=True)
class StepState:
    time: datetime
    load_w: float
    solar_w: float
    battery_w: float     # + discharging, - charging
    grid_w: float        # + importing, - exporting
    soc: float
    ci: float
    step_emissions_g: float


@dataclass(frozen=True)
class CosimReport:
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


def battery_directive(policy: str, ci: float, ci_low: float, ci_high: float) -> str:
    """Mode the battery operates in this step: charge, discharge, or passive.

    Passive scenarios always resolve surplus/deficit symmetrically. Under
    the carbon-threshold policy, ci <= ci_low allows charging from the
    grid; ci >= ci_high discharges against deficit (which passive rules do
    anyway); the dead band behaves exactly like passive.
    """
    if policy == "carbon-threshold":
        if ci <= ci_low:
            return "charge"
        if ci >= ci_high:
            return "discharge"
    return "passive"


def _battery_step(
    batt: BatteryConfig, soc: float, net_w: float, dt_h: float, directive: str
) -> tuple[float, float]:
    """One battery decision: returns (battery_w, new_soc).

    net_w is solar minus load. Charging stores power x efficiency; the
    charge rate is limited so SoC never exceeds soc_max, discharge so it
    never drops below soc_min.
    """
    eta = batt.round_trip_efficiency
    headroom_w = (batt.soc_max - soc) * batt.capacity_wh / (eta * dt_h)
    available_w = (soc - batt.soc_min) * batt.capacity_wh / dt_h

    if directive == "charge":
        # Charge at the full allowable rate; surplus contributes first and
        # the remainder is drawn from the grid.
        p = min(batt.max_charge_w, headroom_w)
        if p <= 0:
            return 0.0, soc
        return -p, soc + p * eta * dt_h / batt.capacity_wh

    if net_w > 0:
        p = min(net_w, batt.max_charge_w, headroom_w)
        if p <= 0:
            return 0.0, soc
        return -p, soc + p * eta * dt_h / batt.capacity_wh
    if net_w < 0:
        p = min(-net_w, batt.max_discharge_w, available_w)
        if p <= 0:
            return 0.0, soc
        return p, soc - p * dt_h / batt.capacity_wh
    return 0.0, soc


def cosimulate(scenario: GridScenario) -> tuple[list[StepState], CosimReport]:
    """Run the step loop and aggregate the report."""
    load = scenario.load
    n = len(load.values)
    if n == 0:
        raise DataError("load profile has no bins")
    window = (load.start, load.start + timedelta(seconds=(n - 1) * scenario.step_s))
    solar = resample_env(scenario.solar, scenario.step_s, window, scenario.interp_method)
    ci = resample_env(scenario.ci, scenario.step_s, window, scenario.interp_method)

    dt_h = scenario.step_s / 3600.0
    batt = scenario.battery
    soc = batt.soc_init
    states: list[StepState] = []
    for k in range(n):
        load_w = load.values[k]
        solar_w = solar.values[k] * scenario.solar_capacity_w
        ci_k = ci.values[k]
        directive = battery_directive(scenario.policy, ci_k, scenario.ci_low, scenario.ci_high)
        battery_w, soc = _battery_step(batt, soc, solar_w - load_w, dt_h, directive)
        grid_w = load_w - solar_w - battery_w
        emissions = max(grid_w, 0.0) * dt_h / 1000.0 * ci_k
        states.append(StepState(
            time=load.start + timedelta(seconds=k * scenario.step_s),
            load_w=load_w, solar_w=solar_w, battery_w=battery_w, grid_w=grid_w,
            soc=soc, ci=ci_k, step_emissions_g=emissions,
        ))
    report = report_metrics(states, scenario.step_s, scenario.ci_high, batt.capacity_wh)
    return states, report


def report_metrics(
    states: Sequence[StepState],
    step_s: float,
    ci_high: float,
    battery_capacity_wh: float,
) -> CosimReport:
    """Aggregate step states into the full metric suite."""
    if not states:
        raise DataError("cannot report on an empty state sequence")
    dt_h = step_s / 3600.0
    n = len(states)

    demand_wh = solar_wh = consumed_wh = import_wh = export_wh = 0.0
    offset_g = net_g = 0.0
    ci_sum = 0.0
    soc_sum = 0.0
    hours_high = below_50 = above_80 = 0.0
    charging = discharging = 0
    throughput_wh = 0.0
    for s in states:
        demand_wh += s.load_w * dt_h
        solar_wh += s.solar_w * dt_h
        consumed_wh += min(s.solar_w, s.load_w) * dt_h
        import_wh += max(s.grid_w, 0.0) * dt_h
        export_wh += max(-s.grid_w, 0.0) * dt_h
        offset_g += min(s.solar_w, s.load_w) * dt_h / 1000.0 * s.ci
        net_g += s.step_emissions_g
        ci_sum += s.ci
        soc_sum += s.soc
        if s.ci > ci_high:
            hours_high += dt_h
        if s.soc < 0.5:
            below_50 += dt_h
        if s.soc > 0.8:
            above_80 += dt_h
        if s.battery_w < 0:
            charging += 1
        elif s.battery_w > 0:
            discharging += 1
        throughput_wh += abs(s.battery_w) * dt_h

    total_g = offset_g + net_g
    return CosimReport(
        total_demand_kwh=demand_wh / 1000.0,
        solar_gen_kwh=solar_wh / 1000.0,
        solar_consumed_kwh=consumed_wh / 1000.0,
        grid_import_kwh=import_wh / 1000.0,
        grid_export_kwh=export_wh / 1000.0,
        renewable_share_pct=100.0 * consumed_wh / demand_wh if demand_wh else 0.0,
        grid_dependency_pct=100.0 * import_wh / demand_wh if demand_wh else 0.0,
        total_emissions_g=total_g,
        offset_by_solar_g=offset_g,
        net_footprint_g=net_g,
        carbon_offset_pct=100.0 * offset_g / total_g if total_g else 0.0,
        avg_ci_g_per_kwh=ci_sum / n,
        hours_high_ci=hours_high,
        avg_soc_pct=100.0 * soc_sum / n,
        hours_below_50_soc=below_50,
        hours_above_80_soc=above_80,
        charging_frac_pct=100.0 * charging / n,
        discharging_frac_pct=100.0 * discharging / n,
        idle_frac_pct=100.0 * (n - charging - discharging) / n,
        full_cycles=throughput_wh / (2.0 * battery_capacity_wh),
    )


def step_log_to_csv(states: Sequence[StepState]) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(STEP_LOG_HEADER)
    for s in states:
        writer.writerow([
            format_utc(s.time), repr(s.load_w), repr(s.solar_w),
            repr(s.battery_w), repr(s.grid_w), repr(s.soc), repr(s.ci),
            repr(s.step_emissions_g),
        ])
    return out.getvalue()


def parse_step_log(text: str, source: str = "<string>") -> list[StepState]:
    states = []
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != STEP_LOG_HEADER:
        raise ParseError(source, 1, f"expected header {','.join(STEP_LOG_HEADER)}")
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            states.append(StepState(
                time=parse_utc(row[0]), load_w=float(row[1]), solar_w=float(row[2]),
                battery_w=float(row[3]), grid_w=float(row[4]), soc=float(row[5]),
                ci=float(row[6]), step_emissions_g=float(row[7]),
            ))
        except (ValueError, IndexError) as exc:
            raise ParseError(source, lineno, f"bad step row: {exc}") from None
    return states


def write_step_log(states: Sequence[StepState], path: str | Path) -> None:
    Path(path).write_text(step_log_to_csv(states))


def read_step_log(path: str | Path) -> list[StepState]:
    return parse_step_log(Path(path).read_text(), str(path))
