"""Static figures for experiment sweeps and run reports."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .experiments import LARGE_MODELS, QPS_DISPLAY_MAX
from .grid import StepState
from .timeseries import PowerSeries


def _by(rows: list[dict], key: str) -> list:
    return sorted({r[key] for r in rows})


def plot_requests(rows: list[dict], out: Path) -> Path:
    fig, axes = plt.subplots(2, 2, figsize=(10, 7), sharex=True)
    groups = [
        ("models ≤34B", [r for r in rows if r["model"] not in LARGE_MODELS]),
        ("70B+ models", [r for r in rows if r["model"] in LARGE_MODELS]),
    ]
    for row_idx, (label, subset) in enumerate(groups):
        for model in _by(subset, "model"):
            pts = sorted((r for r in subset if r["model"] == model), key=lambda r: r["requests"])
            xs = [r["requests"] for r in pts]
            axes[row_idx][0].plot(xs, [r["mean_power_w_per_gpu"] for r in pts], marker="o", label=model)
            axes[row_idx][1].plot(xs, [r["total_energy_kwh"] for r in pts], marker="o", label=model)
        axes[row_idx][0].set_ylabel(f"avg power (W/GPU)\n{label}")
        axes[row_idx][1].set_ylabel("total energy (kWh)")
        axes[row_idx][1].set_yscale("log")
        for ax in axes[row_idx]:
            ax.set_xscale("log", base=2)
            ax.grid(alpha=0.3)
            ax.legend(fontsize=7)
    for ax in axes[1]:
        ax.set_xlabel("request count")
    fig.suptitle("Request volume vs power and energy")
    fig.tight_layout()
    fig.savefig(out, dpi=140)
    plt.close(fig)
    return out


def plot_pd_ratio(rows: list[dict], out: Path) -> Path:
    fig, axes = plt.subplots(2, 2, figsize=(10, 7))
    (ax_a, ax_b), (ax_c, ax_d) = axes
    for ratio in _by(rows, "pd_ratio"):
        pts = sorted((r for r in rows if r["pd_ratio"] == ratio), key=lambda r: r["req_length"])
        xs = [r["req_length"] for r in pts]
        ax_a.plot(xs, [r["mean_power_w_per_gpu"] for r in pts], marker="o", label=f"P:D {ratio:g}")
        ax_b.plot(xs, [r["total_energy_kwh"] for r in pts], marker="o", label=f"P:D {ratio:g}")
    for length in _by(rows, "req_length"):
        pts = sorted((r for r in rows if r["req_length"] == length), key=lambda r: r["pd_ratio"])
        xs = [r["pd_ratio"] for r in pts]
        ax_c.plot(xs, [r["mean_power_w_per_gpu"] for r in pts], marker="o", label=f"{length} tok")
        ax_d.plot(xs, [r["total_energy_kwh"] for r in pts], marker="o", label=f"{length} tok")
    for ax, title in ((ax_a, "(A) power by P:D"), (ax_b, "(B) energy by P:D"),
                      (ax_c, "(C) power by length"), (ax_d, "(D) energy by length")):
        ax.set_title(title, fontsize=9)
        ax.grid(alpha=0.3)
        ax.legend(fontsize=7)
    ax_a.set_xlabel("request length (tokens)")
    ax_b.set_xlabel("request length (tokens)")
    ax_c.set_xlabel("P:D ratio")
    ax_d.set_xlabel("P:D ratio")
    ax_c.set_xscale("log")
    ax_d.set_xscale("log")
    ax_a.set_ylabel("avg power (W/GPU)")
    ax_c.set_ylabel("avg power (W/GPU)")
    ax_b.set_ylabel("total energy (kWh)")
    ax_d.set_ylabel("total energy (kWh)")
    fig.suptitle("Prefill:decode ratio vs power and energy")
    fig.tight_layout()
    fig.savefig(out, dpi=140)
    plt.close(fig)
    return out


def plot_batch_size(rows: list[dict], out: Path) -> Path:
    pts = sorted(rows, key=lambda r: r["batch_cap"])
    xs = [r["batch_cap"] for r in pts]
    fig, (ax_a, ax_b, ax_c) = plt.subplots(1, 3, figsize=(12, 3.6))
    ax_a.plot(xs, [r["mean_batch_size"] for r in pts], marker="o")
    ax_a.plot(xs, xs, linestyle="--", color="gray", label="cap")
    ax_a.set_ylabel("actual mean batch size")
    ax_a.legend(fontsize=7)
    ax_b.plot(xs, [r["mean_power_w_per_gpu"] for r in pts], marker="o", color="tab:red")
    ax_b.set_ylabel("avg power (W/GPU)")
    ax_c.plot(xs, [r["total_energy_kwh"] for r in pts], marker="o", color="tab:green")
    ax_c.set_ylabel("total energy (kWh)")
    for ax, title in ((ax_a, "(A) batch size"), (ax_b, "(B) power"), (ax_c, "(C) energy")):
        ax.set_xscale("log", base=2)
        ax.set_xlabel("batch size cap")
        ax.set_title(title, fontsize=9)
        ax.grid(alpha=0.3)
    fig.suptitle("Batch size cap vs power and energy")
    fig.tight_layout()
    fig.savefig(out, dpi=140)
    plt.close(fig)
    return out


def plot_qps(rows: list[dict], out: Path) -> Path:
    pts = sorted((r for r in rows if r["qps"] <= QPS_DISPLAY_MAX), key=lambda r: r["qps"])
    xs = [r["qps"] for r in pts]
    fig, (ax_a, ax_b) = plt.subplots(1, 2, figsize=(9, 3.6))
    ax_a.plot(xs, [r["mean_power_w_per_gpu"] for r in pts], marker="o", color="tab:red")
    ax_a.set_ylabel("avg power (W/GPU)")
    ax_a.set_title("(A) power vs QPS", fontsize=9)
    ax_b.plot(xs, [r["total_energy_kwh"] for r in pts], marker="o", color="tab:green")
    ax_b.set_ylabel("total energy (kWh)")
    ax_b.set_title("(B) energy vs QPS", fontsize=9)
    for ax in (ax_a, ax_b):
        ax.set_xscale("log")
        ax.set_xlabel(f"QPS (shown ≤ {QPS_DISPLAY_MAX:g})")
        ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out, dpi=140)
    plt.close(fig)
    return out


def plot_parallelism(rows: list[dict], out: Path) -> Path:
    pts = sorted(rows, key=lambda r: (r["tp"], r["pp"]))
    labels = [f"TP{r['tp']}/PP{r['pp']}" for r in pts]
    fig, (ax_a, ax_b) = plt.subplots(1, 2, figsize=(10, 3.8))
    ax_a.bar(labels, [r["mean_power_w_per_gpu"] for r in pts], color="tab:red")
    ax_a.set_ylabel("avg power (W/GPU)")
    ax_b.bar(labels, [r["total_energy_kwh"] for r in pts], color="tab:green")
    ax_b.set_ylabel("total energy (kWh)")
    for ax in (ax_a, ax_b):
        ax.tick_params(axis="x", rotation=45, labelsize=8)
        ax.grid(alpha=0.3, axis="y")
    fig.suptitle("Parallelism configuration vs power and energy")
    fig.tight_layout()
    fig.savefig(out, dpi=140)
    plt.close(fig)
    return out


def plot_experiment(name: str, rows: list[dict], out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    plotters = {
        "requests": plot_requests,
        "pd-ratio": plot_pd_ratio,
        "batch-size": plot_batch_size,
        "qps": plot_qps,
        "parallelism": plot_parallelism,
    }
    path = out_dir / f"experiment_{name.replace('-', '_')}.png"
    return [plotters[name](rows, path)]


def plot_load_profile(series: PowerSeries, out: Path) -> Path:
    ts = series.timestamps()
    fig, ax = plt.subplots(figsize=(9, 3.2))
    ax.step(ts, series.values, where="post", color="tab:red", linewidth=0.9)
    ax.set_ylabel("power (W)")
    ax.set_title(f"binned load profile ({series.resolution_s:g}s bins)", fontsize=9)
    ax.grid(alpha=0.3)
    fig.autofmt_xdate()
    fig.tight_layout()
    fig.savefig(out, dpi=140)
    plt.close(fig)
    return out


def plot_cosim(states: Sequence[StepState], out: Path) -> Path:
    ts = [s.time for s in states]
    fig, (ax_flow, ax_soc, ax_carbon) = plt.subplots(3, 1, figsize=(9, 8), sharex=True)

    ax_flow.plot(ts, [s.load_w for s in states], color="tab:red", label="load", linewidth=0.9)
    ax_flow.plot(ts, [s.solar_w for s in states], color="gold", label="solar", linewidth=0.9)
    ax_flow.plot(ts, [s.grid_w for s in states], color="tab:blue", label="net grid", linewidth=0.9)
    ax_flow.axhline(0, color="gray", linewidth=0.5)
    ax_flow.set_ylabel("power (W)")
    ax_flow.legend(fontsize=7)

    ax_soc.plot(ts, [100 * s.soc for s in states], color="tab:purple", linewidth=0.9)
    ax_soc.set_ylabel("battery SoC (%)")

    cumulative = []
    total = 0.0
    for s in states:
        total += s.step_emissions_g
        cumulative.append(total)
    ax_carbon.plot(ts, cumulative, color="tab:brown", label="cumulative gCO2", linewidth=0.9)
    ax_ci = ax_carbon.twinx()
    ax_ci.plot(ts, [s.ci for s in states], color="tab:gray", alpha=0.6, linewidth=0.8, label="CI")
    ax_ci.set_ylabel("carbon intensity (g/kWh)")
    ax_carbon.set_ylabel("grid emissions (g)")
    ax_carbon.legend(fontsize=7, loc="upper left")

    for ax in (ax_flow, ax_soc, ax_carbon):
        ax.grid(alpha=0.3)
    fig.autofmt_xdate()
    fig.tight_layout()
    fig.savefig(out, dpi=140)
    plt.close(fig)
    return out
