"""Command-line front end.

Every subcommand is a thin client of the service layer: it loads the
scenario config, applies flag overrides, sends a typed request (in-process
by default, over HTTP with --server), and writes the returned payloads to
the output directory. Exit codes: 0 success, 2 configuration error,
3 data error.
"""

from __future__ import annotations

import functools
import sys
from dataclasses import fields
from importlib import resources
from pathlib import Path

import click

from . import __version__, experiments as experiments_mod, pipeline, plotting, reports
from . import grid as grid_mod
from . import timeseries
from .errors import ConfigError, DataError
from .service import schemas
from .service.client import make_client

EXIT_CONFIG = 2
EXIT_DATA = 3


def _handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        except DataError as exc:
            click.echo(f"data error: {exc}", err=True)
            sys.exit(EXIT_DATA)
    return wrapper


def _load_scenario(config: str | None) -> pipeline.ScenarioConfig:
    return pipeline.load_config(config) if config else pipeline.default_scenario()


def _workload_spec(wl, **overrides) -> schemas.WorkloadSpec:
    data = {f.name: getattr(wl, f.name) for f in fields(wl)}
    data.update({k: v for k, v in overrides.items() if v is not None})
    return schemas.WorkloadSpec(**data)


def _cluster_spec(cluster, **overrides) -> schemas.ClusterSpec:
    data = {
        "gpu": cluster.gpu.name,
        "model": cluster.model.name,
        "replicas": cluster.replicas,
        "tensor_parallel": cluster.tensor_parallel,
        "pipeline_parallel": cluster.pipeline_parallel,
        "batch_cap": cluster.batch_cap,
        "max_tokens": cluster.max_tokens,
        "roofline_efficiency": cluster.roofline_efficiency,
        "stage_overhead_s": cluster.stage_overhead_s,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    return schemas.ClusterSpec(**data)


def _power_spec(pcfg, **overrides) -> schemas.PowerSpec:
    data = {
        "pue": pcfg.pue,
        "resolution_s": pcfg.resolution_s,
        "epoch": pcfg.epoch,
        "idle_fill": pcfg.idle_fill,
        "ci_static_g_per_kwh": pcfg.ci_static_g_per_kwh,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    return schemas.PowerSpec(**data)


def _grid_spec(gcfg, **overrides) -> schemas.GridSpec:
    battery = {f.name: getattr(gcfg.battery, f.name) for f in fields(gcfg.battery)}
    data = {
        "solar_capacity_w": gcfg.solar_capacity_w,
        "step_s": gcfg.step_s,
        "ci_low": gcfg.ci_low,
        "ci_high": gcfg.ci_high,
        "policy": gcfg.policy,
        "interp_method": gcfg.interp_method,
    }
    for key, value in overrides.items():
        if value is None:
            continue
        if key in battery:
            battery[key] = value
        else:
            data[key] = value
    return schemas.GridSpec(battery=schemas.BatterySpec(**battery), **data)


def _outdir(out: str) -> Path:
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def bundled_trace_text(name: str) -> str:
    return resources.files("inferwatt.data").joinpath(name).read_text()


@click.group()
@click.version_option(version=__version__)
@click.option("--server", default=None, metavar="URL",
              help="Send requests to a running service instead of computing in-process.")
@click.pass_context
def main(ctx: click.Context, server: str | None) -> None:
    """Simulate GPU power, energy, and carbon of LLM inference workloads."""
    ctx.obj = make_client(server)


@main.command()
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", default="out", show_default=True, help="Output directory.")
@click.option("--requests", "num_requests", type=int, default=None, help="Request count override.")
@click.option("--qps", type=float, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--pd-ratio", type=float, default=None)
@click.option("--gpu", default=None)
@click.option("--model", default=None)
@click.option("--batch-cap", type=int, default=None)
@click.option("--tp", "tensor_parallel", type=int, default=None)
@click.option("--pp", "pipeline_parallel", type=int, default=None)
@click.option("--replicas", type=int, default=None)
@click.option("--save-trace", is_flag=True, help="Also write the generated request trace.")
@click.pass_obj
@_handle_errors
def simulate(client, config, out, num_requests, qps, seed, pd_ratio, gpu, model,
             batch_cap, tensor_parallel, pipeline_parallel, replicas, save_trace):
    """Generate a workload and simulate batching; writes stage records + summary."""
    scenario = _load_scenario(config)
    req = schemas.SimulateRequest(
        workload=_workload_spec(scenario.workload, num_requests=num_requests,
                                qps=qps, seed=seed, pd_ratio=pd_ratio),
        cluster=_cluster_spec(scenario.cluster, gpu=gpu, model=model, batch_cap=batch_cap,
                              tensor_parallel=tensor_parallel,
                              pipeline_parallel=pipeline_parallel, replicas=replicas),
        include_trace=save_trace,
    )
    resp = client.simulate(req)
    outdir = _outdir(out)
    (outdir / "stage_records.csv").write_text(resp.records_csv)
    reports.write_report(resp.summary.model_dump(), outdir / "summary.txt", "simulation summary")
    if save_trace and resp.trace_csv:
        (outdir / "trace.csv").write_text(resp.trace_csv)
    click.echo(f"simulated {resp.summary.total_requests} requests: "
               f"{resp.summary.num_records} stage records, "
               f"makespan {resp.summary.makespan_s:.1f}s -> {outdir}")


@main.command(name="power")
@click.option("--records", type=click.Path(exists=True, dir_okay=False), required=True,
              help="Stage-record CSV from `simulate`.")
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", default="out", show_default=True)
@click.option("--gpu", default=None)
@click.option("--tp", "tensor_parallel", type=int, default=None)
@click.option("--pp", "pipeline_parallel", type=int, default=None)
@click.option("--replicas", type=int, default=None)
@click.option("--pue", type=float, default=None)
@click.option("--resolution", "resolution_s", type=float, default=None, help="Bin size in seconds.")
@click.option("--epoch", default=None, help="UTC timestamp of simulation second 0.")
@click.option("--ci-static", "ci_static_g_per_kwh", type=float, default=None,
              help="Static carbon intensity for the carbon report (gCO2/kWh).")
@click.option("--idle-fill/--no-idle-fill", default=None,
              help="Fill gaps with the provisioned idle floor (default on).")
@click.pass_obj
@_handle_errors
def power_cmd(client, records, config, out, gpu, tensor_parallel, pipeline_parallel,
              replicas, pue, resolution_s, epoch, ci_static_g_per_kwh, idle_fill):
    """Convert stage records to a binned load profile plus energy/carbon reports."""
    scenario = _load_scenario(config)
    req = schemas.PowerRequest(
        records_csv=Path(records).read_text(),
        cluster=_cluster_spec(scenario.cluster, gpu=gpu, tensor_parallel=tensor_parallel,
                              pipeline_parallel=pipeline_parallel, replicas=replicas),
        power=_power_spec(scenario.power, pue=pue, resolution_s=resolution_s,
                          epoch=timeseries.parse_utc(epoch) if epoch else None,
                          idle_fill=idle_fill, ci_static_g_per_kwh=ci_static_g_per_kwh),
    )
    resp = client.power(req)
    outdir = _outdir(out)
    (outdir / "load_profile.csv").write_text(resp.load_profile_csv)
    reports.write_report(resp.energy.model_dump(), outdir / "energy_report.txt", "energy report")
    reports.write_report(resp.carbon.model_dump(), outdir / "carbon_report.txt", "carbon report")
    click.echo(f"energy {resp.energy.e_op_kwh:.4f} kWh at PUE {resp.energy.pue:g}, "
               f"mean power {resp.energy.mean_power_w:.1f} W -> {outdir}")


@main.command()
@click.option("--load", "load_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="Load-profile CSV from `power`.")
@click.option("--solar", "solar_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Solar trace CSV (defaults to the bundled synthetic week).")
@click.option("--ci", "ci_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Carbon-intensity trace CSV (defaults to the bundled synthetic week).")
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", default="out", show_default=True)
@click.option("--solar-capacity", "solar_capacity_w", type=float, default=None)
@click.option("--step", "step_s", type=float, default=None)
@click.option("--ci-low", type=float, default=None)
@click.option("--ci-high", type=float, default=None)
@click.option("--policy", type=click.Choice(["passive", "carbon-threshold"]), default=None)
@click.option("--interp", "interp_method", type=click.Choice(["nearest", "linear", "cubic"]),
              default=None)
@click.option("--battery-capacity", "capacity_wh", type=float, default=None)
@click.option("--soc-init", type=float, default=None)
@click.option("--soc-min", type=float, default=None)
@click.option("--soc-max", type=float, default=None)
@click.option("--max-charge", "max_charge_w", type=float, default=None)
@click.option("--max-discharge", "max_discharge_w", type=float, default=None)
@click.option("--efficiency", "round_trip_efficiency", type=float, default=None)
@click.pass_obj
@_handle_errors
def cosim(client, load_path, solar_path, ci_path, config, out, **overrides):
    """Co-simulate the load against solar, battery, and grid carbon intensity."""
    scenario = _load_scenario(config)
    req = schemas.CosimRequest(
        load_profile_csv=Path(load_path).read_text(),
        solar_csv=Path(solar_path).read_text() if solar_path else bundled_trace_text("solar_week.csv"),
        ci_csv=Path(ci_path).read_text() if ci_path else bundled_trace_text("ci_week.csv"),
        grid=_grid_spec(scenario.grid, **overrides),
    )
    resp = client.cosim(req)
    outdir = _outdir(out)
    (outdir / "step_log.csv").write_text(resp.step_log_csv)
    reports.write_report(resp.report.model_dump(), outdir / "cosim_report.txt", "cosim report")
    click.echo(f"demand {resp.report.total_demand_kwh:.4f} kWh, "
               f"renewable share {resp.report.renewable_share_pct:.1f}%, "
               f"net footprint {resp.report.net_footprint_g:.1f} g -> {outdir}")


@main.command()
@click.argument("name", type=click.Choice(list(experiments_mod.EXPERIMENTS)))
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", default="out", show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--counts", default=None,
              help="Comma-separated request counts (requests experiment).")
@click.option("--models", default=None, help="Comma-separated model names (requests experiment).")
@click.option("--qps-points", default=None, help="Comma-separated QPS grid (qps experiment).")
@click.option("--requests", "num_requests", type=int, default=None,
              help="Request volume per point (qps experiment).")
@click.option("--plots/--no-plots", default=True, show_default=True)
@click.pass_obj
@_handle_errors
def experiment(client, name, config, out, seed, counts, models, qps_points, num_requests, plots):
    """Run one of the scripted sweeps and emit a CSV plus figures."""
    scenario = _load_scenario(config)
    try:
        counts_list = [int(c) for c in counts.split(",")] if counts else None
        qps_list = [float(q) for q in qps_points.split(",")] if qps_points else None
    except ValueError as exc:
        raise ConfigError(f"bad grid override: {exc}") from None
    req = schemas.ExperimentRequest(
        workload=_workload_spec(scenario.workload, seed=seed),
        cluster=_cluster_spec(scenario.cluster),
        counts=counts_list,
        models=models.split(",") if models else None,
        qps_points=qps_list,
        num_requests=num_requests,
    )
    resp = client.experiment(name, req)
    outdir = _outdir(out)
    csv_path = outdir / f"sweep_{name.replace('-', '_')}.csv"
    experiments_mod.write_rows_csv(resp.rows, csv_path)
    written = [csv_path]
    if plots:
        written += plotting.plot_experiment(name, resp.rows, outdir)
    click.echo(f"experiment '{name}': {len(resp.rows)} grid points -> "
               + ", ".join(str(p) for p in written))


@main.command()
@click.option("--run", "run_dir", type=click.Path(exists=True, file_okay=False), required=True,
              help="Directory holding outputs of previous subcommands.")
@click.option("--out", default=None, help="Plot directory (defaults to the run directory).")
@_handle_errors
def report(run_dir, out):
    """Print the reports found in a run directory and render its plots."""
    run = Path(run_dir)
    outdir = _outdir(out) if out else run
    shown = 0
    for name in ("summary.txt", "energy_report.txt", "carbon_report.txt", "cosim_report.txt"):
        path = run / name
        if path.exists():
            click.echo(path.read_text().rstrip())
            click.echo()
            shown += 1
    written = []
    load_path = run / "load_profile.csv"
    if load_path.exists():
        series = timeseries.import_load_profile(load_path)
        written.append(plotting.plot_load_profile(series, outdir / "power_timeline.png"))
    steps_path = run / "step_log.csv"
    if steps_path.exists():
        states = grid_mod.read_step_log(steps_path)
        if states:
            written.append(plotting.plot_cosim(states, outdir / "cosim_timeline.png"))
    if not shown and not written:
        raise DataError(f"no report files found under {run}")
    if written:
        click.echo("plots: " + ", ".join(str(p) for p in written))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8176, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
