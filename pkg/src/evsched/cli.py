"""Command-line front end: ingest feeds, solve instances, run benchmarks.

Exit codes: 0 success, 1 internal solver-output validation failure,
2 data error, 3 infeasible instance (or a solution file that fails
revalidation), 4 time limit expired before any incumbent.
"""

from __future__ import annotations

import dataclasses
import json
import sys
from dataclasses import dataclass
from datetime import date as Date
from pathlib import Path

import click

from . import bench as bench_mod
from .bcp import ChainSolution, EnergyParams, build_instance, validate
from .dac import default_workers, solve_dac
from .errors import InfeasibleError, IngestionError, TimeLimitError
from .exact import solve_exact
from .figures import save_bench_figures, save_efficiency_figure, save_fleet_figure
from .gtfs import (
    TravelModel,
    assign_trips_to_depot,
    filter_to_horizon,
    load_depots_csv,
    load_route_map_csv,
    load_trips_csv,
    parse_gtfs,
    write_trips_csv,
)
from .greedy import solve_greedy
from .lpfile import write_lp_file
from .metrics import (
    FleetReport,
    miles_to_seconds,
    schedule_efficiency,
    split_by_range,
    unconstrained_params,
    write_metrics_csv,
    write_metrics_json,
    write_plot_data,
)
from .sdvsp import SdvspParams, build_arcs, solve_sdvsp, write_blocks_csv

EXIT_VALIDATION = 1
EXIT_DATA = 2
EXIT_INFEASIBLE = 3
EXIT_NO_INCUMBENT = 4

METHODS = ("exact", "greedy", "dac")


@dataclass
class RunConfig:
    """Resolved run settings; config-file keys mirror these field names."""

    method: str = "exact"
    battery_min: float = 120.0
    range_miles: float | None = None
    rate_day: float | None = None
    rate_night: float | None = None
    power_day_kw: float = 450.0
    power_night_kw: float = 125.0
    consumption_rate_kw: float = 220.0
    horizon_s: float = 86400.0
    vehicle_cost_s: float = 50000.0
    layover_weight: float = 1.0
    layover_min_s: float = 0.0
    layover_max_s: float | None = None
    K: float = 50000.0
    W: float = 1.0
    seed: int = 0
    time_limit_s: float = 1200.0
    subproblem_cap: int = 20
    assume_full_initial: bool | None = None
    overnight_window: str = "consistent"
    avg_speed_mps: float = TravelModel().avg_speed

    def battery_cap_s(self) -> float:
        if self.range_miles is not None:
            return miles_to_seconds(self.range_miles)
        return self.battery_min * 60.0

    def energy_params(self) -> EnergyParams:
        rate_day = self.rate_day if self.rate_day is not None else self.power_day_kw / self.consumption_rate_kw
        rate_night = (
            self.rate_night if self.rate_night is not None else self.power_night_kw / self.consumption_rate_kw
        )
        return EnergyParams(
            battery_cap_s=self.battery_cap_s(),
            rate_day=rate_day,
            rate_night=rate_night,
            horizon_s=self.horizon_s,
            vehicle_cost_s=self.vehicle_cost_s,
            layover_weight=self.layover_weight,
            layover_min_s=self.layover_min_s,
            layover_max_s=self.layover_max_s,
            power_day_kw=self.power_day_kw,
            power_night_kw=self.power_night_kw,
            consumption_rate_kw=self.consumption_rate_kw,
        )

    def sdvsp_params(self) -> SdvspParams:
        return SdvspParams(block_cost=self.K, layover_weight=self.W)

    def travel_model(self) -> TravelModel:
        return TravelModel(avg_speed=self.avg_speed_mps)

    def full_initial_resolved(self) -> bool:
        if self.assume_full_initial is not None:
            return self.assume_full_initial
        # Divide-and-conquer and greedy assume full batteries; plain exact
        # leaves the initial charge free unless asked otherwise.
        return self.method in ("dac", "greedy")


_BOOL_VALUES = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def _parse_config_value(field_name: str, raw: str):
    raw = raw.strip()
    if raw.lower() == "none":
        return None
    hints = {f.name: f.type for f in dataclasses.fields(RunConfig)}
    hint = hints[field_name]
    if hint == "str":
        return raw
    if hint == "int":
        return int(raw)
    if hint == "bool | None":
        return _BOOL_VALUES[raw.lower()]
    return float(raw)


def load_config_file(path: str | Path) -> dict:
    """Parse a flat ``key = value`` config file into RunConfig overrides."""
    values: dict = {}
    known = {f.name for f in dataclasses.fields(RunConfig)}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise IngestionError(f"{path}: line {lineno}: expected key = value")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise IngestionError(f"{path}: line {lineno}: unknown key {key!r}")
        values[key] = _parse_config_value(key, raw)
    return values


def resolve_config(config_path: str | None, cli_values: dict) -> RunConfig:
    """Defaults, then config-file values, then explicitly passed CLI flags."""
    merged: dict = {}
    if config_path:
        merged.update(load_config_file(config_path))
    merged.update({k: v for k, v in cli_values.items() if v is not None})
    return RunConfig(**merged)


@click.group()
def main() -> None:
    """Electric bus scheduling toolkit."""


def _fail(message: str, code: int) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@main.command()
@click.option("--gtfs-dir", type=click.Path(exists=True, file_okay=False), default=None)
@click.option("--trips-csv", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--depots-csv", type=click.Path(dir_okay=False), required=True)
@click.option("--date", "service_date", type=click.DateTime(formats=["%Y-%m-%d"]), default=None)
@click.option("--route-map", type=click.Path(dir_okay=False), default=None)
@click.option("--out", type=click.Path(file_okay=False), required=True)
def ingest(gtfs_dir, trips_csv, depots_csv, service_date, route_map, out) -> None:
    """Read trips (GTFS feed or trip CSV), assign them to depots, write per-depot CSVs."""
    try:
        if (gtfs_dir is None) == (trips_csv is None):
            raise IngestionError("provide exactly one of --gtfs-dir or --trips-csv")
        if gtfs_dir is not None:
            if service_date is None:
                raise IngestionError("--date is required with --gtfs-dir")
            trips = parse_gtfs(gtfs_dir, Date(service_date.year, service_date.month, service_date.day))
        else:
            trips = load_trips_csv(trips_csv)
        depots = load_depots_csv(depots_csv)
        mapping = load_route_map_csv(route_map) if route_map else None
        assignment = assign_trips_to_depot(trips, depots, mapping)
    except IngestionError as exc:
        _fail(str(exc), EXIT_DATA)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for depot_id, depot_trips in sorted(assignment.items()):
        target = out_dir / f"depot_{depot_id}.csv"
        write_trips_csv(target, depot_trips)
        click.echo(f"{depot_id}: {len(depot_trips)} trips -> {target}")


_solve_options = [
    click.option("--config", "config_path", type=click.Path(dir_okay=False, exists=True), default=None),
    click.option("--method", type=click.Choice(METHODS), default=None),
    click.option("--battery-min", type=float, default=None),
    click.option("--range-miles", type=float, default=None),
    click.option("--rate-day", type=float, default=None),
    click.option("--rate-night", type=float, default=None),
    click.option("--horizon-s", type=float, default=None),
    click.option("--vehicle-cost-s", type=float, default=None),
    click.option("--layover-weight", type=float, default=None),
    click.option("--K", "k_cost", type=float, default=None),
    click.option("--W", "w_weight", type=float, default=None),
    click.option("--seed", type=int, default=None),
    click.option("--time-limit-s", type=float, default=None),
    click.option("--subproblem-cap", type=int, default=None),
    click.option("--full-initial/--no-full-initial", "full_initial", default=None),
    click.option("--overnight-window", type=click.Choice(["consistent", "paper-literal"]), default=None),
]


def _apply_options(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn

    return wrap


def _load_depot(depots_csv: str, depot_id: str | None):
    depots = load_depots_csv(depots_csv)
    if depot_id is None:
        if len(depots) != 1:
            raise IngestionError("--depot-id is required when the depot file lists several depots")
        return depots[0]
    for depot in depots:
        if depot.id == depot_id:
            return depot
    raise IngestionError(f"depot {depot_id!r} not found in {depots_csv}")


@main.command()
@click.option("--trips-csv", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--depots-csv", type=click.Path(dir_okay=False), required=True)
@click.option("--depot-id", default=None)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.option("--lp-out", type=click.Path(dir_okay=False), default=None)
@click.option("--plot-data", is_flag=True, default=False)
@click.option("--validate-only", is_flag=True, default=False)
@click.option("--solution", "solution_path", type=click.Path(dir_okay=False), default=None)
@_apply_options(_solve_options)
def solve(
    trips_csv,
    depots_csv,
    depot_id,
    out,
    lp_out,
    plot_data,
    validate_only,
    solution_path,
    config_path,
    **cli_values,
) -> None:
    """Chain one depot's trips into blocks, then into battery-feasible runs."""
    cli_values["K"] = cli_values.pop("k_cost")
    cli_values["W"] = cli_values.pop("w_weight")
    cli_values["assume_full_initial"] = cli_values.pop("full_initial")
    cfg = resolve_config(config_path, cli_values)
    try:
        trips = load_trips_csv(trips_csv)
        depot = _load_depot(depots_csv, depot_id)
    except IngestionError as exc:
        _fail(str(exc), EXIT_DATA)
    trips = filter_to_horizon(trips, cfg.horizon_s)
    energy = cfg.energy_params()

    sdvsp_instance = build_arcs(trips, depot, cfg.travel_model(), cfg.sdvsp_params())
    blocks = solve_sdvsp(sdvsp_instance)
    ev_blocks, dv_blocks = split_by_range(blocks, energy.battery_cap_s)
    instance = build_instance(ev_blocks, energy)
    full_initial = cfg.full_initial_resolved()

    if validate_only:
        if solution_path is None:
            _fail("--validate-only requires --solution", EXIT_DATA)
        solution = ChainSolution.load(solution_path)
        report = validate(instance, solution, assume_full_initial=full_initial)
        if report.feasible:
            click.echo("solution revalidates: feasible")
            return
        for violation in report.violations:
            click.echo(f"violation {violation.tag} at {violation.where}: {violation.magnitude:.6g}", err=True)
        _fail("solution failed revalidation", EXIT_INFEASIBLE)

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_blocks_csv(out_dir / "blocks.csv", blocks)
    if lp_out:
        write_lp_file(instance, lp_out, linearized=True, assume_full_initial=full_initial)

    try:
        if cfg.method == "greedy":
            solution = solve_greedy(instance, overnight_window=cfg.overnight_window)
        elif cfg.method == "dac":
            solution = solve_dac(
                instance,
                subproblem_cap=cfg.subproblem_cap,
                time_limit_per_sub=cfg.time_limit_s,
                seed=cfg.seed,
                assume_full_initial=full_initial,
                workers=default_workers(),
            )
        else:
            solution = solve_exact(
                instance,
                time_limit_s=cfg.time_limit_s,
                assume_full_initial=full_initial,
                max_blocks=None,
            )
    except InfeasibleError as exc:
        _fail(f"infeasible: {exc}", EXIT_INFEASIBLE)
    except TimeLimitError as exc:
        _fail(str(exc), EXIT_NO_INCUMBENT)

    report = validate(instance, solution, assume_full_initial=full_initial or cfg.method == "greedy")
    if not report.feasible:
        for violation in report.violations:
            click.echo(f"violation {violation.tag} at {violation.where}: {violation.magnitude:.6g}", err=True)
        _fail("solver emitted an invalid solution", EXIT_VALIDATION)

    solution.save(out_dir / "solution.json")

    dv_runs = 0
    if dv_blocks:
        dv_instance = build_instance(dv_blocks, unconstrained_params(energy, dv_blocks))
        dv_runs = len(solve_greedy(dv_instance).runs)
    fleet = FleetReport(n_ev=len(solution.runs), n_dv=dv_runs)
    efficiency = schedule_efficiency(solution, instance) if solution.runs else None
    write_metrics_json(out_dir / "metrics.json", fleet, efficiency)
    write_metrics_csv(out_dir / "metrics.csv", fleet, efficiency)
    if plot_data:
        write_plot_data(out_dir / "plot_data.csv", cfg.method, fleet, efficiency)
    save_fleet_figure(out_dir / "fleet.png", fleet)
    if efficiency is not None:
        save_efficiency_figure(out_dir / "efficiency.png", efficiency)

    click.echo(
        f"method={cfg.method} blocks={len(blocks)} ev_blocks={len(ev_blocks)} "
        f"runs={len(solution.runs)} objective={solution.objective:.6g} optimal={solution.optimal}"
    )


@main.command("bench")
@click.option("--trips-csv", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--depots-csv", type=click.Path(dir_okay=False), required=True)
@click.option("--depot-id", default=None)
@click.option("--sizes", required=True, help="Comma-separated sample sizes, e.g. 10,20,30")
@click.option("--reps", required=True, help="Comma-separated repetition counts, one per size")
@click.option("--seed", type=int, default=0)
@click.option("--time-limit-s", type=float, default=1200.0)
@click.option("--subproblem-cap", type=int, default=20)
@click.option("--warm-start", is_flag=True, default=False)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.option("--config", "config_path", type=click.Path(dir_okay=False, exists=True), default=None)
def bench(
    trips_csv,
    depots_csv,
    depot_id,
    sizes,
    reps,
    seed,
    time_limit_s,
    subproblem_cap,
    warm_start,
    out,
    config_path,
) -> None:
    """Sample random trip subsets and compare exact, greedy, and divide-and-conquer."""
    cfg = resolve_config(config_path, {})
    try:
        trips = load_trips_csv(trips_csv)
        depot = _load_depot(depots_csv, depot_id)
        size_list = tuple(int(s) for s in sizes.split(","))
        rep_list = tuple(int(r) for r in reps.split(","))
        bench_cfg = bench_mod.BenchConfig(
            sizes=size_list,
            reps=rep_list,
            seed=seed,
            time_limit_s=time_limit_s,
            subproblem_cap=subproblem_cap,
            warm_start=warm_start,
        )
        results, summary = bench_mod.run_benchmark(
            trips,
            depot,
            bench_cfg,
            travel_model=cfg.travel_model(),
            sdvsp_params=cfg.sdvsp_params(),
            energy=cfg.energy_params(),
        )
    except (IngestionError, ValueError) as exc:
        _fail(str(exc), EXIT_DATA)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    bench_mod.write_bench_csv(out_dir / "bench.csv", summary)
    bench_mod.write_rep_csv(out_dir / "bench_reps.csv", results)
    save_bench_figures(out_dir / "bench_gaps.png", out_dir / "bench_times.png", summary)
    click.echo(json.dumps(summary, indent=2))


if __name__ == "__main__":
    main()
