"""Fleet and efficiency metrics for block sets and chaining solutions."""

from __future__ import annotations

import csv
import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .bcp import BcpInstance, ChainSolution, EnergyParams
from .sdvsp import Block


@dataclass(frozen=True)
class FleetReport:
    n_ev: int
    n_dv: int

    @property
    def total(self) -> int:
        return self.n_ev + self.n_dv

    @property
    def ev_share(self) -> float:
        return self.n_ev / self.total if self.total else 0.0

    @property
    def dv_share(self) -> float:
        return self.n_dv / self.total if self.total else 0.0

    def as_dict(self) -> dict:
        return {
            "n_ev": self.n_ev,
            "n_dv": self.n_dv,
            "total": self.total,
            "ev_share": self.ev_share,
            "dv_share": self.dv_share,
        }


@dataclass(frozen=True)
class EfficiencyReport:
    block_eff: float
    schedule_eff: float
    service_s: float
    deadhead_s: float
    intertrip_layover_s: float
    day_depot_layover_s: float
    overnight_depot_layover_s: float

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def miles_to_seconds(miles: float, mph: float = 30.0) -> float:
    """Convert a driving range in miles to seconds at the given speed."""
    if mph <= 0:
        raise ValueError("speed must be positive")
    return miles / mph * 3600.0


def split_by_range(blocks: list[Block], range_limit_s: float) -> tuple[list[Block], list[Block]]:
    """Blocks short enough for electric service vs. the leftover pool."""
    ev = [b for b in blocks if b.consumption <= range_limit_s]
    dv = [b for b in blocks if b.consumption > range_limit_s]
    return ev, dv


def block_efficiency(blocks: list[Block]) -> float:
    """Share of revenue time within total block time."""
    if not blocks:
        raise ValueError("block_efficiency requires at least one block")
    total = sum(b.span for b in blocks)
    return sum(b.revenue_time for b in blocks) / total


def schedule_efficiency(solution: ChainSolution, instance: BcpInstance) -> EfficiencyReport:
    """Break one horizon of fleet time into service, deadhead, and idle parts.

    The schedule efficiency divides revenue time by the whole fleet-hours of
    the horizon, so it is always at most the block efficiency: chaining only
    adds depot idle time to the denominator.
    """
    if not solution.runs:
        raise ValueError("schedule_efficiency requires a non-empty solution")
    horizon = instance.params.horizon_s
    service = deadhead = intertrip = day_depot = overnight = 0.0
    for run in solution.runs:
        for block_id in run:
            b = instance.block_by_id[block_id]
            service += b.revenue_time
            deadhead += b.deadhead_time
            intertrip += b.intertrip_layover
        for i, j in zip(run, run[1:]):
            day_depot += instance.day_gap(i, j)
        first = instance.block_by_id[run[0]]
        last = instance.block_by_id[run[-1]]
        overnight += first.start_time + (horizon - last.end_time)
    n = len(solution.runs)
    blocks = [instance.block_by_id[b] for run in solution.runs for b in run]
    return EfficiencyReport(
        block_eff=block_efficiency(blocks),
        schedule_eff=service / (n * horizon),
        service_s=service,
        deadhead_s=deadhead,
        intertrip_layover_s=intertrip,
        day_depot_layover_s=day_depot,
        overnight_depot_layover_s=overnight,
    )


def replacement_ratio(n_ev: int, n_dv_scenario: int, n_dv_only: int) -> float:
    """Electric buses fielded per conventional bus they displace."""
    displaced = n_dv_only - n_dv_scenario
    if displaced <= 0:
        raise ValueError("the scenario displaces no conventional vehicles")
    return n_ev / displaced


def unconstrained_params(params: EnergyParams, blocks: list[Block]) -> EnergyParams:
    """Range-unconstrained variant used to chain the leftover (diesel) pool.

    The battery is sized past the total consumption on the table so no
    charge constraint can ever bind; everything else is kept so layover
    rules and costs stay comparable.
    """
    total = sum(b.consumption for b in blocks) + params.battery_cap_s + 1.0
    return dataclasses.replace(params, battery_cap_s=total)


def write_metrics_json(path: str | Path, fleet: FleetReport, efficiency: EfficiencyReport | None) -> None:
    payload: dict = {"fleet": fleet.as_dict()}
    if efficiency is not None:
        payload["efficiency"] = efficiency.as_dict()
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_metrics_csv(path: str | Path, fleet: FleetReport, efficiency: EfficiencyReport | None) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value"])
        for key, value in fleet.as_dict().items():
            writer.writerow([key, value])
        if efficiency is not None:
            for key, value in efficiency.as_dict().items():
                writer.writerow([key, value])


def write_plot_data(path: str | Path, scenario: str, fleet: FleetReport, efficiency: EfficiencyReport | None) -> None:
    """Tidy long-format CSV (scenario, group, component, value) for plotting."""
    rows = [
        (scenario, "fleet", "ev", fleet.n_ev),
        (scenario, "fleet", "dv", fleet.n_dv),
        (scenario, "fleet_share", "ev", fleet.ev_share),
        (scenario, "fleet_share", "dv", fleet.dv_share),
    ]
    if efficiency is not None:
        for key, value in efficiency.as_dict().items():
            rows.append((scenario, "efficiency", key, value))
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scenario", "group", "component", "value"])
        writer.writerows(rows)
