"""Block chaining model: instances, solutions, validation, next-day replay.

Blocks produced by the trip-chaining stage are chained into daily vehicle
runs. Battery state is tracked in seconds of driving range: a block draws
its consumption, depot layovers between blocks recharge at the daytime
rate, and the overnight gap recharges at the (slower) night rate. A
schedule is operable only if the runs can be repeated the next day: each
run's end-of-day charge plus overnight charging must cover the initial
charge of some run that starts the next morning, one-to-one across the
fleet.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

from .errors import InstanceError
from .sdvsp import Block

#: Absolute tolerance (seconds of range) for all charge comparisons.
SOC_TOL = 1e-6


@dataclass(frozen=True)
class EnergyParams:
    """Battery and horizon parameters, all charge quantities in seconds of range.

    ``rate_day`` and ``rate_night`` are unitless: range-seconds gained per
    second spent charging. Daytime (fast) charging must be at least as fast
    as overnight charging. ``layover_max_s=None`` leaves the inter-block
    layover unbounded above.
    """

    battery_cap_s: float
    rate_day: float
    rate_night: float
    horizon_s: float = 86400.0
    vehicle_cost_s: float = 50000.0
    layover_weight: float = 1.0
    layover_min_s: float = 0.0
    layover_max_s: float | None = None
    power_day_kw: float = 450.0
    power_night_kw: float = 125.0
    consumption_rate_kw: float = 220.0

    def __post_init__(self):
        if self.battery_cap_s <= 0:
            raise ValueError("battery_cap_s must be positive")
        if not self.rate_day >= self.rate_night > 0:
            raise ValueError("charge rates must satisfy rate_day >= rate_night > 0")
        if self.horizon_s <= 0:
            raise ValueError("horizon_s must be positive")
        if self.layover_min_s < 0:
            raise ValueError("layover_min_s must be non-negative")
        if self.layover_max_s is not None and self.layover_max_s < self.layover_min_s:
            raise ValueError("layover_max_s must be at least layover_min_s")

    @property
    def battery_kwh(self) -> float:
        """Nominal pack size implied by the consumption rate and range."""
        return self.consumption_rate_kw * self.battery_cap_s / 3600.0

    @classmethod
    def from_power(
        cls,
        power_day_kw: float = 450.0,
        power_night_kw: float = 125.0,
        consumption_rate_kw: float = 220.0,
        battery_cap_s: float = 7200.0,
        **kwargs,
    ) -> "EnergyParams":
        """Derive charge rates from charger power against the drive-time draw."""
        return cls(
            battery_cap_s=battery_cap_s,
            rate_day=power_day_kw / consumption_rate_kw,
            rate_night=power_night_kw / consumption_rate_kw,
            power_day_kw=power_day_kw,
            power_night_kw=power_night_kw,
            consumption_rate_kw=consumption_rate_kw,
            **kwargs,
        )

    @classmethod
    def standard(cls, **kwargs) -> "EnergyParams":
        """Defaults: two-hour range, 450 kW day / 125 kW night charging
        against a 220 kW draw, 24 h horizon, 50 000 s vehicle cost."""
        return cls.from_power(**kwargs)


@dataclass
class BcpInstance:
    """Blocks plus the derived connection sets and big-M constants.

    Day arcs connect two blocks within the same horizon when the depot
    layover between them fits the configured bounds; night arcs connect a
    block to (possibly the same) block of the following horizon. Arc sets
    are materialized lazily so very large instances can be chained and
    validated with membership tests alone.
    """

    blocks: list[Block]
    params: EnergyParams
    big_m1: float
    big_m2: float
    block_by_id: dict[int, Block] = field(init=False, repr=False)

    def __post_init__(self):
        self.block_by_id = {b.id: b for b in self.blocks}

    def day_gap(self, i: int, j: int) -> float:
        return self.block_by_id[j].start_time - self.block_by_id[i].end_time

    def night_window(self, i: int, j: int) -> float:
        return self.params.horizon_s + self.block_by_id[j].start_time - self.block_by_id[i].end_time

    def _within_layover_bounds(self, value: float) -> bool:
        if value < self.params.layover_min_s:
            return False
        return self.params.layover_max_s is None or value <= self.params.layover_max_s

    def is_day_arc(self, i: int, j: int) -> bool:
        return i != j and self._within_layover_bounds(self.day_gap(i, j))

    def is_night_arc(self, i: int, j: int) -> bool:
        return self._within_layover_bounds(self.night_window(i, j))

    @cached_property
    def day_arcs(self) -> list[tuple[int, int]]:
        ids = sorted(self.block_by_id)
        return [(i, j) for i in ids for j in ids if self.is_day_arc(i, j)]

    @cached_property
    def night_arcs(self) -> list[tuple[int, int]]:
        ids = sorted(self.block_by_id)
        return [(i, j) for i in ids for j in ids if self.is_night_arc(i, j)]


def build_instance(blocks: list[Block], params: EnergyParams) -> BcpInstance:
    """Assemble a chaining instance, rejecting out-of-range blocks.

    Blocks that cannot be driven on a full battery have no place here; they
    belong in the range-unconstrained pool (see ``metrics.split_by_range``).
    """
    seen = set()
    for b in blocks:
        if b.id in seen:
            raise InstanceError(f"duplicate block id {b.id}")
        seen.add(b.id)
        if b.consumption > params.battery_cap_s:
            raise InstanceError(
                f"block {b.id} consumes {b.consumption:.0f} s, beyond the "
                f"{params.battery_cap_s:.0f} s battery range"
            )
    max_alpha = max((b.start_time for b in blocks), default=0.0)
    bound = params.battery_cap_s + max(
        (params.horizon_s + max_alpha) * params.rate_night,
        params.rate_day * max_alpha,
    )
    big_m1 = bound + 1.0
    big_m2 = params.battery_cap_s + 2.0 * big_m1
    return BcpInstance(list(blocks), params, big_m1, big_m2)


@dataclass(frozen=True)
class Violation:
    tag: str
    where: tuple
    magnitude: float


@dataclass(frozen=True)
class ValidationReport:
    feasible: bool
    violations: tuple[Violation, ...]


@dataclass
class ChainSolution:
    """Vehicle runs with their charge bookkeeping.

    ``runs`` holds ordered block-id chains; ``day_charge`` maps a used
    consecutive pair to the energy gained between the two blocks;
    ``soc_at_start`` is the charge at each block's start; ``next_day`` maps
    each run's last block to the first block of the run it feeds on the
    following horizon.
    """

    runs: list[list[int]]
    day_charge: dict[tuple[int, int], float]
    soc_at_start: dict[int, float]
    soc_arc: dict[tuple, float]
    next_day: dict[int, int]
    objective: float
    optimal: bool = True
    mip_gap: float = 0.0
    partition: "PartitionInfo | None" = None

    def to_json_dict(self) -> dict:
        out = {
            "runs": [list(run) for run in self.runs],
            "day_charge": {f"{i}-{j}": v for (i, j), v in sorted(self.day_charge.items())},
            "soc": {str(i): v for i, v in sorted(self.soc_at_start.items())},
            "next_day": {str(i): str(j) for i, j in sorted(self.next_day.items())},
            "objective": self.objective,
            "optimal": self.optimal,
        }
        if self.partition is not None:
            out["partition"] = {
                "parts": [list(p) for p in self.partition.parts],
                "cut_edges": self.partition.cut_edges,
            }
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "ChainSolution":
        day_charge = {}
        for key, v in data.get("day_charge", {}).items():
            i, j = key.split("-")
            day_charge[(int(i), int(j))] = float(v)
        partition = None
        if "partition" in data:
            partition = PartitionInfo(
                parts=[list(map(int, p)) for p in data["partition"]["parts"]],
                cut_edges=int(data["partition"]["cut_edges"]),
            )
        return cls(
            runs=[list(map(int, run)) for run in data["runs"]],
            day_charge=day_charge,
            soc_at_start={int(k): float(v) for k, v in data.get("soc", {}).items()},
            soc_arc={},
            next_day={int(k): int(v) for k, v in data.get("next_day", {}).items()},
            objective=float(data["objective"]),
            optimal=bool(data.get("optimal", False)),
            partition=partition,
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "ChainSolution":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class PartitionInfo:
    parts: list[list[int]]
    cut_edges: int


def chain_objective(instance: BcpInstance, runs: list[list[int]]) -> float:
    """Weighted inter-block layover plus per-vehicle cost for a run structure."""
    p = instance.params
    total = p.vehicle_cost_s * len(runs)
    for run in runs:
        for i, j in zip(run, run[1:]):
            total += p.layover_weight * instance.day_gap(i, j)
    return total


def validate(instance: BcpInstance, solution: ChainSolution, assume_full_initial: bool = False) -> ValidationReport:
    """Check a solution against the chaining constraints.

    All charge comparisons use an absolute tolerance of ``SOC_TOL`` seconds.
    Violation tags name the constraint family: block partition (cons-5 /
    cons-6), charge recursion (cons-7), charge bounds (cons-9), daytime
    charge caps (cons-10 / cons-11), overnight linkage (cons-12 / cons-13)
    and the next-day bijection (cons-14 / cons-15). With
    ``assume_full_initial`` every run must start on a full battery
    (cons-23).
    """
    p = instance.params
    cap = p.battery_cap_s
    violations: list[Violation] = []

    for run in solution.runs:
        if not run:
            raise InstanceError("solution contains an empty run")
    referenced = [b for run in solution.runs for b in run]
    unknown = [b for b in set(referenced) | set(solution.soc_at_start) if b not in instance.block_by_id]
    if unknown:
        raise InstanceError(f"solution references unknown block ids: {sorted(unknown)}")

    counts: dict[int, int] = {}
    for b in referenced:
        counts[b] = counts.get(b, 0) + 1
    for b in sorted(instance.block_by_id):
        if counts.get(b, 0) == 0:
            violations.append(Violation("cons-5", (b,), 1.0))
    for b, c in sorted(counts.items()):
        if c > 1:
            violations.append(Violation("cons-6", (b,), float(c - 1)))

    firsts = {run[0] for run in solution.runs}
    lasts = {run[-1] for run in solution.runs}
    used_pairs = {(i, j) for run in solution.runs for i, j in zip(run, run[1:])}

    soc = solution.soc_at_start

    def soc_of(b: int) -> float:
        return soc.get(b, 0.0)

    for run in solution.runs:
        first = run[0]
        if assume_full_initial and abs(soc_of(first) - cap) > SOC_TOL:
            violations.append(Violation("cons-23", (first,), abs(soc_of(first) - cap)))
        for i, j in zip(run, run[1:]):
            if not instance.is_day_arc(i, j):
                violations.append(Violation("cons-5", (i, j), instance.day_gap(i, j)))
                continue
            u = solution.day_charge.get((i, j), 0.0)
            expected = max(soc_of(i) - instance.block_by_id[i].consumption + u, 0.0)
            if abs(soc_of(j) - expected) > SOC_TOL:
                violations.append(Violation("cons-7", (i, j), abs(soc_of(j) - expected)))

    for b in sorted(set(referenced)):
        need = instance.block_by_id[b].consumption
        if soc_of(b) < need - SOC_TOL:
            violations.append(Violation("cons-9", (b,), need - soc_of(b)))
        if soc_of(b) > cap + SOC_TOL:
            violations.append(Violation("cons-9", (b,), soc_of(b) - cap))

    for (i, j), u in sorted(solution.day_charge.items()):
        if u < -SOC_TOL:
            violations.append(Violation("cons-10", (i, j), -u))
            continue
        if (i, j) not in used_pairs:
            tag = "cons-11" if i in lasts else "cons-10"
            violations.append(Violation(tag, (i, j), u))
            continue
        limit = instance.day_gap(i, j) * p.rate_day
        if u > limit + SOC_TOL:
            violations.append(Violation("cons-10", (i, j), u - limit))

    # Overnight links: one per run end, one per run start, each charged at
    # the night rate over the depot dwell spanning the horizon boundary.
    incoming: dict[int, int] = {}
    for i, j in sorted(solution.next_day.items()):
        incoming[j] = incoming.get(j, 0) + 1
        if i not in lasts:
            violations.append(Violation("cons-15", (i, j), 1.0))
            continue
        if j not in firsts:
            violations.append(Violation("cons-14", (i, j), 1.0))
            continue
        if not instance.is_night_arc(i, j):
            violations.append(Violation("cons-12", (i, j), instance.night_window(i, j)))
            continue
        end_soc = soc_of(i) - instance.block_by_id[i].consumption
        overnight = min(cap, end_soc + instance.night_window(i, j) * p.rate_night)
        if overnight < soc_of(j) - SOC_TOL:
            violations.append(Violation("cons-13", (i, j), soc_of(j) - overnight))
    for j in sorted(firsts):
        if incoming.get(j, 0) != 1:
            violations.append(Violation("cons-14", (j,), float(abs(incoming.get(j, 0) - 1))))
    outgoing: dict[int, int] = {}
    for i in solution.next_day:
        outgoing[i] = outgoing.get(i, 0) + 1
    for i in sorted(lasts):
        if outgoing.get(i, 0) != 1:
            violations.append(Violation("cons-15", (i,), float(abs(outgoing.get(i, 0) - 1))))

    return ValidationReport(feasible=not violations, violations=tuple(violations))


def replay_next_day(instance: BcpInstance, solution: ChainSolution) -> list[Violation]:
    """Simulate a second identical horizon and report any charge shortfalls.

    Each run restarts at the charge its overnight predecessor hands over;
    daytime charges are replayed capped at the remaining headroom. Returns
    one violation per block whose replayed charge cannot cover it.
    """
    p = instance.params
    cap = p.battery_cap_s
    first_to_run = {run[0]: run for run in solution.runs}
    handover: dict[int, float] = {}
    for i, j in solution.next_day.items():
        end_soc = solution.soc_at_start.get(i, 0.0) - instance.block_by_id[i].consumption
        handover[j] = min(cap, end_soc + instance.night_window(i, j) * p.rate_night)
    problems: list[Violation] = []
    for first, run in sorted(first_to_run.items()):
        if first not in handover:
            problems.append(Violation("replay-unlinked", (first,), 1.0))
            continue
        b = handover[first]
        for idx, block_id in enumerate(run):
            need = instance.block_by_id[block_id].consumption
            if b < need - SOC_TOL:
                problems.append(Violation("replay-soc", (block_id,), need - b))
                break
            b -= need
            if idx + 1 < len(run):
                u = solution.day_charge.get((block_id, run[idx + 1]), 0.0)
                b = min(b + u, cap)
    return problems
