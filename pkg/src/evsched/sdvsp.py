"""Single-depot trip chaining: build blocks from timetabled trips.

The model chains trips into depot-to-depot blocks so that the weighted sum
of non-revenue time (deadheading plus weighted layover) and the fleet
proxy cost (a fixed dispatch cost per block) is minimized. Successor and
predecessor constraints make this an assignment problem over trips plus
depot copies, whose constraint matrix is totally unimodular, so a
min-cost-flow solve is exact and integral by construction.
"""

from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .errors import InstanceError
from .gtfs import Depot, TravelModel, Trip, deadhead_time
from .minflow import MinCostFlow

BLOCK_CSV_HEADER = [
    "block_id",
    "trip_ids",
    "start_time_s",
    "end_time_s",
    "consumption_s",
    "revenue_s",
    "deadhead_s",
    "layover_s",
]


@dataclass(frozen=True)
class SdvspParams:
    """Chaining cost controls.

    ``block_cost`` (seconds) is charged once per block on the depot
    dispatch arc; raising it favors fewer, longer blocks. ``layover_weight``
    scales idle time between chained trips against deadhead time; raising
    it favors shorter blocks.
    """

    block_cost: float = 50000.0
    layover_weight: float = 1.0

    def __post_init__(self):
        if self.block_cost < 0 or self.layover_weight < 0:
            raise ValueError("block_cost and layover_weight must be non-negative")


@dataclass(frozen=True)
class TripArc:
    """A feasible trip-to-trip connection (indices into the trip list)."""

    tail: int
    head: int
    deadhead: float
    layover: float

    def __post_init__(self):
        if self.tail == self.head:
            raise ValueError("self-connections are not allowed")
        if self.layover < 0:
            raise ValueError("negative layover")


@dataclass(frozen=True)
class SdvspInstance:
    trips: tuple[Trip, ...]
    depot: Depot
    arcs: tuple[TripArc, ...]
    depot_out: tuple[float, ...]  # pull-out deadhead, depot -> trip origin
    depot_in: tuple[float, ...]  # pull-in deadhead, trip destination -> depot
    params: SdvspParams


@dataclass(frozen=True)
class Block:
    """A depot-to-depot chain of trips served by one bus without returning.

    Times include the pull-out and pull-in deadheads, so ``start_time`` is
    the depot departure and ``end_time`` the depot arrival. ``consumption``
    counts driving time only (revenue plus deadhead); idle layover between
    trips draws no energy.
    """

    id: int
    trip_ids: tuple[str, ...]
    start_time: float
    end_time: float
    consumption: float
    revenue_time: float
    deadhead_time: float
    intertrip_layover: float

    def __post_init__(self):
        if self.end_time <= self.start_time:
            raise ValueError(f"block {self.id}: end_time must exceed start_time")
        if abs(self.consumption - (self.revenue_time + self.deadhead_time)) > 1e-6:
            raise ValueError(f"block {self.id}: consumption must equal revenue plus deadhead time")
        if self.consumption > self.end_time - self.start_time + 1e-6:
            raise ValueError(f"block {self.id}: consumption exceeds the block span")

    @property
    def span(self) -> float:
        return self.end_time - self.start_time


def build_arcs(
    trips: list[Trip],
    depot: Depot,
    travel_model: TravelModel = TravelModel(),
    params: SdvspParams = SdvspParams(),
) -> SdvspInstance:
    """Assemble the chaining instance for one depot's trips.

    A connection (i, j) exists exactly when trip j can start after trip i
    ends plus the deadhead between them; its layover is the remaining wait
    at j's origin.
    """
    arcs: list[TripArc] = []
    for i, a in enumerate(trips):
        for j, b in enumerate(trips):
            if i == j:
                continue
            dh = deadhead_time(a.destination, b.origin, travel_model)
            lay = b.start_time - a.end_time - dh
            if lay >= 0:
                arcs.append(TripArc(i, j, dh, lay))
    depot_out = tuple(deadhead_time(depot.location, t.origin, travel_model) for t in trips)
    depot_in = tuple(deadhead_time(t.destination, depot.location, travel_model) for t in trips)
    return SdvspInstance(tuple(trips), depot, tuple(arcs), depot_out, depot_in, params)


def solve_sdvsp(instance: SdvspInstance) -> list[Block]:
    """Chain trips into blocks at minimum total cost.

    Reduces the successor/predecessor constraints to an assignment problem:
    a unit of flow leaves every trip's "outgoing" side and enters every
    trip's "incoming" side, either along a trip-to-trip connection or
    through the depot (pull-in, then a fresh dispatch paying the block
    cost). Solved by successive shortest paths; the solution is always
    integral. A feasible chaining always exists because every trip can form
    its own block.
    """
    trips = instance.trips
    n = len(trips)
    if n == 0:
        return []
    params = instance.params

    # Node layout: source, depot-return collector, depot-dispatch collector,
    # per-trip outgoing nodes, per-trip incoming nodes, sink.
    src = 0
    depot_ret = 1
    depot_dis = 2
    out0 = 3
    in0 = 3 + n
    sink = 3 + 2 * n

    g = MinCostFlow(3 + 2 * n + 1)
    for i in range(n):
        g.add_arc(src, out0 + i, 1.0, 0.0)
    for j in range(n):
        g.add_arc(in0 + j, sink, 1.0, 0.0)
    chain_arc_ids = []
    for arc in instance.arcs:
        cost = arc.deadhead + params.layover_weight * arc.layover
        chain_arc_ids.append((arc, g.add_arc(out0 + arc.tail, in0 + arc.head, 1.0, cost)))
    pull_in_ids = [g.add_arc(out0 + i, depot_ret, 1.0, instance.depot_in[i]) for i in range(n)]
    g.add_arc(depot_ret, depot_dis, float(n), 0.0)
    dispatch_ids = [g.add_arc(depot_dis, in0 + j, 1.0, params.block_cost + instance.depot_out[j]) for j in range(n)]

    flow, _ = g.solve(src, sink, float(n))
    if flow != n:
        raise RuntimeError("internal error: trip assignment did not saturate")

    successor: dict[int, int] = {}
    for arc, arc_id in chain_arc_ids:
        if g.flow_on(arc_id) > 0.5:
            successor[arc.tail] = arc.head
    firsts = [j for j in range(n) if g.flow_on(dispatch_ids[j]) > 0.5]
    lasts = {i for i in range(n) if g.flow_on(pull_in_ids[i]) > 0.5}

    # Assignment sanity: every trip has exactly one successor and one predecessor.
    succ_count = [0] * n
    pred_count = [0] * n
    for i, j in successor.items():
        succ_count[i] += 1
        pred_count[j] += 1
    for i in lasts:
        succ_count[i] += 1
    for j in firsts:
        pred_count[j] += 1
    if any(c != 1 for c in succ_count) or any(c != 1 for c in pred_count):
        raise RuntimeError("internal error: decoded chaining is not an assignment")

    arc_by_pair = {(a.tail, a.head): a for a in instance.arcs}
    chains: list[list[int]] = []
    for j in sorted(firsts):
        chain = [j]
        while chain[-1] not in lasts:
            chain.append(successor[chain[-1]])
        chains.append(chain)

    blocks = []
    for chain in chains:
        revenue = sum(trips[i].duration for i in chain)
        deadhead = instance.depot_out[chain[0]] + instance.depot_in[chain[-1]]
        layover = 0.0
        for a, b in zip(chain, chain[1:]):
            arc = arc_by_pair[(a, b)]
            deadhead += arc.deadhead
            layover += arc.layover
        blocks.append(
            dict(
                trip_ids=tuple(trips[i].id for i in chain),
                start_time=trips[chain[0]].start_time - instance.depot_out[chain[0]],
                end_time=trips[chain[-1]].end_time + instance.depot_in[chain[-1]],
                consumption=revenue + deadhead,
                revenue_time=revenue,
                deadhead_time=deadhead,
                intertrip_layover=layover,
            )
        )
    blocks.sort(key=lambda b: (b["start_time"], b["trip_ids"][0]))
    return [Block(id=k, **b) for k, b in enumerate(blocks)]


def sdvsp_objective(instance: SdvspInstance, blocks: list[Block]) -> float:
    """Recompute the chaining cost of a block set under the instance's params."""
    params = instance.params
    trip_index = {t.id: i for i, t in enumerate(instance.trips)}
    arc_by_pair = {(a.tail, a.head): a for a in instance.arcs}
    total = 0.0
    for block in blocks:
        idx = [trip_index[t] for t in block.trip_ids]
        total += params.block_cost + instance.depot_out[idx[0]] + instance.depot_in[idx[-1]]
        for a, b in zip(idx, idx[1:]):
            arc = arc_by_pair[(a, b)]
            total += arc.deadhead + params.layover_weight * arc.layover
    return total


def sweep_block_control(
    instance: SdvspInstance,
    block_cost_values: list[float],
    layover_weight_values: list[float],
    range_limit_s: float,
) -> dict[tuple[float, float], float]:
    """Grid-search the chaining cost controls.

    For each (block_cost, layover_weight) pair the instance is re-solved and
    the share of blocks whose consumption fits within ``range_limit_s`` is
    reported. No monotonicity is enforced; the table is for inspection.
    """
    if not block_cost_values or not layover_weight_values:
        raise ValueError("both parameter grids must be non-empty")
    table: dict[tuple[float, float], float] = {}
    for bc in block_cost_values:
        for lw in layover_weight_values:
            swapped = dataclasses.replace(instance, params=SdvspParams(bc, lw))
            blocks = solve_sdvsp(swapped)
            if not blocks:
                table[(bc, lw)] = 1.0
                continue
            within = sum(1 for b in blocks if b.consumption <= range_limit_s)
            table[(bc, lw)] = within / len(blocks)
    return table


def write_blocks_csv(path: str | Path, blocks: list[Block]) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(BLOCK_CSV_HEADER)
        for b in blocks:
            writer.writerow(
                [
                    b.id,
                    ";".join(b.trip_ids),
                    b.start_time,
                    b.end_time,
                    b.consumption,
                    b.revenue_time,
                    b.deadhead_time,
                    b.intertrip_layover,
                ]
            )


def load_blocks_csv(path: str | Path) -> list[Block]:
    path = Path(path)
    blocks = []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != BLOCK_CSV_HEADER:
            raise InstanceError(f"{path.name}: expected header {','.join(BLOCK_CSV_HEADER)}")
        for row in reader:
            blocks.append(
                Block(
                    id=int(row["block_id"]),
                    trip_ids=tuple(row["trip_ids"].split(";")) if row["trip_ids"] else (),
                    start_time=float(row["start_time_s"]),
                    end_time=float(row["end_time_s"]),
                    consumption=float(row["consumption_s"]),
                    revenue_time=float(row["revenue_s"]),
                    deadhead_time=float(row["deadhead_s"]),
                    intertrip_layover=float(row["layover_s"]),
                )
            )
    return blocks
