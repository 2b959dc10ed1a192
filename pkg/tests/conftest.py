"""Shared fixtures and synthetic-instance generators."""

from __future__ import annotations

import csv
import random
from pathlib import Path

import pytest

from evsched.bcp import EnergyParams, build_instance
from evsched.gtfs import Depot, Stop, Trip
from evsched.sdvsp import Block, SdvspInstance, SdvspParams, TripArc


def make_block(block_id: int, start: float, drive: float, idle: float = 0.0) -> Block:
    """Synthetic block: a fifth of the driving is deadhead, the rest revenue."""
    dh = drive / 5.0
    return Block(
        id=block_id,
        trip_ids=(f"b{block_id}",),
        start_time=float(start),
        end_time=float(start + drive + idle),
        consumption=float(drive),
        revenue_time=float(drive - dh),
        deadhead_time=float(dh),
        intertrip_layover=float(idle),
    )


def random_blocks(
    rng: random.Random,
    n: int,
    drive_lo: int = 1800,
    drive_hi: int = 6600,
    idle_hi: int = 1500,
    alpha_lo: int = 0,
    alpha_hi: int = 72000,
) -> list[Block]:
    """Blocks spread over the day; spans stay short enough that every block
    can recover a full battery overnight even as a stand-alone run."""
    blocks = []
    for i in range(n):
        drive = rng.randrange(drive_lo, drive_hi)
        idle = rng.randrange(0, idle_hi)
        alpha = rng.randrange(alpha_lo, alpha_hi)
        blocks.append(make_block(i, alpha, drive, idle))
    return blocks


def random_bcp_instance(rng: random.Random, n: int, params: EnergyParams | None = None, **kwargs):
    params = params or EnergyParams.standard()
    return build_instance(random_blocks(rng, n, **kwargs), params)


DUMMY_STOP = Stop("x", 41.0, -87.6)
DUMMY_DEPOT = Depot("d0", DUMMY_STOP)


def random_sdvsp_instance(
    rng: random.Random,
    n: int,
    block_cost: float | None = None,
    layover_weight: float | None = None,
) -> SdvspInstance:
    """Integer-cost chaining instance with an explicit deadhead table."""
    trips = []
    for i in range(n):
        start = rng.randrange(0, 40000)
        duration = rng.randrange(600, 3600)
        trips.append(Trip(f"t{i:02d}", DUMMY_STOP, DUMMY_STOP, start, start + duration))
    arcs = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            dh = rng.randrange(60, 1200)
            layover = trips[j].start_time - trips[i].end_time - dh
            if layover >= 0:
                arcs.append(TripArc(i, j, float(dh), float(layover)))
    depot_out = tuple(float(rng.randrange(60, 1500)) for _ in range(n))
    depot_in = tuple(float(rng.randrange(60, 1500)) for _ in range(n))
    if block_cost is None:
        block_cost = rng.choice([0.0, 500.0, 5000.0, 50000.0])
    if layover_weight is None:
        layover_weight = rng.choice([0.0, 1.0, 2.0])
    return SdvspInstance(
        tuple(trips),
        DUMMY_DEPOT,
        tuple(arcs),
        depot_out,
        depot_in,
        SdvspParams(block_cost, layover_weight),
    )


def write_gtfs_feed(
    feed_dir: Path,
    trips: list[dict],
    stop_times: list[dict],
    stops: list[dict],
    calendar: list[dict] | None = None,
    calendar_dates: list[dict] | None = None,
) -> Path:
    feed_dir.mkdir(parents=True, exist_ok=True)

    def dump(name: str, rows: list[dict], header: list[str]) -> None:
        with (feed_dir / name).open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=header)
            writer.writeheader()
            writer.writerows(rows)

    dump("trips.txt", trips, ["route_id", "service_id", "trip_id"])
    dump(
        "stop_times.txt",
        stop_times,
        ["trip_id", "arrival_time", "departure_time", "stop_id", "stop_sequence"],
    )
    dump("stops.txt", stops, ["stop_id", "stop_name", "stop_lat", "stop_lon"])
    if calendar is not None:
        dump(
            "calendar.txt",
            calendar,
            [
                "service_id",
                "monday",
                "tuesday",
                "wednesday",
                "thursday",
                "friday",
                "saturday",
                "sunday",
                "start_date",
                "end_date",
            ],
        )
    if calendar_dates is not None:
        dump("calendar_dates.txt", calendar_dates, ["service_id", "date", "exception_type"])
    return feed_dir


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240817)
