"""Trip ingestion: GTFS static feeds, plain trip CSVs, and depot assignment.

Coordinates are WGS84 degrees. All times are seconds from the start of the
service day. GTFS clock values past midnight (``25:10:00`` etc.) are kept
as written, so trip times may exceed 86400; callers that build a bounded
planning horizon are expected to filter such trips (see
:func:`filter_to_horizon`).
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from datetime import date as Date
from pathlib import Path

from .errors import IngestionError

log = logging.getLogger(__name__)

EARTH_RADIUS_M = 6_371_000.0
MILE_M = 1609.344
MPH_TO_MPS = MILE_M / 3600.0
DEFAULT_SPEED_MPS = 30.0 * MPH_TO_MPS

TRIP_CSV_HEADER = [
    "trip_id",
    "start_time_s",
    "end_time_s",
    "origin_lat",
    "origin_lon",
    "dest_lat",
    "dest_lon",
    "route_id",
]
DEPOT_CSV_HEADER = ["depot_id", "lat", "lon"]

_WEEKDAY_COLUMNS = ["monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"]


@dataclass(frozen=True)
class Stop:
    id: str
    lat: float
    lon: float

    def __post_init__(self):
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"stop {self.id!r}: latitude {self.lat} out of [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"stop {self.id!r}: longitude {self.lon} out of [-180, 180]")


@dataclass(frozen=True)
class Trip:
    """A timetabled revenue movement between two stops."""

    id: str
    origin: Stop
    destination: Stop
    start_time: float
    end_time: float
    route_id: str = ""

    def __post_init__(self):
        if self.end_time <= self.start_time:
            raise ValueError(f"trip {self.id!r}: end_time must exceed start_time")
        if self.start_time < 0:
            raise ValueError(f"trip {self.id!r}: negative start_time")

    @property
    def duration(self) -> float:
        return self.end_time - self.start_time


@dataclass(frozen=True)
class Depot:
    id: str
    location: Stop


@dataclass(frozen=True)
class TravelModel:
    """Deadhead travel-time model: Manhattan distance at a fixed average speed."""

    avg_speed: float = DEFAULT_SPEED_MPS  # meters per second
    metric: str = "manhattan-projected"

    def __post_init__(self):
        if self.avg_speed <= 0:
            raise ValueError("avg_speed must be positive")
        if self.metric != "manhattan-projected":
            raise ValueError(f"unsupported travel metric {self.metric!r}")


def manhattan_meters(a: Stop, b: Stop) -> float:
    """Manhattan distance under an equirectangular projection centered between a and b."""
    mean_lat = math.radians((a.lat + b.lat) / 2.0)
    dx = EARTH_RADIUS_M * math.radians(b.lon - a.lon) * math.cos(mean_lat)
    dy = EARTH_RADIUS_M * math.radians(b.lat - a.lat)
    return abs(dx) + abs(dy)


def deadhead_time(a: Stop, b: Stop, model: TravelModel = TravelModel()) -> float:
    """Estimated non-revenue drive time between two stops, in seconds.

    Symmetric in its stop arguments and zero when both stops coincide.
    """
    return manhattan_meters(a, b) / model.avg_speed


def _read_gtfs_table(feed_dir: Path, name: str, required: bool = True) -> list[dict[str, str]]:
    path = feed_dir / name
    if not path.exists():
        if required:
            raise IngestionError(f"missing required GTFS file: {name}")
        return []
    with path.open(newline="", encoding="utf-8-sig") as fh:
        return [{k.strip(): (v or "").strip() for k, v in row.items()} for row in csv.DictReader(fh)]


def _hms_to_seconds(text: str) -> int:
    parts = text.split(":")
    if len(parts) != 3:
        raise IngestionError(f"bad GTFS time value {text!r}")
    h, m, s = (int(p) for p in parts)
    return h * 3600 + m * 60 + s


def _active_services(feed_dir: Path, service_date: Date) -> set[str]:
    calendar = _read_gtfs_table(feed_dir, "calendar.txt", required=False)
    calendar_dates = _read_gtfs_table(feed_dir, "calendar_dates.txt", required=False)
    if not calendar and not calendar_dates:
        raise IngestionError("missing required GTFS file: calendar.txt (or calendar_dates.txt)")
    stamp = service_date.strftime("%Y%m%d")
    weekday = _WEEKDAY_COLUMNS[service_date.weekday()]
    active: set[str] = set()
    for row in calendar:
        if row.get(weekday) == "1" and row["start_date"] <= stamp <= row["end_date"]:
            active.add(row["service_id"])
    for row in calendar_dates:
        if row["date"] != stamp:
            continue
        if row["exception_type"] == "1":
            active.add(row["service_id"])
        elif row["exception_type"] == "2":
            active.discard(row["service_id"])
    return active


def parse_gtfs(feed_dir: str | Path, service_date: Date) -> list[Trip]:
    """Extract the trips active on ``service_date`` from a GTFS static feed.

    Each returned trip spans from the departure at its first stop to the
    arrival at its last stop. Trips with fewer than two usable stop times
    are skipped (a single warning reports the count). The result is sorted
    by trip id so identical feeds always produce identical lists.
    """
    feed_dir = Path(feed_dir)
    trips_tbl = _read_gtfs_table(feed_dir, "trips.txt")
    stop_times_tbl = _read_gtfs_table(feed_dir, "stop_times.txt")
    stops_tbl = _read_gtfs_table(feed_dir, "stops.txt")
    active = _active_services(feed_dir, service_date)

    stops: dict[str, Stop] = {}
    for row in stops_tbl:
        stops[row["stop_id"]] = Stop(row["stop_id"], float(row["stop_lat"]), float(row["stop_lon"]))

    by_trip: dict[str, list[dict[str, str]]] = {}
    for row in stop_times_tbl:
        by_trip.setdefault(row["trip_id"], []).append(row)

    trips: list[Trip] = []
    skipped = 0
    for row in sorted(trips_tbl, key=lambda r: r["trip_id"]):
        if row["service_id"] not in active:
            continue
        events = by_trip.get(row["trip_id"], [])
        events = [e for e in events if e.get("departure_time") or e.get("arrival_time")]
        if len(events) < 2:
            skipped += 1
            continue
        events.sort(key=lambda e: int(e["stop_sequence"]))
        first, last = events[0], events[-1]
        origin_id, dest_id = first["stop_id"], last["stop_id"]
        if origin_id not in stops or dest_id not in stops:
            raise IngestionError(f"trip {row['trip_id']!r} references an unknown stop")
        start = _hms_to_seconds(first.get("departure_time") or first["arrival_time"])
        end = _hms_to_seconds(last.get("arrival_time") or last["departure_time"])
        if end <= start:
            skipped += 1
            continue
        trips.append(
            Trip(
                id=row["trip_id"],
                origin=stops[origin_id],
                destination=stops[dest_id],
                start_time=start,
                end_time=end,
                route_id=row.get("route_id", ""),
            )
        )
    if skipped:
        log.warning("skipped %d trips with fewer than two usable stop times", skipped)
    return trips


def filter_to_horizon(trips: list[Trip], horizon_s: float) -> list[Trip]:
    """Drop trips starting at or after the planning horizon, with a warning."""
    kept = [t for t in trips if t.start_time < horizon_s]
    if len(kept) != len(trips):
        log.warning("excluded %d trips starting at or after the %.0f s horizon", len(trips) - len(kept), horizon_s)
    return kept


def assign_trips_to_depot(
    trips: list[Trip],
    depots: list[Depot],
    mapping: dict[str, str] | None = None,
) -> dict[str, list[Trip]]:
    """Partition trips among depots.

    Route ids present in ``mapping`` send their trips to the mapped depot;
    every other trip goes to the depot closest (Manhattan-projected) to the
    midpoint of its origin and destination. Distance ties break toward the
    lexicographically smallest depot id.
    """
    if not depots:
        raise ValueError("at least one depot is required")
    by_id = {d.id: d for d in sorted(depots, key=lambda d: d.id)}
    if mapping:
        unknown = sorted(set(mapping.values()) - set(by_id))
        if unknown:
            raise IngestionError(f"route mapping references unknown depot ids: {', '.join(unknown)}")
    out: dict[str, list[Trip]] = {depot_id: [] for depot_id in by_id}
    for trip in trips:
        if mapping and trip.route_id in mapping:
            out[mapping[trip.route_id]].append(trip)
            continue
        mid = Stop(
            id=f"mid:{trip.id}",
            lat=(trip.origin.lat + trip.destination.lat) / 2.0,
            lon=(trip.origin.lon + trip.destination.lon) / 2.0,
        )
        best = min(by_id.values(), key=lambda d: (manhattan_meters(mid, d.location), d.id))
        out[best.id].append(trip)
    return out


def load_trips_csv(path: str | Path) -> list[Trip]:
    """Read trips from the plain CSV format (times are integer seconds)."""
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"missing trip file: {path}")
    trips = []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != TRIP_CSV_HEADER:
            raise IngestionError(f"{path.name}: expected header {','.join(TRIP_CSV_HEADER)}")
        for row in reader:
            start = int(row["start_time_s"])
            end = int(row["end_time_s"])
            if start < 0 or end < 0:
                raise IngestionError(f"{path.name}: negative time on trip {row['trip_id']!r}")
            trips.append(
                Trip(
                    id=row["trip_id"],
                    origin=Stop(f"{row['trip_id']}:o", float(row["origin_lat"]), float(row["origin_lon"])),
                    destination=Stop(f"{row['trip_id']}:d", float(row["dest_lat"]), float(row["dest_lon"])),
                    start_time=start,
                    end_time=end,
                    route_id=row["route_id"],
                )
            )
    return trips


def write_trips_csv(path: str | Path, trips: list[Trip]) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRIP_CSV_HEADER)
        for t in trips:
            writer.writerow(
                [
                    t.id,
                    int(round(t.start_time)),
                    int(round(t.end_time)),
                    t.origin.lat,
                    t.origin.lon,
                    t.destination.lat,
                    t.destination.lon,
                    t.route_id,
                ]
            )


def load_depots_csv(path: str | Path) -> list[Depot]:
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"missing depot file: {path}")
    depots = []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != DEPOT_CSV_HEADER:
            raise IngestionError(f"{path.name}: expected header {','.join(DEPOT_CSV_HEADER)}")
        for row in reader:
            depot_id = row["depot_id"]
            depots.append(Depot(depot_id, Stop(f"depot:{depot_id}", float(row["lat"]), float(row["lon"]))))
    if not depots:
        raise IngestionError(f"{path.name}: no depots defined")
    return depots


def load_route_map_csv(path: str | Path) -> dict[str, str]:
    """Read an optional route_id,depot_id mapping used during depot assignment."""
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"missing route map file: {path}")
    mapping: dict[str, str] = {}
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["route_id", "depot_id"]:
            raise IngestionError(f"{path.name}: expected header route_id,depot_id")
        for row in reader:
            mapping[row["route_id"]] = row["depot_id"]
    return mapping
