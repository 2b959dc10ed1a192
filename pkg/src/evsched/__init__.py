"""Electric bus scheduling toolkit.

Two-stage pipeline: chain timetabled trips into depot-to-depot blocks
(exact assignment-based chaining), then chain blocks into daily vehicle
runs under battery, recharge, and next-day operability constraints, with
exact, greedy, and divide-and-conquer solvers plus metrics and a
benchmark harness.
"""

from .bcp import (
    BcpInstance,
    ChainSolution,
    EnergyParams,
    PartitionInfo,
    ValidationReport,
    Violation,
    build_instance,
    chain_objective,
    replay_next_day,
    validate,
)
from .dac import solve_dac
from .errors import InfeasibleError, IngestionError, InstanceError, SizeLimitError, TimeLimitError
from .exact import solve_exact
from .gtfs import (
    Depot,
    Stop,
    TravelModel,
    Trip,
    assign_trips_to_depot,
    deadhead_time,
    parse_gtfs,
)
from .greedy import greedy_gap, solve_greedy
from .kl import BlockGraph, block_graph, kl_bisect, partition_instance, target_levels
from .lpfile import write_lp_file
from .metrics import (
    EfficiencyReport,
    FleetReport,
    block_efficiency,
    miles_to_seconds,
    replacement_ratio,
    schedule_efficiency,
    split_by_range,
)
from .sdvsp import Block, SdvspInstance, SdvspParams, TripArc, build_arcs, solve_sdvsp, sweep_block_control

__version__ = "0.1.0"

__all__ = [
    "BcpInstance",
    "Block",
    "BlockGraph",
    "ChainSolution",
    "Depot",
    "EfficiencyReport",
    "EnergyParams",
    "FleetReport",
    "InfeasibleError",
    "IngestionError",
    "InstanceError",
    "PartitionInfo",
    "SdvspInstance",
    "SdvspParams",
    "SizeLimitError",
    "Stop",
    "TimeLimitError",
    "TravelModel",
    "Trip",
    "TripArc",
    "ValidationReport",
    "Violation",
    "assign_trips_to_depot",
    "block_efficiency",
    "block_graph",
    "build_arcs",
    "build_instance",
    "chain_objective",
    "deadhead_time",
    "greedy_gap",
    "kl_bisect",
    "miles_to_seconds",
    "parse_gtfs",
    "partition_instance",
    "replacement_ratio",
    "replay_next_day",
    "schedule_efficiency",
    "solve_dac",
    "solve_exact",
    "solve_greedy",
    "solve_sdvsp",
    "split_by_range",
    "sweep_block_control",
    "target_levels",
    "validate",
    "write_lp_file",
]
