"""Acceptance suite: one test per release criterion, one verdict line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the verdict lines
as they pass; artifacts (gap tables) land under ``build/acceptance/``.
"""

import csv
import random
import time
from pathlib import Path

import pytest

from conftest import random_bcp_instance, random_blocks, random_sdvsp_instance
from oracles import bcp_brute_force, sdvsp_brute_force
from evsched.bcp import EnergyParams, build_instance, replay_next_day, validate
from evsched.dac import solve_dac
from evsched.exact import solve_exact
from evsched.greedy import gap_percent, solve_greedy
from evsched.kl import BlockGraph, kl_bisect, partition_instance
from evsched.metrics import miles_to_seconds, replacement_ratio, schedule_efficiency
from evsched.sdvsp import sdvsp_objective, solve_sdvsp

ARTIFACT_DIR = Path(__file__).resolve().parent.parent / "build" / "acceptance"


def _verdict(number: int, text: str) -> None:
    print(f"ACCEPTANCE {number} PASS: {text}")


def test_criterion_1_sdvsp_exactness():
    started = time.perf_counter()
    rng = random.Random(101)
    for _ in range(200):
        inst = random_sdvsp_instance(rng, rng.randrange(1, 9))
        blocks = solve_sdvsp(inst)
        assert sorted(t for b in blocks for t in b.trip_ids) == sorted(t.id for t in inst.trips)
        assert sdvsp_objective(inst, blocks) == sdvsp_brute_force(inst)
    elapsed = time.perf_counter() - started
    assert elapsed < 60.0, f"criterion 1 took {elapsed:.1f}s"
    _verdict(1, f"200 random trip-chaining instances match enumeration exactly in {elapsed:.1f}s")


def _bcp_exactness_cases():
    rng = random.Random(202)
    cases = []
    for k in range(100):
        inst = random_bcp_instance(rng, rng.randrange(3, 11))
        cases.append((inst, k % 2 == 0))
    return cases


def test_criterion_2_bcp_exactness():
    started = time.perf_counter()
    for inst, full in _bcp_exactness_cases():
        reference = bcp_brute_force(inst, full)
        sol = solve_exact(inst, assume_full_initial=full)
        assert sol.optimal
        assert abs(sol.objective - reference) <= 1e-6, (sol.objective, reference)
        assert validate(inst, sol, assume_full_initial=full).feasible
    elapsed = time.perf_counter() - started
    assert elapsed < 600.0, f"criterion 2 took {elapsed:.1f}s"
    _verdict(2, f"100 random block-chaining instances match brute force to 1e-6 in {elapsed:.1f}s")


def test_criterion_3_cross_model_check():
    from lp_fixtures import GOLDEN_DIR, N_FIXTURES, golden_name, lp_fixture
    from evsched.lpfile import write_lp_file

    for k in range(N_FIXTURES):
        inst, full = lp_fixture(k)
        fresh = ARTIFACT_DIR / "lp" / golden_name(k)
        fresh.parent.mkdir(parents=True, exist_ok=True)
        write_lp_file(inst, fresh, linearized=True, assume_full_initial=full)
        assert fresh.read_bytes() == (GOLDEN_DIR / golden_name(k)).read_bytes(), golden_name(k)
    try:
        from lp_solve import solve_lp_file
    except ImportError:
        _verdict(3, "20 golden LP files byte-validated; external solver missing, solve leg skipped")
        pytest.skip("no external MILP solver available")
    for k in range(N_FIXTURES):
        inst, full = lp_fixture(k)
        ours = solve_exact(inst, assume_full_initial=full).objective
        external = solve_lp_file(GOLDEN_DIR / golden_name(k))
        assert abs(external - ours) <= 1e-6, (k, external, ours)
    _verdict(3, "20 golden LP files byte-validated and externally solved to matching objectives")


def test_criterion_4_greedy_feasibility():
    rng = random.Random(404)
    plan = [(10, 500), (50, 300), (200, 150), (1000, 50)]
    total = 0
    for size, reps in plan:
        for _ in range(reps):
            inst = random_bcp_instance(rng, size)
            sol = solve_greedy(inst)
            report = validate(inst, sol, assume_full_initial=True)
            assert report.feasible, (size, report.violations[:3])
            total += 1
    assert total == 1000
    _verdict(4, "1000 random instances across sizes 10/50/200/1000: greedy always validates")


def test_criterion_5_greedy_vs_exact_ordering():
    for inst, _ in _bcp_exactness_cases():
        greedy = solve_greedy(inst)
        exact = solve_exact(inst, assume_full_initial=True)
        assert greedy.objective >= exact.objective - 1e-9

    rng = random.Random(505)
    gaps = []
    for _ in range(500):
        inst = random_bcp_instance(rng, 20)
        greedy = solve_greedy(inst)
        exact = solve_exact(
            inst, assume_full_initial=True, max_blocks=None, time_limit_s=5.0, warm_start=greedy
        )
        gaps.append(gap_percent(greedy.objective, exact.objective))
    mean_gap = sum(gaps) / len(gaps)
    assert all(g >= -1e-9 for g in gaps)
    assert mean_gap == mean_gap and mean_gap != float("inf")  # finite
    assert mean_gap >= 0.0
    ARTIFACT_DIR.mkdir(parents=True, exist_ok=True)
    with (ARTIFACT_DIR / "greedy_gap_20_blocks.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["instance", "greedy_gap_percent"])
        writer.writerows((k, g) for k, g in enumerate(gaps))
        writer.writerow(["mean", mean_gap])
    _verdict(
        5,
        f"greedy never beats exact on 100 small fixtures; mean gap over 500 20-block instances "
        f"= {mean_gap:.2f}% (artifact written)",
    )


def test_criterion_6_dac_properties():
    rng = random.Random(606)
    # (a) Degenerate cap reproduces the exact result bit for bit.
    for _ in range(20):
        inst = random_bcp_instance(rng, rng.randrange(2, 10))
        dac = solve_dac(inst, subproblem_cap=len(inst.blocks))
        exact = solve_exact(inst, assume_full_initial=True)
        assert dac == exact
        assert dac.to_json_dict() == exact.to_json_dict()
    # (b) Merged sub-solutions always validate on the master instance.
    for k in range(500):
        inst = random_bcp_instance(rng, rng.randrange(8, 25))
        dac = solve_dac(inst, subproblem_cap=rng.choice([4, 6, 8]), seed=k)
        assert validate(inst, dac, assume_full_initial=True).feasible
    # (c) Partitioning never beats the exact optimum.
    for _ in range(150):
        inst = random_bcp_instance(rng, rng.randrange(6, 17))
        exact = solve_exact(inst, assume_full_initial=True, max_blocks=None, time_limit_s=10.0)
        if not exact.optimal:
            continue
        dac = solve_dac(inst, subproblem_cap=5)
        assert dac.objective >= exact.objective - 1e-9
    # (d) The level formula yields exactly eight parts at 100 blocks, cap 20.
    inst = random_bcp_instance(rng, 100)
    assert len(partition_instance(inst, 20)) == 8
    _verdict(6, "degenerate identity, 500 merge validations, monotone objectives, 8-way split")


def test_criterion_7_parameter_derivations():
    params = EnergyParams.from_power(power_day_kw=450.0, power_night_kw=125.0, consumption_rate_kw=220.0)
    assert abs(params.rate_day - 2.0455) <= 1e-3
    assert abs(params.rate_night - 0.5682) <= 1e-3
    assert params.battery_kwh == 440.0
    assert miles_to_seconds(60.0) == params.battery_cap_s == 7200.0
    _verdict(7, "charge rates 450/220 and 125/220, 440 kWh pack, 60 mi = 7200 s")


def _solution_sample(seed: int, count: int):
    rng = random.Random(seed)
    for k in range(count):
        choice = k % 3
        if choice == 0:
            inst = random_bcp_instance(rng, rng.randrange(3, 11))
            sol = solve_exact(inst, assume_full_initial=(k % 2 == 0))
        elif choice == 1:
            inst = random_bcp_instance(rng, rng.randrange(3, 80))
            sol = solve_greedy(inst)
        else:
            inst = random_bcp_instance(rng, rng.randrange(8, 30))
            sol = solve_dac(inst, subproblem_cap=6, seed=k)
        yield inst, sol


def test_criterion_8_next_day_replay():
    checked = 0
    for inst, sol in _solution_sample(808, 300):
        assert replay_next_day(inst, sol) == []
        checked += 1
    assert checked == 300
    _verdict(8, "300 solver outputs replay a second horizon with no charge shortfalls")


def test_criterion_9_metrics_closure():
    for inst, sol in _solution_sample(909, 100):
        report = schedule_efficiency(sol, inst)
        total = (
            report.service_s
            + report.deadhead_s
            + report.intertrip_layover_s
            + report.day_depot_layover_s
            + report.overnight_depot_layover_s
        )
        assert abs(total - len(sol.runs) * inst.params.horizon_s) <= 1e-6
    assert replacement_ratio(16, 0, 10) == pytest.approx(1.6)
    _verdict(9, "time accounting closes to 1e-6 on 100 solutions; 16 EV per 10 DV gives 1.6")


def test_criterion_10_performance_guard():
    rng = random.Random(1010)
    blocks = random_blocks(rng, 10000)
    inst = build_instance(blocks, EnergyParams.standard())
    started = time.perf_counter()
    sol = solve_greedy(inst)
    greedy_elapsed = time.perf_counter() - started
    assert sorted(b for run in sol.runs for b in run) == sorted(inst.block_by_id)
    assert greedy_elapsed < 60.0, f"greedy took {greedy_elapsed:.1f}s"

    edges = set()
    while len(edges) < 50000:
        a, b = rng.randrange(10000), rng.randrange(10000)
        if a != b:
            edges.add((min(a, b), max(a, b)))
    graph = BlockGraph(tuple(range(10000)), tuple(sorted(edges)))
    started = time.perf_counter()
    part_a, part_b, _ = kl_bisect(graph, seed=0)
    kl_elapsed = time.perf_counter() - started
    assert abs(len(part_a) - len(part_b)) <= 1
    assert kl_elapsed < 30.0, f"bisection took {kl_elapsed:.1f}s"
    _verdict(
        10,
        f"greedy chains 10000 blocks in {greedy_elapsed:.1f}s; "
        f"10000-vertex bisection in {kl_elapsed:.1f}s",
    )
