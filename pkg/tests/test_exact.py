import dataclasses
import random

import pytest

from conftest import make_block, random_bcp_instance
from oracles import bcp_brute_force
from evsched.bcp import EnergyParams, build_instance, chain_objective, validate
from evsched.errors import InfeasibleError, SizeLimitError
from evsched.exact import solve_exact
from evsched.greedy import solve_greedy


def test_empty_instance():
    inst = build_instance([], EnergyParams.standard())
    sol = solve_exact(inst)
    assert sol.runs == [] and sol.objective == 0.0 and sol.optimal


def test_single_block_costs_one_vehicle():
    inst = build_instance([make_block(0, 30000, 3000)], EnergyParams.standard())
    sol = solve_exact(inst, assume_full_initial=True)
    assert sol.runs == [[0]]
    assert sol.objective == 50000.0
    assert sol.next_day == {0: 0}
    assert sol.optimal


def test_two_blocks_chain_when_vehicle_cost_dominates():
    blocks = [make_block(0, 20000, 3000), make_block(1, 24000, 3000)]  # gap 1000
    inst = build_instance(blocks, EnergyParams.standard())
    sol = solve_exact(inst, assume_full_initial=True)
    assert sol.runs == [[0, 1]]
    assert sol.objective == 50000.0 + 1000.0
    assert validate(inst, sol, assume_full_initial=True).feasible


def test_five_block_fixture_matches_brute_force():
    rng = random.Random(5)
    inst = random_bcp_instance(rng, 5)
    for full in (True, False):
        sol = solve_exact(inst, assume_full_initial=full)
        assert sol.objective == pytest.approx(bcp_brute_force(inst, full), abs=1e-6)
        assert validate(inst, sol, assume_full_initial=full).feasible


def test_variable_initial_never_costs_more_than_full():
    rng = random.Random(31)
    for _ in range(15):
        inst = random_bcp_instance(rng, rng.randrange(3, 8))
        full = solve_exact(inst, assume_full_initial=True).objective
        free = solve_exact(inst, assume_full_initial=False).objective
        assert free <= full + 1e-9


def test_day_rate_increase_never_hurts():
    rng = random.Random(13)
    blocks = [b for b in random_bcp_instance(rng, 7).blocks]
    base = EnergyParams.standard()
    objectives = []
    for rate in [0.6, 1.0, 2.045, 4.0]:
        params = dataclasses.replace(base, rate_day=rate)
        sol = solve_exact(build_instance(blocks, params), assume_full_initial=True)
        objectives.append(sol.objective)
    assert objectives == sorted(objectives, reverse=True)


def test_size_limit_enforced():
    rng = random.Random(3)
    inst = random_bcp_instance(rng, 21)
    with pytest.raises(SizeLimitError):
        solve_exact(inst)
    sol = solve_exact(inst, assume_full_initial=True, max_blocks=None, time_limit_s=30.0)
    assert validate(inst, sol, assume_full_initial=True).feasible


def test_infeasible_instance_names_a_block():
    # Spans nearly the whole horizon: the overnight window cannot refill it.
    block = make_block(4, 2000, 7000, idle=76000)
    inst = build_instance([block], EnergyParams.standard())
    with pytest.raises(InfeasibleError, match="block 4") as excinfo:
        solve_exact(inst, assume_full_initial=True)
    assert excinfo.value.block_id == 4


def test_warm_start_is_never_worse_and_still_proves_optimality():
    rng = random.Random(17)
    inst = random_bcp_instance(rng, 8)
    greedy = solve_greedy(inst)
    warm = solve_exact(inst, assume_full_initial=True, warm_start=greedy)
    cold = solve_exact(inst, assume_full_initial=True)
    assert warm.objective == pytest.approx(cold.objective, abs=1e-9)
    assert warm.optimal
    assert warm.objective <= greedy.objective + 1e-9


def test_time_limit_returns_incumbent_with_gap():
    rng = random.Random(23)
    inst = random_bcp_instance(rng, 16, alpha_hi=40000)
    greedy = solve_greedy(inst)
    sol = solve_exact(
        inst, time_limit_s=1e-4, assume_full_initial=True, max_blocks=None, warm_start=greedy
    )
    if not sol.optimal:
        assert sol.objective <= greedy.objective + 1e-9
        assert 0.0 <= sol.mip_gap <= 1.0


def test_solution_bookkeeping_is_internally_consistent():
    rng = random.Random(41)
    inst = random_bcp_instance(rng, 8)
    sol = solve_exact(inst, assume_full_initial=True)
    assert sol.objective == pytest.approx(chain_objective(inst, sol.runs), abs=1e-9)
    assert sorted(b for run in sol.runs for b in run) == sorted(inst.block_by_id)
    assert set(sol.next_day) == {run[-1] for run in sol.runs}
    assert set(sol.next_day.values()) == {run[0] for run in sol.runs}


def test_deterministic_output():
    rng = random.Random(59)
    inst = random_bcp_instance(rng, 9)
    a = solve_exact(inst, assume_full_initial=True)
    b = solve_exact(inst, assume_full_initial=True)
    assert a.runs == b.runs and a.next_day == b.next_day and a.objective == b.objective
