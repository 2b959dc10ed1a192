"""Exact block chaining by depth-first branch and bound.

Blocks are processed in start-time order; each is either appended to an
existing run (paying the weighted depot layover) or opens a new run
(paying the vehicle cost). Charging between blocks is set greedily
maximal during propagation, which loses nothing because the objective
does not price energy: more charge only relaxes downstream feasibility.
Branches are explored cheapest-increment-first and pruned against the
incumbent with a per-block lower bound; completed assignments must also
admit a one-to-one overnight linkage between run ends and run starts
before they can become incumbents.

With ``assume_full_initial`` every run starts on a full battery and a run's
charge trajectory is a single number. Otherwise the initial charge of each
run is free, and a run's trajectory is tracked symbolically as
``min(ceiling, x + drift)`` of its unknown initial charge ``x``; every
propagation step preserves that shape, so run-internal feasibility and
the overnight linkage reduce to interval algebra on (ceiling, drift)
pairs.
"""

from __future__ import annotations

import time

from .bcp import BcpInstance, ChainSolution
from .errors import InfeasibleError, SizeLimitError, TimeLimitError
from .minflow import MinCostFlow

_EPS = 1e-9
_TIME_CHECK_MASK = 255


class _Timeout(Exception):
    pass


class _Solved(Exception):
    """Incumbent met the root relaxation bound; the search can stop."""


def _chaining_relaxation(n: int, arc_gap: list[list[float]], w_lay: float, w_cost: float) -> float:
    """Exact optimum of the charge-free chaining assignment (a lower bound).

    Every block takes one unit of flow; it arrives either along a day arc
    from a predecessor or through the depot at the vehicle cost, with the
    return-dispatch loop balancing run ends against run starts.
    """
    src, depot_ret, depot_dis = 0, 1, 2
    out0, in0 = 3, 3 + n
    sink = 3 + 2 * n
    g = MinCostFlow(4 + 2 * n)
    for i in range(n):
        g.add_arc(src, out0 + i, 1.0, 0.0)
    for j in range(n):
        g.add_arc(in0 + j, sink, 1.0, 0.0)
    for i in range(n):
        row = arc_gap[i]
        for j in range(n):
            if row[j] >= 0.0:
                g.add_arc(out0 + i, in0 + j, 1.0, w_lay * row[j])
    for i in range(n):
        g.add_arc(out0 + i, depot_ret, 1.0, 0.0)
    g.add_arc(depot_ret, depot_dis, float(n), 0.0)
    for j in range(n):
        g.add_arc(depot_dis, in0 + j, 1.0, w_cost)
    flow, cost = g.solve(src, sink, float(n))
    if flow != n:
        raise RuntimeError("internal error: chaining relaxation did not saturate")
    return cost


def _reemit(solution: ChainSolution, optimal: bool, mip_gap: float) -> ChainSolution:
    return ChainSolution(
        runs=[list(r) for r in solution.runs],
        day_charge=dict(solution.day_charge),
        soc_at_start=dict(solution.soc_at_start),
        soc_arc=dict(solution.soc_arc),
        next_day=dict(solution.next_day),
        objective=solution.objective,
        optimal=optimal,
        mip_gap=mip_gap,
    )


def _kuhn_match(n_left: int, candidates: list[list[int]]) -> list[int] | None:
    """Perfect bipartite matching; candidates[r] lists right nodes for left r."""
    match_right = [-1] * n_left
    match_left = [-1] * n_left

    def try_assign(r: int, seen: list[bool]) -> bool:
        for q in candidates[r]:
            if seen[q]:
                continue
            seen[q] = True
            if match_right[q] == -1 or try_assign(match_right[q], seen):
                match_right[q] = r
                match_left[r] = q
                return True
        return False

    for r in range(n_left):
        if not try_assign(r, [False] * n_left):
            return None
    return match_left


def solve_exact(
    instance: BcpInstance,
    time_limit_s: float | None = None,
    assume_full_initial: bool = False,
    max_blocks: int | None = 20,
    warm_start: ChainSolution | None = None,
) -> ChainSolution:
    """Minimize weighted depot layover plus vehicle cost over all operable chainings.

    Returns the incumbent with ``optimal=True`` when the search completes
    within the time limit; on timeout the best incumbent is returned with
    ``optimal=False`` and a conservative ``mip_gap``. ``warm_start`` seeds
    the incumbent (typically with a greedy solution) and never worsens the
    result. Raises ``SizeLimitError`` beyond ``max_blocks`` (pass ``None``
    to lift the limit), ``InfeasibleError`` when no operable chaining
    exists, and ``TimeLimitError`` when time runs out before any incumbent.
    """
    n = len(instance.blocks)
    if max_blocks is not None and n > max_blocks:
        raise SizeLimitError(
            f"{n} blocks exceeds the exact-solve limit of {max_blocks}; "
            "raise max_blocks or use the divide-and-conquer or greedy solver"
        )
    if n == 0:
        return ChainSolution([], {}, {}, {}, {}, 0.0, True)

    p = instance.params
    cap = p.battery_cap_s
    w_cost = p.vehicle_cost_s
    w_lay = p.layover_weight
    rate_day = p.rate_day
    rate_night = p.rate_night

    order = sorted(instance.blocks, key=lambda b: (b.start_time, b.id))
    _check_static_operability(instance, assume_full_initial)

    # Dense tables indexed by start-time position: gap values double as arc
    # flags (negative means no arc), night windows use None the same way.
    ids = [b.id for b in order]
    alpha = [b.start_time for b in order]
    beta = [b.end_time for b in order]
    cons = [b.consumption for b in order]
    lay_min = p.layover_min_s
    lay_max = p.layover_max_s
    arc_gap = [[-1.0] * n for _ in range(n)]
    night_win: list[list[float | None]] = [[None] * n for _ in range(n)]
    horizon = p.horizon_s
    for a in range(n):
        row = arc_gap[a]
        nrow = night_win[a]
        for b in range(n):
            if a != b:
                g = alpha[b] - beta[a]
                if g >= lay_min and (lay_max is None or g <= lay_max):
                    # Drop arcs no charge level can traverse: even a full
                    # battery leaving block a cannot cover block b.
                    if min(cap - cons[a] + g * rate_day, cap) >= cons[b] - _EPS:
                        row[b] = g
            w = horizon + alpha[b] - beta[a]
            if w >= lay_min and (lay_max is None or w <= lay_max):
                nrow[b] = w

    # Admissible per-block bound: each block costs at least its cheapest
    # incoming layover or a fresh vehicle.
    per_block = []
    for b in range(n):
        best = w_cost
        for a in range(n):
            if arc_gap[a][b] >= 0.0:
                best = min(best, w_lay * arc_gap[a][b])
        per_block.append(best)
    lb_tail = [0.0] * (n + 1)
    for t in range(n - 1, -1, -1):
        lb_tail[t] = lb_tail[t + 1] + per_block[t]

    # Vehicle bound: pairwise-overlapping suffix blocks can never share a
    # run, so a suffix whose largest overlap exceeds the currently open run
    # count forces that many extra vehicles. The upgrade tables turn the
    # forced count into cost: prefix sums of the cheapest replacements of a
    # block's append bound by the full vehicle cost.
    overlap_count = [0] * n
    overlap_suffix = [0] * (n + 1)
    for t in range(n - 1, -1, -1):
        at_t = 1
        for j in range(t + 1, n):
            if alpha[j] < beta[t]:
                overlap_count[j] += 1
            if alpha[j] <= alpha[t] < beta[j]:
                at_t += 1
        overlap_count[t] = at_t
        overlap_suffix[t] = max(overlap_suffix[t + 1], max(overlap_count[t:]))
    upgrade_prefix: list[list[float]] = []
    for t in range(n + 1):
        upgrades = sorted(w_cost - per_block[j] for j in range(t, n))
        sums = [0.0]
        for value in upgrades:
            sums.append(sums[-1] + value)
        upgrade_prefix.append(sums)

    def forced_vehicle_cost(t: int, open_runs: int) -> float:
        forced = overlap_suffix[t] - open_runs
        if forced <= 0:
            return 0.0
        sums = upgrade_prefix[t]
        return sums[min(forced, len(sums) - 1)]

    # Root relaxation: dropping every charge constraint leaves a pure
    # chaining assignment, solvable exactly by min-cost flow. No feasible
    # schedule can cost less, so an incumbent meeting it is proven optimal.
    root_bound = _chaining_relaxation(n, arc_gap, w_lay, w_cost)

    deadline = time.monotonic() + time_limit_s if time_limit_s is not None else None

    best_obj = warm_start.objective if warm_start is not None else float("inf")
    if warm_start is not None and best_obj <= root_bound + _EPS:
        return _reemit(warm_start, optimal=True, mip_gap=0.0)
    best_snapshot: dict | None = None
    nodes = 0
    frame_bounds: list[float] = []
    timeout_bound = float("inf")

    # Per-run state, parallel lists over dense indices. Full-initial mode
    # tracks the numeric charge at the start of the run's last block;
    # variable mode tracks the (drift, ceiling, min-initial) coefficients.
    r_first: list[int] = []
    r_last: list[int] = []
    r_blocks: list[list[int]] = []
    r_soc: list[list[float]] = []
    r_A: list[float] = []
    r_C: list[float] = []
    r_minx: list[float] = []

    def leaf(cost: float) -> None:
        nonlocal best_obj, best_snapshot
        k = len(r_first)
        if assume_full_initial:
            ends = [r_soc[q][-1] - cons[r_last[q]] for q in range(k)]
            need = cap - _EPS
            cands = []
            for r in range(k):
                first = r_first[r]
                ok = []
                for q in range(k):
                    w = night_win[r_last[q]][first]
                    if w is not None and ends[q] + w * rate_night >= need:
                        ok.append(q)
                cands.append(ok)
            match = _kuhn_match(k, cands)
            if match is None:
                return
            links = {ids[r_last[match[r]]]: ids[r_first[r]] for r in range(k)}
            socs = {ids[blk]: s for q in range(k) for blk, s in zip(r_blocks[q], r_soc[q])}
        else:
            outcome = _link_variable(cap, rate_night, night_win, r_first, r_last, r_A, r_C, r_minx)
            if outcome is None:
                return
            assignment, init_x = outcome
            links = {ids[r_last[q]]: ids[r_first[assignment[q]]] for q in range(k)}
            socs = {}
            for q in range(k):
                b = init_x[q]
                run = r_blocks[q]
                for idx, blk in enumerate(run):
                    socs[ids[blk]] = b
                    b -= cons[blk]
                    if idx + 1 < len(run):
                        b = min(b + arc_gap[blk][run[idx + 1]] * rate_day, cap)
        best_obj = cost
        best_snapshot = {
            "runs": [[ids[blk] for blk in run] for run in r_blocks],
            "soc": socs,
            "links": links,
            "objective": cost,
        }
        if cost <= root_bound + _EPS:
            raise _Solved

    def dfs(t: int, cost: float) -> None:
        nonlocal nodes, timeout_bound
        nodes += 1
        if deadline is not None and (nodes & _TIME_CHECK_MASK) == 0 and time.monotonic() > deadline:
            timeout_bound = min(frame_bounds, default=float("inf"))
            raise _Timeout
        open_runs = len(r_first)
        if cost + lb_tail[t] + forced_vehicle_cost(t, open_runs) >= best_obj - _EPS:
            return
        if t == n:
            leaf(cost)
            return
        need = cons[t]
        options: list[tuple[float, int]] = []
        for ri in range(open_runs):
            gap = arc_gap[r_last[ri]][t]
            if gap < 0.0:
                continue
            if assume_full_initial:
                arrive = min(r_soc[ri][-1] - cons[r_last[ri]] + gap * rate_day, cap)
                if arrive < need - _EPS:
                    continue
            else:
                c2 = min(cap, r_C[ri] + gap * rate_day)
                a2 = r_A[ri] + gap * rate_day
                if c2 < need - _EPS or max(r_minx[ri], need - a2) > cap + _EPS:
                    continue
            options.append((w_lay * gap, ri))
        options.sort()
        options.append((w_cost, -1))

        frame_bounds.append(cost + lb_tail[t])
        try:
            for inc, ri in options:
                runs_after = open_runs if ri >= 0 else open_runs + 1
                if cost + inc + lb_tail[t + 1] + forced_vehicle_cost(t + 1, runs_after) >= best_obj - _EPS:
                    continue
                if ri >= 0:
                    gap = arc_gap[r_last[ri]][t]
                    undo_last = r_last[ri]
                    r_last[ri] = t
                    r_blocks[ri].append(t)
                    if assume_full_initial:
                        arrive = min(r_soc[ri][-1] - cons[undo_last] + gap * rate_day, cap)
                        r_soc[ri].append(arrive)
                    else:
                        undo_acm = (r_A[ri], r_C[ri], r_minx[ri])
                        c2 = min(cap, r_C[ri] + gap * rate_day)
                        a2 = r_A[ri] + gap * rate_day
                        r_minx[ri] = max(r_minx[ri], need - a2)
                        r_A[ri] = a2 - need
                        r_C[ri] = c2 - need
                    dfs(t + 1, cost + inc)
                    r_blocks[ri].pop()
                    r_last[ri] = undo_last
                    if assume_full_initial:
                        r_soc[ri].pop()
                    else:
                        r_A[ri], r_C[ri], r_minx[ri] = undo_acm
                else:
                    r_first.append(t)
                    r_last.append(t)
                    r_blocks.append([t])
                    if assume_full_initial:
                        r_soc.append([cap])
                        r_A.append(0.0)
                        r_C.append(0.0)
                        r_minx.append(0.0)
                    else:
                        r_soc.append([])
                        r_A.append(-need)
                        r_C.append(cap - need)
                        r_minx.append(need)
                    dfs(t + 1, cost + inc)
                    for lst in (r_first, r_last, r_blocks, r_soc, r_A, r_C, r_minx):
                        lst.pop()
        finally:
            frame_bounds.pop()

    timed_out = False
    try:
        dfs(0, 0.0)
    except _Timeout:
        timed_out = True
    except _Solved:
        pass

    if best_snapshot is None and warm_start is None:
        if timed_out:
            raise TimeLimitError("time limit expired before any feasible chaining was found")
        _raise_infeasible(instance, assume_full_initial)

    mip_gap = 0.0
    if timed_out and best_obj > 0:
        lower = max(root_bound, min(timeout_bound, best_obj))
        mip_gap = max(0.0, (best_obj - lower) / best_obj)

    if best_snapshot is None:
        # Warm start was already optimal-or-best; re-emit it with fresh flags.
        return _reemit(warm_start, optimal=not timed_out, mip_gap=mip_gap)
    return _decode(instance, best_snapshot, optimal=not timed_out, mip_gap=mip_gap)


def _decode(instance: BcpInstance, snapshot: dict, optimal: bool, mip_gap: float) -> ChainSolution:
    soc = snapshot["soc"]
    day_charge: dict[tuple[int, int], float] = {}
    soc_arc: dict[tuple, float] = {}
    for run in snapshot["runs"]:
        for i, j in zip(run, run[1:]):
            after = soc[i] - instance.block_by_id[i].consumption
            day_charge[(i, j)] = soc[j] - after
            soc_arc[(i, j)] = soc[j]
        last = run[-1]
        soc_arc[(last, "t")] = soc[last] - instance.block_by_id[last].consumption
    return ChainSolution(
        runs=snapshot["runs"],
        day_charge=day_charge,
        soc_at_start=dict(soc),
        soc_arc=soc_arc,
        next_day=snapshot["links"],
        objective=snapshot["objective"],
        optimal=optimal,
        mip_gap=mip_gap,
    )


def _link_variable(
    cap: float,
    rate_night: float,
    night_win: list[list[float | None]],
    r_first: list[int],
    r_last: list[int],
    r_A: list[float],
    r_C: list[float],
    r_minx: list[float],
) -> tuple[list[int], list[float]] | None:
    """Find overnight links and initial charges for variable-initial runs.

    Run q hands over ``min(edge_cap, x_q + edge_shift)`` to the run it
    feeds; that run's initial charge must not exceed the handover. Links
    form a permutation, so feasibility decomposes over its cycles: composing
    the edge maps around a cycle keeps the ``min(cap, x + shift)`` shape,
    and a cycle is satisfiable exactly when its composite drift is
    non-negative and the accumulated lower bounds fit under the composite
    ceiling. Cycles are enumerated depth-first with those checks as pruning;
    on success each cycle takes its greatest fixed point, which dominates
    any other choice.
    """
    k = len(r_first)
    inf = float("inf")

    edges: dict[tuple[int, int], tuple[float, float]] = {}
    for q in range(k):
        for r in range(k):
            win = night_win[r_last[q]][r_first[r]]
            if win is None:
                continue
            e_cap = min(cap, r_C[q] + win * rate_night)
            e_shift = r_A[q] + win * rate_night
            if min(e_cap, cap + e_shift) < r_minx[r] - _EPS:
                continue
            edges[(q, r)] = (e_cap, e_shift)

    assignment = [-1] * k
    init_x = [0.0] * k
    used = [False] * k

    def assign_cycle_values(cycle: list[int], x_start: float) -> None:
        x = x_start
        for pos, q in enumerate(cycle):
            init_x[q] = x
            nxt = cycle[(pos + 1) % len(cycle)]
            e_cap, e_shift = edges[(q, nxt)]
            x = min(e_cap, x + e_shift)

    def search(remaining: int) -> bool:
        if remaining == 0:
            return True
        start = used.index(False)
        used[start] = True

        def extend(cur: int, cycle: list[int], cum_cap: float, cum_shift: float, req: float) -> bool:
            close = edges.get((cur, start))
            if close is not None:
                e_cap, e_shift = close
                tot_cap = min(e_cap, cum_cap + e_shift)
                tot_shift = cum_shift + e_shift
                if tot_shift >= -_EPS and req <= min(cap, tot_cap) + _EPS:
                    for pos, q in enumerate(cycle):
                        assignment[q] = cycle[(pos + 1) % len(cycle)]
                    if search(remaining - len(cycle)):
                        assign_cycle_values(cycle, min(cap, tot_cap))
                        return True
                    for q in cycle:
                        assignment[q] = -1
            for nxt in range(k):
                if used[nxt]:
                    continue
                e = edges.get((cur, nxt))
                if e is None:
                    continue
                e_cap, e_shift = e
                c2 = min(e_cap, cum_cap + e_shift)
                s2 = cum_shift + e_shift
                if c2 < r_minx[nxt] - _EPS:
                    continue
                req2 = max(req, r_minx[nxt] - s2)
                if req2 > cap + _EPS:
                    continue
                used[nxt] = True
                if extend(nxt, cycle + [nxt], c2, s2, req2):
                    return True
                used[nxt] = False
            return False

        if extend(start, [start], inf, 0.0, r_minx[start]):
            return True
        used[start] = False
        return False

    if not search(k):
        return None
    return assignment, init_x


def _best_possible_handover(instance: BcpInstance, j: int, req: float) -> bool:
    """Can any run ending at some block reach ``req`` for block j overnight?"""
    p = instance.params
    cap = p.battery_cap_s
    for b in instance.blocks:
        if not instance.is_night_arc(b.id, j):
            continue
        best_end = cap - b.consumption
        if min(cap, best_end + instance.night_window(b.id, j) * p.rate_night) >= req - _EPS:
            return True
    return False


def _check_static_operability(instance: BcpInstance, assume_full_initial: bool) -> None:
    # Blocks with no incoming day arc must start a run in every chaining, so
    # they need at least one overnight window that can recover their initial
    # charge. Other blocks may sit mid-run and carry no such requirement.
    ids = sorted(instance.block_by_id)
    for b in sorted(instance.blocks, key=lambda x: x.id):
        if any(instance.is_day_arc(i, b.id) for i in ids if i != b.id):
            continue
        req = instance.params.battery_cap_s if assume_full_initial else b.consumption
        if not _best_possible_handover(instance, b.id, req):
            raise InfeasibleError(
                f"block {b.id} cannot be made next-day operable: no overnight "
                "window recovers enough charge for it to start a run",
                block_id=b.id,
            )


def _raise_infeasible(instance: BcpInstance, assume_full_initial: bool) -> None:
    # Individually unservable blocks were reported before the search; an
    # exhausted search past that point means the overnight one-to-one
    # linkage itself cannot be completed.
    _check_static_operability(instance, assume_full_initial)
    raise InfeasibleError("no chaining satisfies next-day operability")
