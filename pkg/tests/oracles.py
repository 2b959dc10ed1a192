"""Independent brute-force oracles used to pin solver results.

Everything here recomputes feasibility and objectives from first
principles: structures are enumerated exhaustively, charge trajectories
are simulated numerically, and the next-day linkage is decided by subset
dynamic programming or permutation enumeration. None of the solver code
paths are reused.
"""

from __future__ import annotations

from evsched.bcp import BcpInstance
from evsched.sdvsp import SdvspInstance

TOL = 1e-9


# ---------------------------------------------------------------------------
# Trip chaining (assignment) oracle


def sdvsp_brute_force(instance: SdvspInstance) -> float:
    """Minimum chaining cost by exhaustive enumeration of chain structures."""
    n = len(instance.trips)
    if n == 0:
        return 0.0
    params = instance.params
    arc_cost = {
        (a.tail, a.head): a.deadhead + params.layover_weight * a.layover for a in instance.arcs
    }
    order = sorted(range(n), key=lambda i: (instance.trips[i].start_time, instance.trips[i].id))
    best = [float("inf")]
    lasts: list[int] = []

    def rec(t: int, cost: float) -> None:
        if cost >= best[0]:
            return
        if t == n:
            total = cost + sum(instance.depot_in[i] for i in lasts)
            best[0] = min(best[0], total)
            return
        j = order[t]
        for idx in range(len(lasts)):
            prev = lasts[idx]
            if (prev, j) in arc_cost:
                lasts[idx] = j
                rec(t + 1, cost + arc_cost[(prev, j)])
                lasts[idx] = prev
        lasts.append(j)
        rec(t + 1, cost + params.block_cost + instance.depot_out[j])
        lasts.pop()

    rec(0, 0.0)
    return best[0]


# ---------------------------------------------------------------------------
# Block chaining oracle


def enumerate_structures(instance: BcpInstance):
    """Yield every run partition whose consecutive pairs are day arcs."""
    order = sorted(instance.blocks, key=lambda b: (b.start_time, b.id))
    runs: list[list[int]] = []

    def rec(t: int):
        if t == len(order):
            yield [list(r) for r in runs]
            return
        j = order[t].id
        for run in runs:
            if instance.is_day_arc(run[-1], j):
                run.append(j)
                yield from rec(t + 1)
                run.pop()
        runs.append([j])
        yield from rec(t + 1)
        runs.pop()

    yield from rec(0)


def _structure_objective(instance: BcpInstance, runs: list[list[int]]) -> float:
    p = instance.params
    total = p.vehicle_cost_s * len(runs)
    for run in runs:
        for i, j in zip(run, run[1:]):
            total += p.layover_weight * (
                instance.block_by_id[j].start_time - instance.block_by_id[i].end_time
            )
    return total


def _simulate_run(instance: BcpInstance, run: list[int], start: float) -> tuple[list[float], float, bool]:
    """Charge at each block start and at the run's end, charging maximally.

    The third element reports whether the battery ceiling truncated any
    charge along the way (making the end level independent of the start).
    """
    cap = instance.params.battery_cap_s
    rate = instance.params.rate_day
    levels = []
    b = start
    ceiling_hit = False
    for idx, blk in enumerate(run):
        levels.append(b)
        b -= instance.block_by_id[blk].consumption
        if idx + 1 < len(run):
            gap = instance.day_gap(blk, run[idx + 1])
            if b + gap * rate >= cap:
                ceiling_hit = True
                b = cap
            else:
                b = b + gap * rate
    return levels, b, ceiling_hit


def _min_start(instance: BcpInstance, run: list[int]) -> float:
    """Smallest initial charge keeping every block of the run served.

    Charge at any block start can never exceed the battery cap, so a
    requirement beyond the cap anywhere makes the run infeasible outright
    (the preceding charge arc cannot push past the ceiling); that returns
    infinity rather than letting an earlier generous arc wash it out.
    """
    cap = instance.params.battery_cap_s
    rate = instance.params.rate_day
    req = instance.block_by_id[run[-1]].consumption
    for prev, nxt in zip(reversed(run[:-1]), reversed(run[1:])):
        if req > cap + TOL:
            return float("inf")
        gap = instance.day_gap(prev, nxt)
        cons = instance.block_by_id[prev].consumption
        req = max(cons, req + cons - gap * rate)
    return req


def _feasible_full(instance: BcpInstance, runs: list[list[int]]) -> bool:
    cap = instance.params.battery_cap_s
    rate_night = instance.params.rate_night
    ends = []
    for run in runs:
        levels, end, _ = _simulate_run(instance, run, cap)
        if any(lvl < instance.block_by_id[blk].consumption - TOL for blk, lvl in zip(run, levels)):
            return False
        ends.append(end)
    k = len(runs)
    cands = []
    for r in range(k):
        first = runs[r][0]
        ok = []
        for q in range(k):
            last = runs[q][-1]
            if not instance.is_night_arc(last, first):
                continue
            if min(cap, ends[q] + instance.night_window(last, first) * rate_night) >= cap - TOL:
                ok.append(q)
        cands.append(ok)
    # Perfect matching existence by subset DP over used run-ends.
    reachable = {0}
    for r in range(k):
        nxt = set()
        for mask in reachable:
            for q in cands[r]:
                bit = 1 << q
                if not mask & bit:
                    nxt.add(mask | bit)
        if not nxt:
            return False
        reachable = nxt
    return True


def _cycle_feasible(instance: BcpInstance, runs, cycle: list[int], minx: list[float]) -> bool:
    """Greatest-fixed-point check of one overnight cycle, numerically."""
    cap = instance.params.battery_cap_s
    rate_night = instance.params.rate_night

    def around(x: float) -> tuple[float, list[float], bool]:
        touched_cap = False
        starts = []
        for pos, q in enumerate(cycle):
            starts.append(x)
            _, end, ceiling_hit = _simulate_run(instance, runs[q], x)
            touched_cap = touched_cap or ceiling_hit
            nxt = cycle[(pos + 1) % len(cycle)]
            window = instance.night_window(runs[q][-1], runs[nxt][0])
            handover = end + window * rate_night
            if handover >= cap:
                touched_cap = True
                handover = cap
            x = handover
        return x, starts, touched_cap

    # Descend from a full battery. Every loop either stabilizes, binds some
    # ceiling (landing on one of finitely many constants), or is a pure
    # shift, in which case a still-decreasing value can never recover.
    n_cap_sites = len(cycle) + sum(len(runs[q]) for q in cycle)
    x = cap
    for _ in range(n_cap_sites + 4):
        x_new, starts, touched_cap = around(x)
        if x_new >= x:
            return all(s >= minx[q] - TOL for s, q in zip(starts, cycle))
        if not touched_cap:
            return False
        x = x_new
    raise AssertionError("overnight fixed point failed to settle")


def _feasible_variable(instance: BcpInstance, runs: list[list[int]]) -> bool:
    cap = instance.params.battery_cap_s
    rate_night = instance.params.rate_night
    k = len(runs)
    minx = [_min_start(instance, run) for run in runs]
    if any(m > cap + TOL for m in minx):
        return False
    best_end = [_simulate_run(instance, run, cap)[1] for run in runs]

    cands: list[list[int]] = []
    for r in range(k):
        first = runs[r][0]
        ok = []
        for q in range(k):
            last = runs[q][-1]
            if not instance.is_night_arc(last, first):
                continue
            optimistic = min(cap, best_end[q] + instance.night_window(last, first) * rate_night)
            if optimistic >= minx[r] - TOL:
                ok.append(q)
        cands.append(ok)

    pred = [-1] * k
    used = [False] * k

    def assign(r: int) -> bool:
        if r == k:
            seen = [False] * k
            for start in range(k):
                if seen[start]:
                    continue
                cycle = [start]
                seen[start] = True
                cur = pred[start]
                while cur != start:
                    cycle.append(cur)
                    seen[cur] = True
                    cur = pred[cur]
                cycle.reverse()  # follow feeding direction: pred -> run
                if not _cycle_feasible(instance, runs, cycle, minx):
                    return False
            return True
        for q in cands[r]:
            if not used[q]:
                used[q] = True
                pred[r] = q
                if assign(r + 1):
                    return True
                used[q] = False
                pred[r] = -1
        return False

    return assign(0)


def bcp_brute_force(instance: BcpInstance, assume_full_initial: bool) -> float:
    """Minimum chaining objective over all operable structures (inf if none)."""
    if not instance.blocks:
        return 0.0
    best = float("inf")
    check = _feasible_full if assume_full_initial else _feasible_variable
    for runs in enumerate_structures(instance):
        obj = _structure_objective(instance, runs)
        if obj >= best:
            continue
        if check(instance, runs):
            best = obj
    return best
