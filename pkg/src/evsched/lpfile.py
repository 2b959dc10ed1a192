"""Emit the block-chaining MILP in the industry-standard LP text format.

Row names carry stable family tags (c5 .. c23) so external solvers and
golden-file checks can address constraint groups: c5/c6 successor and
predecessor assignment, c7/c16-c18 charge recursion, c8 charge balance,
c9 charge bounds, c10 daytime charge caps, c11 no charging into the depot,
c12/c19-c22 overnight handover, c13 handover sufficiency, c14/c15 the
next-day bijection, and c23 full-battery starts. ``linearized=True``
writes the charge recursion and overnight handover as indicator-free
big-M rows (auxiliary binaries ``x`` and ``n``); otherwise the same
envelopes are written under c7/c12 names. The LP format has no native
min/max, so both modes share the mathematics and differ in naming only.

Depot-dispatch charge is additionally capped by the battery on active
dispatch arcs (family c10s). Without it the charge variable on an unused
dispatch arc is unbounded and can defeat its deactivation constant,
leaking phantom energy into mid-run charge balances.
"""

from __future__ import annotations

from pathlib import Path

from .bcp import BcpInstance

Term = tuple[float, str]
Row = tuple[str, list[Term], str, float]


def _fmt(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def _render_terms(terms: list[Term]) -> str:
    parts: list[str] = []
    for coef, var in terms:
        if not parts:
            parts.append(f"{_fmt(coef)} {var}" if coef >= 0 else f"- {_fmt(-coef)} {var}")
        elif coef >= 0:
            parts.append(f"+ {_fmt(coef)} {var}")
        else:
            parts.append(f"- {_fmt(-coef)} {var}")
    return " ".join(parts)


def write_lp_file(
    instance: BcpInstance,
    path: str | Path,
    linearized: bool = True,
    assume_full_initial: bool = False,
) -> None:
    """Write the full chaining model for ``instance`` to ``path``."""
    p = instance.params
    cap = p.battery_cap_s
    m1 = instance.big_m1
    m2 = instance.big_m2
    ids = sorted(instance.block_by_id)
    day = instance.day_arcs
    night = instance.night_arcs
    all_arcs: list[tuple[object, object]] = (
        list(day) + [("s", j) for j in ids] + [(i, "t") for i in ids]
    )

    binaries: list[str] = []
    free_vars: list[str] = []
    upper_bounds: list[tuple[str, float]] = []

    def y(i, j) -> str:
        return f"y_{i}_{j}"

    def u(i, j) -> str:
        return f"u_{i}_{j}"

    def v(i, j) -> str:
        return f"v_{i}_{j}"

    def vp(i, j) -> str:
        return f"vp_{i}_{j}"

    for i, j in all_arcs:
        binaries.append(y(i, j))
        if linearized:
            binaries.append(f"x_{i}_{j}")
    for i, j in night:
        binaries.append(f"z_{i}_{j}")
        free_vars.append(vp(i, j))
        if linearized:
            binaries.append(f"n_{i}_{j}")
    if ids:
        upper_bounds.append(("b_s", cap))

    objective: list[Term] = []
    for i, j in day:
        objective.append((p.layover_weight * instance.day_gap(i, j), y(i, j)))
    for j in ids:
        objective.append((p.vehicle_cost_s, y("s", j)))

    rows: list[Row] = []
    day_out: dict[int, list[int]] = {i: [] for i in ids}
    day_in: dict[int, list[int]] = {j: [] for j in ids}
    for i, j in day:
        day_out[i].append(j)
        day_in[j].append(i)

    for i in ids:
        terms = [(1.0, y(i, j)) for j in day_out[i]] + [(1.0, y(i, "t"))]
        rows.append((f"c5_{i}", terms, "=", 1.0))
    for j in ids:
        terms = [(1.0, y(i, j)) for i in day_in[j]] + [(1.0, y("s", j))]
        rows.append((f"c6_{j}", terms, "=", 1.0))

    for i, j in all_arcs:
        consumption = instance.block_by_id[i].consumption if i != "s" else 0.0
        b_i = f"b_{i}"
        lo = f"c16_{i}_{j}" if linearized else f"c7_max_lo_{i}_{j}"
        hi = f"c17_{i}_{j}" if linearized else f"c7_max_hi_{i}_{j}"
        zero = f"c18_{i}_{j}" if linearized else f"c7_max_cap_{i}_{j}"
        rows.append(
            (lo, [(1.0, v(i, j)), (-1.0, b_i), (-1.0, u(i, j)), (-m1, y(i, j))], ">=", -consumption - m1)
        )
        rows.append(
            (
                hi,
                [(1.0, v(i, j)), (-1.0, b_i), (-1.0, u(i, j)), (-m1, y(i, j)), (-m1, f"x_{i}_{j}")],
                "<=",
                -consumption - m1,
            )
        )
        rows.append((zero, [(1.0, v(i, j)), (m1, f"x_{i}_{j}")], "<=", m1))
        if not linearized:
            binaries.append(f"x_{i}_{j}")

    for j in ids:
        terms = [(1.0, f"b_{j}")] + [(-1.0, v(i, j)) for i in day_in[j]] + [(-1.0, v("s", j))]
        rows.append((f"c8_{j}", terms, "=", 0.0))

    for i in ids:
        rows.append((f"c9_lo_{i}", [(1.0, f"b_{i}")], ">=", instance.block_by_id[i].consumption))
        rows.append((f"c9_hi_{i}", [(1.0, f"b_{i}")], "<=", cap))

    for i, j in day:
        limit = instance.day_gap(i, j) * p.rate_day
        rows.append((f"c10_{i}_{j}", [(1.0, u(i, j)), (-limit, y(i, j))], "<=", 0.0))
    for j in ids:
        rows.append((f"c10s_{j}", [(1.0, u("s", j)), (-cap, y("s", j))], "<=", 0.0))

    for i in ids:
        rows.append((f"c11_{i}", [(1.0, u(i, "t"))], "=", 0.0))

    for i, j in night:
        win_gain = instance.night_window(i, j) * p.rate_night
        names = (
            (f"c19_{i}_{j}", f"c20_{i}_{j}", f"c21_{i}_{j}", f"c22_{i}_{j}")
            if linearized
            else (f"c12_min_cap_{i}_{j}", f"c12_min_win_{i}_{j}", f"c12_min_lo1_{i}_{j}", f"c12_min_lo2_{i}_{j}")
        )
        rows.append((names[0], [(1.0, vp(i, j))], "<=", cap))
        rows.append(
            (
                names[1],
                [(1.0, vp(i, j)), (-1.0, v(i, "t")), (-m1, y("s", j)), (-m1, y(i, "t"))],
                "<=",
                win_gain - 2.0 * m1,
            )
        )
        rows.append((names[2], [(1.0, vp(i, j)), (m2, f"n_{i}_{j}")], ">=", cap))
        rows.append(
            (
                names[3],
                [(1.0, vp(i, j)), (-1.0, v(i, "t")), (-m1, y("s", j)), (-m1, y(i, "t")), (-m1, f"n_{i}_{j}")],
                ">=",
                win_gain - 3.0 * m1,
            )
        )
        if not linearized:
            binaries.append(f"n_{i}_{j}")
        rows.append((f"c13_{i}_{j}", [(1.0, vp(i, j)), (-1.0, f"b_{j}"), (-m2, f"z_{i}_{j}")], ">=", -m2))

    night_in: dict[int, list[int]] = {j: [] for j in ids}
    night_out: dict[int, list[int]] = {i: [] for i in ids}
    for i, j in night:
        night_in[j].append(i)
        night_out[i].append(j)
    for j in ids:
        terms = [(1.0, f"z_{i}_{j}") for i in night_in[j]] + [(-1.0, y("s", j))]
        rows.append((f"c14_{j}", terms, "=", 0.0))
    for i in ids:
        terms = [(1.0, f"z_{i}_{j}") for j in night_out[i]] + [(-1.0, y(i, "t"))]
        rows.append((f"c15_{i}", terms, "=", 0.0))

    if assume_full_initial:
        for i in ids:
            rows.append((f"c23_{i}", [(1.0, v("s", i)), (-cap, y("s", i))], "=", 0.0))

    lines = ["Minimize"]
    lines.append(" obj: " + _render_terms(objective) if objective else " obj:")
    lines.append("Subject To")
    sense_map = {"=": "=", "<=": "<=", ">=": ">="}
    for name, terms, sense, rhs in rows:
        lines.append(f" {name}: {_render_terms(terms)} {sense_map[sense]} {_fmt(rhs)}")
    if free_vars or upper_bounds:
        lines.append("Bounds")
        for var, ub in upper_bounds:
            lines.append(f" 0 <= {var} <= {_fmt(ub)}")
        for var in free_vars:
            lines.append(f" {var} free")
    if binaries:
        lines.append("Binary")
        for var in binaries:
            lines.append(f" {var}")
    lines.append("End")
    Path(path).write_text("\n".join(lines) + "\n")
