"""Matplotlib rendering of the report figures written next to the CSV output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .metrics import EfficiencyReport, FleetReport

_EFF_COMPONENTS = [
    ("service_s", "service"),
    ("deadhead_s", "deadhead"),
    ("intertrip_layover_s", "intertrip layover"),
    ("day_depot_layover_s", "day depot layover"),
    ("overnight_depot_layover_s", "overnight depot layover"),
]


def save_fleet_figure(path: str | Path, fleet: FleetReport, title: str = "Fleet composition") -> None:
    fig, ax = plt.subplots(figsize=(5.0, 3.2))
    ax.bar(["scenario"], [fleet.ev_share * 100.0], label="EV", color="#2a9d8f")
    ax.bar(["scenario"], [fleet.dv_share * 100.0], bottom=[fleet.ev_share * 100.0], label="DV", color="#8d99ae")
    ax.set_ylabel("fleet share (%)")
    ax.set_ylim(0, 100)
    ax2 = ax.twinx()
    ax2.plot(["scenario"], [fleet.total], "ko", label="total buses")
    ax2.set_ylabel("buses")
    ax.set_title(f"{title}: {fleet.n_ev} EV / {fleet.n_dv} DV")
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_efficiency_figure(path: str | Path, report: EfficiencyReport, title: str = "Schedule time breakdown") -> None:
    data = report.as_dict()
    total = sum(data[key] for key, _ in _EFF_COMPONENTS)
    fig, ax = plt.subplots(figsize=(6.0, 2.8))
    left = 0.0
    for key, label in _EFF_COMPONENTS:
        share = 100.0 * data[key] / total if total else 0.0
        ax.barh(["horizon"], [share], left=[left], label=label)
        left += share
    ax.set_xlabel("share of fleet time (%)")
    ax.set_xlim(0, 100)
    ax.set_title(f"{title} (schedule efficiency {report.schedule_eff:.1%})")
    ax.legend(loc="upper center", bbox_to_anchor=(0.5, -0.35), ncol=3, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_bench_figures(gaps_path: str | Path, times_path: str | Path, summary: list[dict]) -> None:
    sizes = [row["n_trips"] for row in summary]

    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot(sizes, [row["greedy_gap"] for row in summary], "o-", label="greedy gap")
    ax.plot(sizes, [row["dac_gap"] for row in summary], "s-", label="divide & conquer gap")
    ax.plot(sizes, [row["avg_mip_gap"] for row in summary], "^-", label="exact MIP gap")
    ax.axhline(0.0, color="gray", lw=0.8)
    ax.set_xlabel("trips sampled")
    ax.set_ylabel("gap vs. exact incumbent (%)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(gaps_path, dpi=150)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot(sizes, [row["t_exact"] for row in summary], "^-", label="exact")
    ax.plot(sizes, [row["t_dac"] for row in summary], "s-", label="divide & conquer")
    ax.plot(sizes, [row["t_greedy"] for row in summary], "o-", label="greedy")
    ax.set_xlabel("trips sampled")
    ax.set_ylabel("mean solve time (s)")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(times_path, dpi=150)
    plt.close(fig)
