"""SVG line plots of the sweep CSV rows. Every plotted point is a CSV row; nothing is interpolated."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

plt.rcParams["svg.hashsalt"] = "multimarket"


def _save(fig, path):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _eq(r):
    return r["is_equilibrium"] is True or r["is_equilibrium"] == "true"


def plot_figure3(rows, path) -> dict[str, list]:
    """Per-market payoff against p; returns the plotted series keyed by legend label."""
    series = {}
    deltas = sorted({float(r["delta"]) for r in rows})
    for d in deltas:
        series[f"NTPD, delta={d:g}"] = [(float(r["p"]), float(r["per_market_payoff"])) for r in rows
                                        if r["strategy"] == "NTPD" and float(r["delta"]) == d and _eq(r)]
    if deltas:
        # the EV curve does not move with delta, so one copy is drawn
        series[f"EV, delta={deltas[0]:g}"] = [(float(r["p"]), float(r["per_market_payoff"])) for r in rows
                                             if r["strategy"] == "EV" and float(r["delta"]) == deltas[0] and _eq(r)]
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, pts in series.items():
        if pts:
            style = "k--" if label.startswith("EV") else "-"
            ax.plot(*zip(*pts), style, marker=".", label=label)
    ax.set_xlabel("signal correctness p")
    ax.set_ylabel("average payoff per market")
    ax.legend()
    ax.grid(alpha=0.4)
    _save(fig, path)
    return series


def plot_figure4(rows, path) -> dict[str, list]:
    """Efficiency against p, one curve per (M, delta); returns the plotted series."""
    series = {}
    for M, d in sorted({(int(r["M"]), float(r["delta"])) for r in rows}):
        series[f"M={M}, delta={d:g}"] = [(float(r["p"]), float(r["efficiency"])) for r in rows
                                         if int(r["M"]) == M and float(r["delta"]) == d and _eq(r)]
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, pts in series.items():
        if pts:
            ax.plot(*zip(*pts), marker=".", label=label)
    ax.set_xlabel("signal correctness p")
    ax.set_ylabel("efficiency")
    ax.legend()
    ax.grid(alpha=0.4)
    _save(fig, path)
    return series
