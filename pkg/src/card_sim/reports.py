"""Figure rendering for run outputs.

The backend is forced to Agg so batch runs render headless. Every function
writes one PNG next to the CSV it visualizes and returns the path.
"""

from __future__ import annotations

import os
from collections import defaultdict
from statistics import mean

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

DPI = 120


def _save(fig, path: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path


def render_timeseries(rows, path: str) -> str:
    """Cumulative hop counts per ledger category over simulated time."""
    series: dict[str, tuple[list, list]] = defaultdict(lambda: ([], []))
    for t, category, total in rows:
        xs, ys = series[category]
        xs.append(t)
        ys.append(total)
    fig, ax = plt.subplots(figsize=(7, 4))
    for category in sorted(series):
        xs, ys = series[category]
        ax.plot(xs, ys, marker=".", label=category)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("cumulative hops")
    ax.set_title("Protocol traffic over time")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def render_reachability_hist(means, path: str) -> str:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(list(means.values()), bins=20, range=(0.0, 1.0), edgecolor="black")
    ax.set_xlabel("reachable fraction of network")
    ax.set_ylabel("nodes")
    ax.set_title("Per-node reachability")
    fig.tight_layout()
    return _save(fig, path)


def render_sweep_lines(rows, metric: str, path: str) -> str:
    """Seed-averaged metric against the swept value, one line per scheme."""
    acc: dict[str, dict] = defaultdict(lambda: defaultdict(list))
    param = ""
    for _, scheme, p, value, _, row_metric, metric_value in rows:
        if row_metric == metric:
            acc[scheme][value].append(metric_value)
            param = p
    fig, ax = plt.subplots(figsize=(6, 4))
    for scheme in sorted(acc):
        values = sorted(acc[scheme])
        ax.plot(
            values,
            [mean(acc[scheme][v]) for v in values],
            marker="o",
            label=scheme,
        )
    ax.set_xlabel(param)
    ax.set_ylabel(metric)
    ax.set_title(f"{metric} vs {param}")
    if acc:
        ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def render_tradeoff(points, path: str) -> str:
    """Reachability against selection-plus-maintenance cost, one labeled point
    per swept value, with the 50% reachability mark drawn in."""
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = [p["overhead_hops_per_node"] for p in points]
    ys = [p["reach_pct"] for p in points]
    ax.scatter(xs, ys)
    for point, x, y in zip(points, xs, ys):
        ax.annotate(
            str(point["value"]),
            (x, y),
            textcoords="offset points",
            xytext=(4, 4),
            fontsize=8,
        )
    ax.axhline(50.0, linestyle="--", linewidth=1)
    ax.set_xlabel("selection + maintenance hops per node")
    ax.set_ylabel("reachability (%)")
    ax.set_title("Reachability vs overhead")
    fig.tight_layout()
    return _save(fig, path)


def render_compare_bars(rows, path: str) -> str:
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    schemes = [row["scheme"] for row in rows]
    axes[0].bar(schemes, [row["query_tx_per_node"] for row in rows])
    axes[0].set_ylabel("query transmissions per node")
    axes[1].bar(schemes, [row["success_fraction"] for row in rows])
    axes[1].set_ylabel("success fraction")
    axes[1].set_ylim(0, 1.05)
    for ax in axes:
        ax.tick_params(axis="x", labelrotation=20)
    fig.suptitle("Scheme comparison on shared snapshots")
    fig.tight_layout()
    return _save(fig, path)


def render_stats_bars(rows, path: str) -> str:
    """Average node degree per seed with the cross-seed mean marked."""
    fig, ax = plt.subplots(figsize=(6, 4))
    seeds = [str(row[0]) for row in rows]
    degrees = [row[2] for row in rows]
    ax.bar(seeds, degrees)
    if degrees:
        ax.axhline(mean(degrees), linestyle="--", linewidth=1)
    ax.set_xlabel("seed")
    ax.set_ylabel("average node degree")
    ax.set_title("Topology degree by seed")
    fig.tight_layout()
    return _save(fig, path)
