"""Delimited output and run manifests.

Every writer here pins its float formatting so that identical inputs produce
byte-identical files. Times are written with millisecond precision and
fractions with six decimal places.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from typing import Iterable, Mapping, Sequence

from . import __version__

TIME_FMT = "%.3f"
FRAC_FMT = "%.6f"


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return FRAC_FMT % value
    return str(value)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """Write rows with a fixed header; floats get the shared fixed format."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def write_metrics_csv(path: str, rows: Iterable[tuple]) -> str:
    """Rows of (time_s, node, category, count) from a metrics ledger."""
    formatted = (
        (TIME_FMT % t, node, category, count) for t, node, category, count in rows
    )
    return write_csv(path, ("time_s", "node", "category", "count"), formatted)


def write_census_csv(path: str, rows: Iterable[tuple]) -> str:
    """Rows of (time_s, source, contact, path_hops, status)."""
    formatted = (
        (TIME_FMT % t, src, contact, hops, status)
        for t, src, contact, hops, status in rows
    )
    return write_csv(
        path, ("time_s", "source", "contact", "path_hops", "status"), formatted
    )


def write_reachability_csv(path: str, means: Mapping[int, float]) -> str:
    rows = ((node, means[node]) for node in sorted(means))
    return write_csv(path, ("node", "reach_fraction"), rows)


def write_timeseries_csv(path: str, rows: Iterable[tuple]) -> str:
    """Rows of (time_s, category, cumulative_hops)."""
    formatted = ((TIME_FMT % t, category, total) for t, category, total in rows)
    return write_csv(path, ("time_s", "category", "cumulative_hops"), formatted)


def write_queries_csv(path: str, rows: Iterable[tuple]) -> str:
    """Rows of (query, source, target, success, depth_used, hops)."""
    return write_csv(
        path, ("query", "source", "target", "success", "depth_used", "hops"), rows
    )


def write_stats_csv(path: str, rows: Iterable[tuple]) -> str:
    """Rows of (seed, link_count, avg_degree, diameter, avg_path_hops)."""
    return write_csv(
        path, ("seed", "link_count", "avg_degree", "diameter", "avg_path_hops"), rows
    )


def write_tradeoff_csv(path: str, rows: Iterable[Mapping]) -> str:
    header = ("scheme", "param", "value", "reach_pct", "overhead_hops_per_node", "meets_half")
    formatted = (tuple(row[key] for key in header) for row in rows)
    return write_csv(path, header, formatted)


def write_failures_csv(path: str, rows: Iterable[tuple]) -> str:
    return write_csv(path, ("scheme", "value", "seed", "error"), rows)


COMPARE_HEADER = (
    "scheme",
    "queries",
    "connected_queries",
    "success_fraction",
    "success_fraction_connected",
    "query_tx_total",
    "query_tx_per_node",
    "query_tx_per_query",
    "sel_maint_tx_per_node",
    "total_tx_per_node",
)


def write_compare_csv(path: str, rows: Iterable[Mapping]) -> str:
    formatted = (tuple(row[key] for key in COMPARE_HEADER) for row in rows)
    return write_csv(path, COMPARE_HEADER, formatted)


def write_sweep_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    return write_csv(path, header, rows)


class RunManifest:
    """Reproducibility record for one CLI invocation, written to the output
    directory before any run starts.

    The invocation id is a digest of the resolved inputs rather than a
    timestamp, so re-running the same command yields the same manifest byte
    for byte, and the recorded config plus seeds are enough to regenerate
    every output file.
    """

    def __init__(
        self,
        command: str,
        config: Mapping,
        seeds: Sequence[int],
        out_dir: str,
        extras: Mapping | None = None,
    ) -> None:
        self.command = command
        self.config = dict(sorted(config.items()))
        self.seeds = list(seeds)
        self.out_dir = out_dir
        self.extras = dict(sorted((extras or {}).items()))

    def invocation_id(self) -> str:
        blob = json.dumps(
            {
                "command": self.command,
                "config": self.config,
                "seeds": self.seeds,
                "extras": self.extras,
            },
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def to_dict(self) -> dict:
        return {
            "invocation_id": self.invocation_id(),
            "tool_version": __version__,
            "command": self.command,
            "config": self.config,
            "seeds": self.seeds,
            "out_dir": self.out_dir,
            "extras": self.extras,
        }

    def write(self, path: str) -> str:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path
