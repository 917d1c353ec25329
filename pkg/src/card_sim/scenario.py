"""Scenario configuration, node placement, mobility, and connectivity snapshots."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, fields, replace

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path


class ConfigError(ValueError):
    """Raised when a scenario configuration violates an invariant."""


@dataclass(frozen=True)
class ScenarioConfig:
    node_count: int = 500
    area_width: float = 710.0
    area_height: float = 710.0
    tx_range: float = 50.0
    neighborhood_radius: int = 3
    max_contact_distance: int = 20
    max_contacts: int = 5
    max_depth: int = 3
    speed_min: float = 1.0
    speed_max: float = 10.0
    pause_time: float = 2.0
    validation_period: float = 5.0
    sim_duration: float = 20.0
    snapshot_interval: float = 1.0
    rng_seed: int = 1

    def validate(self) -> None:
        if self.node_count < 1:
            raise ConfigError(f"node_count must be at least 1 (got {self.node_count})")
        if self.area_width <= 0 or self.area_height <= 0:
            raise ConfigError(
                f"area dimensions must be positive (got {self.area_width}x{self.area_height})"
            )
        if self.tx_range <= 0:
            raise ConfigError(f"tx_range must be positive (got {self.tx_range})")
        if self.neighborhood_radius < 1:
            raise ConfigError(
                f"neighborhood_radius must be at least 1 (got {self.neighborhood_radius})"
            )
        if self.max_contact_distance <= 2 * self.neighborhood_radius:
            raise ConfigError(
                "max_contact_distance must exceed twice neighborhood_radius "
                f"(r must exceed 2R; got r={self.max_contact_distance}, "
                f"R={self.neighborhood_radius})"
            )
        if self.max_contacts < 0:
            raise ConfigError(f"max_contacts must be non-negative (got {self.max_contacts})")
        if self.max_depth < 1:
            raise ConfigError(f"max_depth must be at least 1 (got {self.max_depth})")
        if self.speed_min < 0:
            raise ConfigError(f"speed_min must be non-negative (got {self.speed_min})")
        if self.speed_min > self.speed_max:
            raise ConfigError(
                f"speed_min must not exceed speed_max (got {self.speed_min} > {self.speed_max})"
            )
        if self.pause_time < 0:
            raise ConfigError(f"pause_time must be non-negative (got {self.pause_time})")
        for name in ("validation_period", "sim_duration", "snapshot_interval"):
            value = getattr(self, name)
            if value <= 0:
                raise ConfigError(f"{name} must be positive (got {value})")


_FIELD_TYPES = {f.name: f.type for f in fields(ScenarioConfig)}
_INT_FIELDS = {
    "node_count",
    "neighborhood_radius",
    "max_contact_distance",
    "max_contacts",
    "max_depth",
    "rng_seed",
}


def _coerce_field(key: str, value: str):
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown scenario key: {key}")
    try:
        return int(value) if key in _INT_FIELDS else float(value)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc


def _coerce_fields(values: dict) -> dict:
    return {key: _coerce_field(key, raw) for key, raw in values.items()}


def parse_scenario_text(text: str) -> dict:
    """Parse flat key=value scenario text into a field dict. Unknown keys are errors."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        try:
            values[key.strip()] = _coerce_field(key.strip(), value.strip())
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
    return values


def load_scenario_file(path: str, **overrides) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        values = parse_scenario_text(fh.read())
    values.update(overrides)
    config = ScenarioConfig(**values)
    config.validate()
    return config


# Bundled reference scenarios. Topology parameters vary per row; the protocol
# parameters are shared defaults, overridable per run.
_PRESET_TOPOLOGIES = {
    "table1-1": (250, 500.0, 500.0, 50.0),
    "table1-2": (250, 710.0, 710.0, 50.0),
    "table1-3": (250, 1000.0, 1000.0, 50.0),
    "table1-4": (500, 710.0, 710.0, 30.0),
    "table1-5": (500, 710.0, 710.0, 50.0),
    "table1-6": (500, 710.0, 710.0, 70.0),
    "table1-7": (1000, 710.0, 710.0, 50.0),
    "table1-8": (1000, 1000.0, 1000.0, 50.0),
}

PRESET_NAMES = tuple(_PRESET_TOPOLOGIES)


def get_preset(name: str) -> ScenarioConfig:
    try:
        node_count, width, height, tx = _PRESET_TOPOLOGIES[name]
    except KeyError:
        raise ConfigError(
            f"unknown preset: {name} (available: {', '.join(PRESET_NAMES)})"
        ) from None
    return ScenarioConfig(
        node_count=node_count, area_width=width, area_height=height, tx_range=tx
    )


@dataclass
class NodePosition:
    """Random-waypoint state for one node."""

    node: int
    x: float
    y: float
    target_x: float
    target_y: float
    speed: float
    pause_remaining: float = 0.0


def place_nodes(config: ScenarioConfig, rng: random.Random) -> list[NodePosition]:
    """Uniformly place nodes and draw their first waypoint leg."""
    positions = []
    for node in range(config.node_count):
        x = rng.uniform(0.0, config.area_width)
        y = rng.uniform(0.0, config.area_height)
        tx_, ty = rng.uniform(0.0, config.area_width), rng.uniform(0.0, config.area_height)
        speed = rng.uniform(config.speed_min, config.speed_max)
        positions.append(NodePosition(node, x, y, tx_, ty, speed))
    return positions


def advance_mobility(
    positions: list[NodePosition], config: ScenarioConfig, dt: float, rng: random.Random
) -> None:
    """Advance every node dt seconds under the random waypoint model, in place."""
    for pos in positions:
        remaining = dt
        while remaining > 1e-12:
            if pos.pause_remaining > 0.0:
                used = min(pos.pause_remaining, remaining)
                pos.pause_remaining -= used
                remaining -= used
                if pos.pause_remaining <= 0.0:
                    pos.target_x = rng.uniform(0.0, config.area_width)
                    pos.target_y = rng.uniform(0.0, config.area_height)
                    pos.speed = rng.uniform(config.speed_min, config.speed_max)
                continue
            if pos.speed <= 0.0:
                break
            dist = math.hypot(pos.target_x - pos.x, pos.target_y - pos.y)
            travel = pos.speed * remaining
            if travel < dist:
                frac = travel / dist
                pos.x += (pos.target_x - pos.x) * frac
                pos.y += (pos.target_y - pos.y) * frac
                remaining = 0.0
            else:
                pos.x, pos.y = pos.target_x, pos.target_y
                remaining -= dist / pos.speed
                pos.pause_remaining = config.pause_time
                if config.pause_time <= 0.0:
                    pos.target_x = rng.uniform(0.0, config.area_width)
                    pos.target_y = rng.uniform(0.0, config.area_height)
                    pos.speed = rng.uniform(config.speed_min, config.speed_max)


class ConnectivityGraph:
    """Immutable unit-disk connectivity snapshot over nodes 0..n-1."""

    __slots__ = ("node_count", "adjacency", "neighbor_sets", "epoch")

    def __init__(self, node_count: int, adjacency: list[tuple[int, ...]], epoch: float = 0.0):
        self.node_count = node_count
        self.adjacency = adjacency
        self.neighbor_sets = [frozenset(neigh) for neigh in adjacency]
        self.epoch = epoch

    @classmethod
    def from_positions(
        cls, positions: list[NodePosition], tx_range: float, epoch: float = 0.0
    ) -> "ConnectivityGraph":
        n = len(positions)
        cell = tx_range
        buckets: dict[tuple[int, int], list[int]] = {}
        for pos in positions:
            buckets.setdefault((int(pos.x // cell), int(pos.y // cell)), []).append(pos.node)
        limit = tx_range * tx_range
        neighbors: list[list[int]] = [[] for _ in range(n)]
        for pos in positions:
            cx, cy = int(pos.x // cell), int(pos.y // cell)
            for bx in (cx - 1, cx, cx + 1):
                for by in (cy - 1, cy, cy + 1):
                    for other in buckets.get((bx, by), ()):
                        if other <= pos.node:
                            continue
                        o = positions[other]
                        dx, dy = o.x - pos.x, o.y - pos.y
                        # Inclusive threshold: a pair exactly at tx_range is linked.
                        if dx * dx + dy * dy <= limit:
                            neighbors[pos.node].append(other)
                            neighbors[other].append(pos.node)
        return cls(n, [tuple(sorted(neigh)) for neigh in neighbors], epoch)

    @classmethod
    def from_edges(
        cls, node_count: int, edges: list[tuple[int, int]], epoch: float = 0.0
    ) -> "ConnectivityGraph":
        neighbors: list[set[int]] = [set() for _ in range(node_count)]
        for u, v in edges:
            if u == v:
                continue
            neighbors[u].add(v)
            neighbors[v].add(u)
        return cls(node_count, [tuple(sorted(neigh)) for neigh in neighbors], epoch)

    def has_link(self, u: int, v: int) -> bool:
        return v in self.neighbor_sets[u]

    def link_count(self) -> int:
        return sum(len(neigh) for neigh in self.adjacency) // 2


@dataclass(frozen=True)
class GraphStats:
    link_count: int
    avg_degree: float
    diameter: int
    avg_hops: float


def graph_stats(graph: ConnectivityGraph) -> GraphStats:
    """Link count and mean degree over all nodes; diameter and mean hop distance
    over the largest connected component (0 when that component is a single node)."""
    n = graph.node_count
    links = graph.link_count()
    avg_degree = (2.0 * links / n) if n else 0.0
    if n == 0 or links == 0:
        return GraphStats(links, avg_degree, 0, 0.0)

    rows, cols = [], []
    for u, neigh in enumerate(graph.adjacency):
        for v in neigh:
            rows.append(u)
            cols.append(v)
    matrix = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    count, labels = connected_components(matrix, directed=False)
    sizes = np.bincount(labels, minlength=count)
    largest = int(np.argmax(sizes))
    members = np.flatnonzero(labels == largest)
    if len(members) < 2:
        return GraphStats(links, avg_degree, 0, 0.0)

    sub = matrix[members][:, members]
    dist = shortest_path(sub, method="D", directed=False, unweighted=True)
    finite = dist[np.isfinite(dist)]
    off_diag = finite[finite > 0]
    return GraphStats(links, avg_degree, int(off_diag.max()), float(off_diag.mean()))


def derive(config: ScenarioConfig, **changes) -> ScenarioConfig:
    """Copy a config with field changes, revalidating the result."""
    updated = replace(config, **changes)
    updated.validate()
    return updated
