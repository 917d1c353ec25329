"""End-to-end simulation runs: mobility, snapshots, selection, maintenance,
reachability sampling, and query workloads on the resulting state."""

from __future__ import annotations

import random

from . import contacts as ct
from . import query as qr
from .neighborhood import compute_all
from .scenario import ConnectivityGraph, ScenarioConfig, advance_mobility, place_nodes
from .simcore import CATEGORIES, MetricsLedger, Network, Simulator


class SimulationRun:
    """One seeded run of the contact protocol over a mobile scenario.

    The schedule per second of simulated time: move nodes and rebuild the
    snapshot, run a maintenance round when one is due, then sample analytic
    reachability. Contact selection for every node happens once at t=0,
    replenishment happens at the end of each node's maintenance round.
    """

    def __init__(
        self,
        config: ScenarioConfig,
        method: str = "em",
        reach_sampling: str = "all",
        run_id: str | None = None,
    ) -> None:
        config.validate()
        if method not in ct.METHODS:
            raise ValueError(f"unknown selection method: {method}")
        if reach_sampling not in ("all", "end", "none"):
            raise ValueError(f"unknown sampling mode: {reach_sampling}")
        self.config = config
        self.method = method
        self.reach_sampling = reach_sampling
        self.run_id = run_id or f"run-{config.rng_seed}"
        self.sim = Simulator()
        self.ledger = MetricsLedger()
        self.net = Network(self.sim, self.ledger)
        self._rng_place = random.Random(ct.derive_seed(config.rng_seed, "place"))
        self._rng_move = random.Random(ct.derive_seed(config.rng_seed, "move"))
        self.positions = None
        self.graph: ConnectivityGraph | None = None
        self.tables = None
        self.contacts_map: list[list[ct.ContactEntry]] = [
            [] for _ in range(config.node_count)
        ]
        self.census_rows: list[tuple] = []
        self.timeseries_rows: list[tuple[float, str, int]] = []
        self.reach_samples: dict[int, list[float]] = {
            node: [] for node in range(config.node_count)
        }
        self.sample_times: list[float] = []
        self._round = 0
        self._ran = False

    # -- schedule pieces -----------------------------------------------------

    def _snapshot(self, move_dt: float) -> None:
        if self.positions is None:
            self.positions = place_nodes(self.config, self._rng_place)
        elif move_dt > 0:
            advance_mobility(self.positions, self.config, move_dt, self._rng_move)
        self.graph = ConnectivityGraph.from_positions(
            self.positions, self.config.tx_range, epoch=self.sim.now
        )
        self.tables = compute_all(self.graph, self.config.neighborhood_radius, self.sim.now)
        self.net.set_graph(self.graph)

    def _select_all(self) -> None:
        now = self.sim.now
        for node in range(self.config.node_count):
            picked = ct.select_contacts(
                self.net,
                self.tables,
                node,
                self.contacts_map[node],
                self.method,
                self.config,
                self.config.rng_seed,
                self._round,
                now,
            )
            self.contacts_map[node].extend(picked)
            for entry in picked:
                self.census_rows.append(
                    (now, node, entry.contact, entry.path_hops(), "selected")
                )

    def _maintenance_round(self) -> None:
        self._round += 1
        now = self.sim.now
        for node in range(self.config.node_count):
            kept, rows = ct.validate_contacts(
                self.net, self.tables, node, self.contacts_map[node], self.config, now
            )
            self.contacts_map[node] = kept
            self.census_rows.extend(rows)
            picked = ct.select_contacts(
                self.net,
                self.tables,
                node,
                kept,
                self.method,
                self.config,
                self.config.rng_seed,
                self._round,
                now,
            )
            self.contacts_map[node].extend(picked)
            for entry in picked:
                self.census_rows.append(
                    (now, node, entry.contact, entry.path_hops(), "selected")
                )

    def _record_totals(self) -> None:
        for category in CATEGORIES:
            self.timeseries_rows.append(
                (self.sim.now, category, self.ledger.total(category))
            )

    def _sample_reachability(self) -> None:
        self.sample_times.append(self.sim.now)
        for node in range(self.config.node_count):
            frac = qr.analytic_reachability(
                self.tables,
                self.contacts_map,
                node,
                self.config.max_depth,
                self.config.node_count,
            )
            self.reach_samples[node].append(frac)

    # -- public API ----------------------------------------------------------

    def run(self) -> "SimulationRun":
        if self._ran:
            return self
        cfg = self.config
        ticks = int(round(cfg.sim_duration / cfg.snapshot_interval))
        validation_every = max(1, int(round(cfg.validation_period / cfg.snapshot_interval)))
        sample_all = self.reach_sampling == "all"
        for k in range(ticks + 1):
            t = k * cfg.snapshot_interval
            move = cfg.snapshot_interval if k else 0.0
            self.sim.schedule(t, lambda dt=move: self._snapshot(dt))
            if k == 0:
                self.sim.schedule(t, self._select_all)
            elif k % validation_every == 0:
                self.sim.schedule(t, self._maintenance_round)
            if sample_all or (self.reach_sampling == "end" and k == ticks):
                self.sim.schedule(t, self._sample_reachability)
            self.sim.schedule(t, self._record_totals)
        self.sim.run_until(cfg.sim_duration)
        self._ran = True
        return self

    def reach_time_means(self) -> dict[int, float]:
        """Per-node reachability averaged over all sample instants."""
        out = {}
        for node, samples in self.reach_samples.items():
            out[node] = sum(samples) / len(samples) if samples else 0.0
        return out

    def reach_end(self) -> dict[int, float]:
        return {
            node: (samples[-1] if samples else 0.0)
            for node, samples in self.reach_samples.items()
        }

    def run_queries(
        self, pairs: list[tuple[int, int]], max_depth: int | None = None
    ) -> list[qr.QueryOutcome]:
        """Resolve a workload of (source, target) pairs against current state."""
        if not self._ran:
            raise RuntimeError("run() must complete before queries are issued")
        depth = max_depth if max_depth is not None else self.config.max_depth
        outcomes = []
        for index, (source, target) in enumerate(pairs):
            qid = ct.derive_seed(self.config.rng_seed, "query", index)
            outcomes.append(
                qr.resolve(
                    self.net, self.tables, self.contacts_map, source, target, depth, qid
                )
            )
        return outcomes


def sample_pairs(
    node_count: int, n_pairs: int, seed: int
) -> list[tuple[int, int]]:
    """Distinct random source/target pairs (source != target), reproducibly."""
    rng = random.Random(ct.derive_seed(seed, "pairs"))
    pairs = []
    for _ in range(n_pairs):
        source = rng.randrange(node_count)
        target = rng.randrange(node_count - 1)
        if target >= source:
            target += 1
        pairs.append((source, target))
    return pairs
