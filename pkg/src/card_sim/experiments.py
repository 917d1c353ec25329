"""Parameter studies: batch sweeps over protocol knobs, reachability-vs-cost
summaries, and scheme comparisons on shared snapshots."""

from __future__ import annotations

import math
import random
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from statistics import mean, median

from . import baselines as bl
from . import contacts as ct
from .neighborhood import compute_all
from .runner import SimulationRun, sample_pairs
from .scenario import (
    ConfigError,
    ConnectivityGraph,
    ScenarioConfig,
    advance_mobility,
    derive,
    place_nodes,
)
from .simcore import MetricsLedger, Network, Simulator

SCHEMES = ("CARD-PM", "CARD-EM", "flood", "bordercast")
SWEEP_PARAMETERS = ("R", "r", "NoC", "D", "N")

# which acceptance rule each contact-selecting scheme runs
SCHEME_METHODS = {"CARD-PM": "pm2", "CARD-EM": "em"}

TIDY_HEADER = ("sweep_id", "scheme", "param", "value", "seed", "metric", "metric_value")


def derive_config(base: ScenarioConfig, parameter: str, value: int) -> ScenarioConfig:
    """Apply one swept-parameter value to a base scenario.

    Sweeping N rescales the arena to keep node density constant, so the
    swept runs stay comparable in degree and hop structure.
    """
    if parameter == "R":
        return derive(base, neighborhood_radius=int(value))
    if parameter == "r":
        return derive(base, max_contact_distance=int(value))
    if parameter == "NoC":
        return derive(base, max_contacts=int(value))
    if parameter == "D":
        return derive(base, max_depth=int(value))
    if parameter == "N":
        scale = math.sqrt(int(value) / base.node_count)
        return derive(
            base,
            node_count=int(value),
            area_width=base.area_width * scale,
            area_height=base.area_height * scale,
        )
    raise ConfigError(f"unknown sweep parameter: {parameter}")


@dataclass(frozen=True)
class SweepSpec:
    base: ScenarioConfig
    swept_parameter: str
    values: tuple
    seeds: tuple
    schemes: tuple = ("CARD-EM",)
    sweep_id: str = "sweep"
    queries_per_run: int = 50
    reach_sampling: str = "all"

    def validate(self) -> "SweepSpec":
        if self.swept_parameter not in SWEEP_PARAMETERS:
            raise ConfigError(
                f"swept parameter must be one of {SWEEP_PARAMETERS}; "
                f"got {self.swept_parameter!r}"
            )
        if not self.values:
            raise ConfigError("sweep values must be non-empty")
        if not self.seeds:
            raise ConfigError("sweep seeds must be non-empty")
        for scheme in self.schemes:
            if scheme not in SCHEMES:
                raise ConfigError(f"unknown scheme: {scheme!r}")
        if not self.schemes:
            raise ConfigError("sweep schemes must be non-empty")
        for value in self.values:
            derive_config(self.base, self.swept_parameter, value).validate()
        return self

    def cells(self) -> list[tuple[int, int, str]]:
        """All (value, seed, scheme) combinations in deterministic run order."""
        return [
            (value, seed, scheme)
            for value in self.values
            for seed in self.seeds
            for scheme in self.schemes
        ]


_SWEEP_KEYS = ("param", "values", "seeds", "schemes", "sweep_id", "queries")


def parse_sweep_text(text: str, base: ScenarioConfig) -> SweepSpec:
    """Parse a sweep file: key = value lines, # comments.

    Recognized keys: param, values, seeds, schemes, sweep_id, queries.
    Any other key is treated as a base-scenario override.
    """
    sweep: dict = {}
    overrides: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key in _SWEEP_KEYS:
            sweep[key] = value
        else:
            overrides[key] = value
    if "param" not in sweep or "values" not in sweep:
        raise ConfigError("sweep file must set both 'param' and 'values'")
    if overrides:
        from .scenario import _coerce_fields  # shares the scenario key table

        base = derive(base, **_coerce_fields(overrides))
    values = tuple(int(v) for v in sweep["values"].split(",") if v.strip())
    seeds_text = sweep.get("seeds", "1")
    seeds = tuple(int(s) for s in seeds_text.split(",") if s.strip())
    schemes_text = sweep.get("schemes", "CARD-EM")
    schemes = tuple(s.strip() for s in schemes_text.split(",") if s.strip())
    return SweepSpec(
        base=base,
        swept_parameter=sweep["param"],
        values=values,
        seeds=seeds,
        schemes=schemes,
        sweep_id=sweep.get("sweep_id", "sweep"),
        queries_per_run=int(sweep.get("queries", "50")),
    ).validate()


def component_labels(graph: ConnectivityGraph) -> list[int]:
    labels = [-1] * graph.node_count
    next_label = 0
    for start in range(graph.node_count):
        if labels[start] >= 0:
            continue
        labels[start] = next_label
        queue = deque((start,))
        while queue:
            node = queue.popleft()
            for neighbor in graph.adjacency[node]:
                if labels[neighbor] < 0:
                    labels[neighbor] = next_label
                    queue.append(neighbor)
        next_label += 1
    return labels


def final_snapshot(config: ScenarioConfig) -> ConnectivityGraph:
    """The connectivity snapshot a full run would end on, without running the
    protocol. Uses the same placement and mobility streams as SimulationRun."""
    rng_place = random.Random(ct.derive_seed(config.rng_seed, "place"))
    rng_move = random.Random(ct.derive_seed(config.rng_seed, "move"))
    positions = place_nodes(config, rng_place)
    ticks = int(round(config.sim_duration / config.snapshot_interval))
    for _ in range(ticks):
        advance_mobility(positions, config, config.snapshot_interval, rng_move)
    return ConnectivityGraph.from_positions(
        positions, config.tx_range, epoch=config.sim_duration
    )


def _fresh_net(graph: ConnectivityGraph) -> Network:
    net = Network(Simulator(), MetricsLedger())
    net.set_graph(graph)
    return net


def run_cell(
    config: ScenarioConfig,
    scheme: str,
    queries: int = 0,
    reach_sampling: str = "all",
) -> dict[str, float]:
    """One (config, scheme) run reduced to scalar metrics."""
    n = config.node_count
    if scheme in SCHEME_METHODS:
        run = SimulationRun(
            config, method=SCHEME_METHODS[scheme], reach_sampling=reach_sampling
        ).run()
        reach = list(run.reach_time_means().values())
        selection = run.ledger.total("selection_csq_hops")
        backtrack = run.ledger.total("backtrack_hops")
        maintenance = run.ledger.total("maintenance_hops")
        metrics = {
            "reach_mean": mean(reach) if reach else 0.0,
            "reach_median": median(reach) if reach else 0.0,
            "selection_hops_per_node": selection / n,
            "backtrack_hops_per_node": backtrack / n,
            "maintenance_hops_per_node": maintenance / n,
            "overhead_hops_per_node": (selection + backtrack + maintenance) / n,
            "contacts_per_node": sum(len(c) for c in run.contacts_map) / n,
        }
        if queries:
            pairs = sample_pairs(n, queries, config.rng_seed)
            outcomes = run.run_queries(pairs)
            metrics["query_success"] = sum(o.success for o in outcomes) / queries
            metrics["query_hops_per_node"] = sum(o.hops for o in outcomes) / n
        return metrics
    if scheme == "flood":
        graph = final_snapshot(config)
        net = _fresh_net(graph)
        pairs = sample_pairs(n, queries or 50, config.rng_seed)
        results = [bl.flood_query(net, s, t) for s, t in pairs]
    elif scheme == "bordercast":
        graph = final_snapshot(config)
        tables = compute_all(graph, config.neighborhood_radius, graph.epoch)
        net = _fresh_net(graph)
        pairs = sample_pairs(n, queries or 50, config.rng_seed)
        results = [bl.bordercast_query(net, tables, s, t) for s, t in pairs]
    else:
        raise ConfigError(f"unknown scheme: {scheme!r}")
    total = sum(r.transmissions for r in results)
    return {
        "query_success": sum(r.success for r in results) / len(results),
        "query_hops_per_node": total / n,
        "query_hops_per_query": total / len(results),
    }


def _cell_task(args) -> tuple[str | None, dict | None]:
    config, scheme, queries, sampling = args
    try:
        return None, run_cell(config, scheme, queries, sampling)
    except Exception as exc:  # per-run failures are recorded, not fatal
        return f"{type(exc).__name__}: {exc}", None


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[tuple] = field(default_factory=list)
    failures: list[tuple] = field(default_factory=list)

    def metric_series(self, scheme: str, metric: str) -> dict[int, list[float]]:
        """value -> per-seed metric values, in seed order."""
        series: dict[int, list[float]] = {}
        for _, row_scheme, _, value, _, row_metric, metric_value in self.rows:
            if row_scheme == scheme and row_metric == metric:
                series.setdefault(value, []).append(metric_value)
        return series


def run_sweep(spec: SweepSpec, parallel: int = 1) -> SweepResult:
    """Run every (value, seed, scheme) cell; failed cells are recorded and the
    sweep continues. Rows come out in deterministic order regardless of
    parallelism."""
    spec.validate()
    tasks = []
    for value, seed, scheme in spec.cells():
        config = derive(
            derive_config(spec.base, spec.swept_parameter, value), rng_seed=seed
        )
        queries = spec.queries_per_run if scheme not in SCHEME_METHODS else 0
        tasks.append((config, scheme, queries, spec.reach_sampling))
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            outcomes = list(pool.map(_cell_task, tasks))
    else:
        outcomes = [_cell_task(task) for task in tasks]
    result = SweepResult(spec)
    for (value, seed, scheme), (error, metrics) in zip(spec.cells(), outcomes):
        if error is not None:
            result.failures.append((scheme, value, seed, error))
            continue
        for metric in sorted(metrics):
            result.rows.append(
                (
                    spec.sweep_id,
                    scheme,
                    spec.swept_parameter,
                    value,
                    seed,
                    metric,
                    metrics[metric],
                )
            )
    return result


def tradeoff_report(rows: list[tuple]) -> list[dict]:
    """Reduce tidy sweep rows to one reachability-vs-overhead point per
    (scheme, value), averaged over seeds. Flags points at or above the 50%
    reachability mark."""
    acc: dict[tuple, dict[str, list[float]]] = {}
    params: dict[tuple, str] = {}
    for _, scheme, param, value, _, metric, metric_value in rows:
        if metric in ("reach_mean", "overhead_hops_per_node"):
            key = (scheme, value)
            acc.setdefault(key, {}).setdefault(metric, []).append(metric_value)
            params[key] = param
    report = []
    for key in sorted(acc):
        scheme, value = key
        entry = acc[key]
        reach_pct = mean(entry.get("reach_mean", [0.0])) * 100.0
        overhead = mean(entry.get("overhead_hops_per_node", [0.0]))
        report.append(
            {
                "scheme": scheme,
                "param": params[key],
                "value": value,
                "reach_pct": reach_pct,
                "overhead_hops_per_node": overhead,
                "meets_half": reach_pct >= 50.0,
            }
        )
    return report


def compare_run(
    config: ScenarioConfig,
    n_queries: int = 50,
    zone_radius: int | None = None,
    method: str = "em",
) -> list[dict]:
    """Run the contact scheme, flooding, and bordercast against the same final
    snapshot and the same query pairs. Query traffic for the contact scheme
    excludes selection and maintenance; those are reported separately."""
    run = SimulationRun(config, method=method, reach_sampling="none").run()
    graph = run.graph
    n = config.node_count
    pairs = sample_pairs(n, n_queries, config.rng_seed)
    labels = component_labels(graph)
    connected = [labels[s] == labels[t] for s, t in pairs]
    n_connected = sum(connected)

    rows = []

    def add_row(scheme, successes, tx_total, sel_maint_total):
        ok_connected = sum(
            1 for success, conn in zip(successes, connected) if success and conn
        )
        rows.append(
            {
                "scheme": scheme,
                "queries": n_queries,
                "connected_queries": n_connected,
                "success_fraction": sum(successes) / n_queries,
                "success_fraction_connected": (
                    ok_connected / n_connected if n_connected else 0.0
                ),
                "query_tx_total": tx_total,
                "query_tx_per_node": tx_total / n,
                "query_tx_per_query": tx_total / n_queries,
                "sel_maint_tx_per_node": sel_maint_total / n,
                "total_tx_per_node": (tx_total + sel_maint_total) / n,
            }
        )

    outcomes = run.run_queries(pairs)
    sel_maint = (
        run.ledger.total("selection_csq_hops")
        + run.ledger.total("backtrack_hops")
        + run.ledger.total("maintenance_hops")
    )
    scheme = "CARD-EM" if method == "em" else "CARD-PM"
    add_row(
        scheme,
        [o.success for o in outcomes],
        sum(o.hops for o in outcomes),
        sel_maint,
    )

    flood_results = []
    net = _fresh_net(graph)
    for s, t in pairs:
        flood_results.append(bl.flood_query(net, s, t))
    add_row(
        "flood",
        [r.success for r in flood_results],
        sum(r.transmissions for r in flood_results),
        0,
    )

    radius = zone_radius if zone_radius is not None else config.neighborhood_radius
    zone_tables = (
        run.tables
        if radius == config.neighborhood_radius
        else compute_all(graph, radius, graph.epoch)
    )
    bc_results = []
    net = _fresh_net(graph)
    for s, t in pairs:
        bc_results.append(bl.bordercast_query(net, zone_tables, s, t))
    add_row(
        "bordercast",
        [r.success for r in bc_results],
        sum(r.transmissions for r in bc_results),
        0,
    )
    return rows
