"""Command-line front end: resolve a scenario, run it, write CSVs and figures.

Three subcommands share one configuration surface:

    card-sim run      one simulation (or topology stats with --stats-only)
    card-sim compare  contact scheme vs flooding vs bordercast, shared snapshots
    card-sim sweep    batch parameter study driven by a sweep file

Configuration precedence is flags > file > defaults. Exit codes: 0 success,
1 runtime failure, 2 invalid configuration (nothing is written in that case).
"""

from __future__ import annotations

import argparse
import os
import random
import sys
from dataclasses import asdict

from . import contacts as ct
from . import experiments as ex
from . import output
from .runner import SimulationRun, sample_pairs
from .scenario import (
    ConfigError,
    ConnectivityGraph,
    ScenarioConfig,
    derive,
    get_preset,
    graph_stats,
    load_scenario_file,
    place_nodes,
)

# flag name -> ScenarioConfig field it overrides
_FLAG_FIELDS = {
    "R": "neighborhood_radius",
    "r": "max_contact_distance",
    "noc": "max_contacts",
    "depth": "max_depth",
    "seed": "rng_seed",
    "duration": "sim_duration",
}


def _add_shared_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--preset", help="bundled topology name (table1-1 .. table1-8)")
    parser.add_argument("--scenario", metavar="FILE", help="scenario file (key = value lines)")
    parser.add_argument(
        "--method",
        choices=("pm1", "pm2", "em"),
        default="em",
        help="contact acceptance rule (default em)",
    )
    parser.add_argument("--R", type=int, help="neighborhood radius override")
    parser.add_argument("--r", type=int, help="contact distance cap override")
    parser.add_argument("--noc", type=int, help="contact quota override")
    parser.add_argument("--depth", type=int, help="search depth override")
    parser.add_argument("--seed", type=int, help="run seed override")
    parser.add_argument("--duration", type=float, help="simulated seconds override")
    parser.add_argument("--out", default="out", metavar="DIR", help="output directory")
    parser.add_argument("--no-figures", action="store_true", help="skip PNG rendering")


def _resolve_config(args) -> ScenarioConfig:
    if args.preset and args.scenario:
        raise ConfigError("--preset and --scenario are mutually exclusive")
    if args.preset:
        config = get_preset(args.preset)
    elif args.scenario:
        config = load_scenario_file(args.scenario)
    else:
        config = ScenarioConfig()
    overrides = {
        field: getattr(args, flag)
        for flag, field in _FLAG_FIELDS.items()
        if getattr(args, flag) is not None
    }
    if overrides:
        return derive(config, **overrides)
    config.validate()
    return config


def _path(args, name: str) -> str:
    return os.path.join(args.out, name)


def cmd_run(args) -> int:
    config = _resolve_config(args)
    if args.stats_only:
        return _run_stats(args, config)
    manifest = output.RunManifest(
        "run",
        asdict(config),
        [config.rng_seed],
        args.out,
        extras={"method": args.method, "queries": args.queries},
    )
    manifest.write(_path(args, "manifest.json"))
    run = SimulationRun(config, method=args.method).run()
    pairs = sample_pairs(config.node_count, args.queries, config.rng_seed)
    outcomes = run.run_queries(pairs)
    output.write_metrics_csv(
        _path(args, "metrics.csv"),
        run.ledger.rows(config.sim_duration, config.node_count),
    )
    output.write_timeseries_csv(_path(args, "timeseries.csv"), run.timeseries_rows)
    output.write_census_csv(_path(args, "census.csv"), run.census_rows)
    means = run.reach_time_means()
    output.write_reachability_csv(_path(args, "reachability.csv"), means)
    output.write_queries_csv(
        _path(args, "queries.csv"),
        (
            (i, s, t, o.success, o.depth_used, o.hops)
            for i, ((s, t), o) in enumerate(zip(pairs, outcomes))
        ),
    )
    if not args.no_figures:
        from . import reports

        reports.render_timeseries(run.timeseries_rows, _path(args, "timeseries.png"))
        reports.render_reachability_hist(means, _path(args, "reachability.png"))
    return 0


def _run_stats(args, config: ScenarioConfig) -> int:
    seeds = [config.rng_seed + i for i in range(args.num_seeds)]
    manifest = output.RunManifest(
        "run-stats", asdict(config), seeds, args.out, extras={"stats_only": True}
    )
    manifest.write(_path(args, "manifest.json"))
    rows = []
    for seed in seeds:
        cfg = derive(config, rng_seed=seed)
        rng = random.Random(ct.derive_seed(cfg.rng_seed, "place"))
        graph = ConnectivityGraph.from_positions(place_nodes(cfg, rng), cfg.tx_range)
        stats = graph_stats(graph)
        rows.append(
            (seed, stats.link_count, stats.avg_degree, stats.diameter, stats.avg_hops)
        )
    output.write_stats_csv(_path(args, "stats.csv"), rows)
    if not args.no_figures:
        from . import reports

        reports.render_stats_bars(rows, _path(args, "stats.png"))
    return 0


def cmd_compare(args) -> int:
    config = _resolve_config(args)
    manifest = output.RunManifest(
        "compare",
        asdict(config),
        [config.rng_seed],
        args.out,
        extras={
            "method": args.method,
            "queries": args.queries,
            "zone_radius": args.zone_radius,
        },
    )
    manifest.write(_path(args, "manifest.json"))
    rows = ex.compare_run(
        config,
        n_queries=args.queries,
        zone_radius=args.zone_radius,
        method=args.method,
    )
    output.write_compare_csv(_path(args, "compare.csv"), rows)
    if not args.no_figures:
        from . import reports

        reports.render_compare_bars(rows, _path(args, "compare.png"))
    return 0


def cmd_sweep(args) -> int:
    base = _resolve_config(args)
    try:
        with open(args.file, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read sweep file: {exc}") from None
    spec = ex.parse_sweep_text(text, base)
    manifest = output.RunManifest(
        "sweep",
        asdict(spec.base),
        list(spec.seeds),
        args.out,
        extras={
            "param": spec.swept_parameter,
            "values": list(spec.values),
            "schemes": list(spec.schemes),
            "queries": spec.queries_per_run,
            "sweep_id": spec.sweep_id,
        },
    )
    manifest.write(_path(args, "manifest.json"))
    result = ex.run_sweep(spec, parallel=args.parallel)
    output.write_sweep_csv(_path(args, "sweep.csv"), ex.TIDY_HEADER, result.rows)
    if result.failures:
        output.write_failures_csv(_path(args, "failures.csv"), result.failures)
    card_schemes = [s for s in spec.schemes if s in ex.SCHEME_METHODS]
    if card_schemes:
        points = ex.tradeoff_report(result.rows)
        output.write_tradeoff_csv(_path(args, "tradeoff.csv"), points)
    if not args.no_figures:
        from . import reports

        if card_schemes:
            reports.render_sweep_lines(
                result.rows, "reach_mean", _path(args, "sweep_reach.png")
            )
            reports.render_sweep_lines(
                result.rows,
                "overhead_hops_per_node",
                _path(args, "sweep_overhead.png"),
            )
            reports.render_tradeoff(points, _path(args, "tradeoff.png"))
        if set(spec.schemes) - set(card_schemes):
            reports.render_sweep_lines(
                result.rows, "query_hops_per_node", _path(args, "sweep_query.png")
            )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="card-sim",
        description="Contact-based resource discovery simulator for mobile ad hoc networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one simulation and write its outputs")
    _add_shared_flags(run_p)
    run_p.add_argument(
        "--stats-only",
        action="store_true",
        help="emit topology statistics over several placements instead of simulating",
    )
    run_p.add_argument(
        "--num-seeds", type=int, default=10, help="placements for --stats-only"
    )
    run_p.add_argument(
        "--queries", type=int, default=50, help="destination searches after the run"
    )
    run_p.set_defaults(func=cmd_run)

    compare_p = sub.add_parser(
        "compare", help="contact scheme vs flooding vs bordercast on shared snapshots"
    )
    _add_shared_flags(compare_p)
    compare_p.add_argument("--queries", type=int, default=50, help="query pairs")
    compare_p.add_argument(
        "--zone-radius",
        type=int,
        default=None,
        help="bordercast zone radius (default: neighborhood radius)",
    )
    compare_p.set_defaults(func=cmd_compare)

    sweep_p = sub.add_parser(
        "sweep", help="parameter study from a sweep file (schemes come from the file)"
    )
    _add_shared_flags(sweep_p)
    sweep_p.add_argument("--file", required=True, metavar="FILE", help="sweep file")
    sweep_p.add_argument(
        "--parallel", type=int, default=1, help="concurrent runs (default 1)"
    )
    sweep_p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure, distinct from bad configuration
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
