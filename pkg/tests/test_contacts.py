from __future__ import annotations

import hashlib
import random

import pytest

from card_sim.contacts import (
    ContactEntry,
    LOST_BREAK,
    LOST_RANGE,
    REPAIRED,
    VALID,
    derive_seed,
    em_accept,
    local_recovery,
    overlap_hit,
    pm_probability,
    run_csq,
    select_contacts,
    validate_contact,
    validate_contacts,
)
from card_sim.neighborhood import compute_all, compute_neighborhood
from card_sim.scenario import ConnectivityGraph, ScenarioConfig, derive
from card_sim.simcore import MetricsLedger, Network, Simulator

from helpers import is_walk, line_graph


def _net(graph: ConnectivityGraph) -> Network:
    net = Network(Simulator(), MetricsLedger())
    net.set_graph(graph)
    return net


def _config(**changes) -> ScenarioConfig:
    base = dict(node_count=10, neighborhood_radius=1, max_contact_distance=4)
    base.update(changes)
    config = ScenarioConfig(**base)
    config.validate()
    return config


def test_derive_seed_is_content_addressed():
    expected = int.from_bytes(hashlib.sha256(b"1|csq|0").digest()[:8], "big")
    assert derive_seed(1, "csq", 0) == expected
    assert derive_seed(1, "csq", 0) == derive_seed(1, "csq", 0)
    assert derive_seed(1, "csq", 0) != derive_seed(1, "csq", 1)


def test_pm_probability_ramps():
    # pm1 ramps from R, pm2 from 2R; both clamp to [0, 1]
    assert pm_probability(3, 3, 20, "pm1") == 0.0
    assert pm_probability(20, 3, 20, "pm1") == 1.0
    assert pm_probability(11.5, 3, 20, "pm1") == pytest.approx(0.5)
    assert pm_probability(6, 3, 20, "pm2") == 0.0
    assert pm_probability(4, 3, 20, "pm2") == 0.0
    assert pm_probability(13, 3, 20, "pm2") == pytest.approx(0.5)
    assert pm_probability(25, 3, 20, "pm2") == 1.0
    with pytest.raises(ValueError, match="variant"):
        pm_probability(5, 3, 20, "em")
    with pytest.raises(ValueError, match="ramp"):
        pm_probability(5, 3, 6, "pm2")


def test_overlap_hit():
    graph = line_graph(5)
    table = compute_neighborhood(graph, 2, 1)  # members {1, 3}
    assert overlap_hit(2, table, frozenset({2}))
    assert overlap_hit(2, table, frozenset({3}))
    assert not overlap_hit(2, table, frozenset({0, 4}))


def test_em_accept_on_a_line():
    graph = line_graph(9)
    tables = compute_all(graph, 1)
    # source 0 has the single edge node 1
    assert not em_accept(1, tables[1], 0, frozenset(), frozenset({1}))
    assert not em_accept(2, tables[2], 0, frozenset(), frozenset({1}))
    assert em_accept(3, tables[3], 0, frozenset(), frozenset({1}))
    # a selected contact at 5 blocks 5 itself and its neighbors
    assert not em_accept(5, tables[5], 0, frozenset({5}), frozenset({1}))
    assert not em_accept(6, tables[6], 0, frozenset({5}), frozenset({1}))
    assert em_accept(7, tables[7], 0, frozenset({5}), frozenset({1}))


def test_csq_accepts_first_separated_node():
    # walk 0-1-2-3 on a line: reject the edge node and its neighbor, accept 3,
    # answer back along the stack
    graph = line_graph(10)
    tables = compute_all(graph, 1)
    net = _net(graph)
    entry = run_csq(
        net, tables, 0, 1, frozenset(), "em", _config(), random.Random(1), 99, 5.0
    )
    assert entry == ContactEntry(3, (0, 1, 2, 3), 5.0, 5.0)
    assert net.ledger.total("selection_csq_hops") == 6  # 3 out + 3 back
    assert net.ledger.total("backtrack_hops") == 0


def test_csq_exhaustion_backtracks_to_source():
    graph = line_graph(3)
    tables = compute_all(graph, 1)
    net = _net(graph)
    entry = run_csq(
        net, tables, 0, 1, frozenset(), "em", _config(node_count=3), random.Random(1), 99, 0.0
    )
    assert entry is None
    assert net.ledger.total("selection_csq_hops") == 2  # 0->1->2
    assert net.ledger.total("backtrack_hops") == 2  # 2->1->0
    # walk economy: forward plus backtrack hops never exceed twice the visits
    assert net.ledger.total("selection_csq_hops") + net.ledger.total("backtrack_hops") <= 2 * 3


def test_csq_depth_limit_stops_the_walk():
    # contacts at 2, 3, 4, 5 block every candidate within reach; the walk may
    # not step past hop 4 even though node 5 is unvisited
    graph = line_graph(11)
    tables = compute_all(graph, 1)
    net = _net(graph)
    entry = run_csq(
        net,
        tables,
        0,
        1,
        frozenset({2, 3, 4, 5}),
        "em",
        _config(node_count=11),
        random.Random(1),
        99,
        0.0,
    )
    assert entry is None
    assert net.ledger.total("selection_csq_hops") == 4
    assert net.ledger.total("backtrack_hops") == 4
    for category in ("selection_csq_hops", "backtrack_hops"):
        assert net.ledger.node_total(5, category) == 0


def _three_arm_star() -> ConnectivityGraph:
    # three disjoint arms of length 4 hanging off node 0
    edges = []
    for arm in (1, 5, 9):
        edges.append((0, arm))
        edges += [(arm + i, arm + i + 1) for i in range(3)]
    return ConnectivityGraph.from_edges(13, edges)


def test_select_contacts_walks_edges_in_order_until_quota():
    graph = _three_arm_star()
    tables = compute_all(graph, 1)
    net = _net(graph)
    config = _config(node_count=13, max_contacts=2)
    picked = select_contacts(net, tables, 0, [], "em", config, 7, 0, 1.0)
    assert [(e.contact, e.source_path) for e in picked] == [
        (3, (0, 1, 2, 3)),
        (7, (0, 5, 6, 7)),
    ]
    # quota met before the third edge node, so arm 9 saw no traffic
    assert net.ledger.node_total(9, "selection_csq_hops") == 0
    assert all(e.selected_at == 1.0 for e in picked)


def test_select_contacts_counts_existing_toward_quota():
    graph = _three_arm_star()
    tables = compute_all(graph, 1)
    config = _config(node_count=13, max_contacts=2)
    existing = [ContactEntry(3, (0, 1, 2, 3), 0.0, 0.0)]
    picked = select_contacts(_net(graph), tables, 0, existing, "em", config, 7, 1, 2.0)
    # arm 1 is exhausted (3 is taken, 4 overlaps it), arm 5 yields the one slot
    assert [e.contact for e in picked] == [7]

    full = [existing[0], ContactEntry(7, (0, 5, 6, 7), 0.0, 0.0)]
    assert select_contacts(_net(graph), tables, 0, full, "em", config, 7, 2, 3.0) == []


def test_selection_is_deterministic_per_seed():
    graph = _three_arm_star()
    tables = compute_all(graph, 1)
    config = _config(node_count=13, max_contacts=3)
    a = select_contacts(_net(graph), tables, 0, [], "pm2", config, 11, 0, 0.0)
    b = select_contacts(_net(graph), tables, 0, [], "pm2", config, 11, 0, 0.0)
    assert a == b


def _random_disk_snapshot(seed: int, n: int = 80):
    from card_sim.scenario import place_nodes

    config = ScenarioConfig(
        node_count=n,
        area_width=300.0,
        area_height=300.0,
        neighborhood_radius=2,
        max_contact_distance=8,
        rng_seed=seed,
    )
    positions = place_nodes(config, random.Random(derive_seed(seed, "place")))
    graph = ConnectivityGraph.from_positions(positions, config.tx_range)
    return config, graph, compute_all(graph, config.neighborhood_radius)


def test_quota_increase_extends_selection_prefix():
    # raising the quota re-runs the same per-edge walks, so the smaller
    # selection is a prefix of the larger one
    config, graph, tables = _random_disk_snapshot(5)
    per_quota = {}
    for quota in (1, 2, 3, 4):
        cfg = derive(config, max_contacts=quota)
        picks = {
            node: select_contacts(_net(graph), tables, node, [], "em", cfg, 5, 0, 0.0)
            for node in range(graph.node_count)
        }
        per_quota[quota] = picks
    for quota in (1, 2, 3):
        for node in range(graph.node_count):
            smaller = per_quota[quota][node]
            larger = per_quota[quota + 1][node]
            assert larger[: len(smaller)] == smaller
            assert len(larger) >= len(smaller)


def test_local_recovery_splices_detector_route():
    graph = ConnectivityGraph.from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (1, 5), (5, 3)])
    table = compute_neighborhood(graph, 1, 2)
    # node 1 detects a break toward 2; 2 is scanned first and is in reach
    assert local_recovery(table, (0, 1, 2, 3, 4), 1) == (0, 1, 2, 3, 4)

    # with 2 out of the table, the scan falls through to 3 via 5
    narrow = compute_neighborhood(
        ConnectivityGraph.from_edges(6, [(0, 1), (1, 5), (5, 3), (3, 4)]), 1, 2
    )
    assert local_recovery(narrow, (0, 1, 2, 3, 4), 1) == (0, 1, 5, 3, 4)


def test_local_recovery_collapses_loops_through_detector():
    table = compute_neighborhood(line_graph(5), 1, 1)  # members of 1: {0, 2}
    assert local_recovery(table, (0, 1, 9, 1, 2), 1) == (0, 1, 2)


def test_local_recovery_fails_when_nothing_is_in_reach():
    table = compute_neighborhood(line_graph(5), 1, 1)
    assert local_recovery(table, (0, 1, 7, 8, 9), 1) is None


def test_validate_contact_intact_path():
    config = _config()
    graph = line_graph(5)
    net = _net(graph)
    entry = ContactEntry(4, (0, 1, 2, 3, 4), 0.0, 0.0)
    result = validate_contact(net, compute_all(graph, 1), entry, config)
    assert result.status == VALID
    assert result.path == (0, 1, 2, 3, 4)
    assert net.ledger.total("maintenance_hops") == 8  # 4 out + 4 back


def test_validate_contact_repairs_over_a_detour():
    # link 1-2 is gone; node 1 skips ahead to 3 and the path shrinks to 3 hops
    config = _config()
    graph = ConnectivityGraph.from_edges(6, [(0, 1), (1, 3), (3, 4)])
    net = _net(graph)
    entry = ContactEntry(4, (0, 1, 2, 3, 4), 0.0, 0.0)
    result = validate_contact(net, compute_all(graph, 1), entry, config)
    assert result.status == REPAIRED
    assert result.path == (0, 1, 3, 4)
    assert net.ledger.total("maintenance_hops") == 6  # 3 out + 3 back
    assert net.drop_report.drops[0][1:] == (1, 2, "maintenance_hops")


def test_validate_contact_drops_out_of_range_paths():
    config = _config()

    # an intact path longer than r is discarded, with no answer hops
    long_graph = line_graph(6)
    net = _net(long_graph)
    entry = ContactEntry(5, (0, 1, 2, 3, 4, 5), 0.0, 0.0)
    result = validate_contact(net, compute_all(long_graph, 1), entry, config)
    assert result.status == LOST_RANGE
    assert net.ledger.total("maintenance_hops") == 5

    # a repair can also shrink the path below 2R+1 hops
    shortcut = ConnectivityGraph.from_edges(6, [(0, 1), (1, 3), (3, 4)])
    net = _net(shortcut)
    result = validate_contact(
        net, compute_all(shortcut, 1), ContactEntry(3, (0, 1, 2, 3), 0.0, 0.0), config
    )
    assert result.status == LOST_RANGE
    assert result.path == (0, 1, 3)
    assert net.ledger.total("maintenance_hops") == 2


def test_validate_contact_loses_unreachable_breaks():
    config = _config()
    graph = ConnectivityGraph.from_edges(6, [(0, 1)])
    net = _net(graph)
    entry = ContactEntry(3, (0, 1, 2, 3), 0.0, 0.0)
    result = validate_contact(net, compute_all(graph, 1), entry, config)
    assert result.status == LOST_BREAK
    assert result.path == (0, 1)
    assert net.ledger.total("maintenance_hops") == 1


def test_validate_contacts_census_rows():
    graph = ConnectivityGraph.from_edges(8, [(0, 1), (1, 2), (2, 3)])
    tables = compute_all(graph, 1)
    net = _net(graph)
    entries = [
        ContactEntry(3, (0, 1, 2, 3), 1.0, 1.0),
        ContactEntry(7, (0, 1, 7), 1.0, 1.0),
    ]
    kept, rows = validate_contacts(net, tables, 0, entries, _config(node_count=8), 6.0)
    assert [e.contact for e in kept] == [3]
    assert kept[0].selected_at == 1.0
    assert kept[0].last_validated == 6.0
    assert rows == [
        (6.0, 0, 3, 3, VALID),
        (6.0, 0, 7, 1, LOST_BREAK),
    ]


def test_repaired_paths_are_walks_in_the_new_snapshot():
    # move every node a little, revalidate old contacts, and oracle-check the
    # surviving paths against the new adjacency
    rng = random.Random(0)
    checked = 0
    for seed in range(6):
        config, graph, tables = _random_disk_snapshot(seed)
        contacts = {
            node: select_contacts(_net(graph), tables, node, [], "em", config, seed, 0, 0.0)
            for node in range(graph.node_count)
        }
        edges = [
            (u, v)
            for u, neigh in enumerate(graph.adjacency)
            for v in neigh
            if u < v and rng.random() > 0.25
        ]
        moved = ConnectivityGraph.from_edges(graph.node_count, edges)
        moved_tables = compute_all(moved, config.neighborhood_radius)
        net = _net(moved)
        for node, entries in contacts.items():
            kept, _ = validate_contacts(net, moved_tables, node, entries, config, 1.0)
            for entry in kept:
                assert is_walk(moved, entry.source_path)
                assert entry.source_path[0] == node
                assert entry.source_path[-1] == entry.contact
                hops = len(entry.source_path) - 1
                assert 2 * config.neighborhood_radius + 1 <= hops
                assert hops <= config.max_contact_distance
                checked += 1
    assert checked > 50
