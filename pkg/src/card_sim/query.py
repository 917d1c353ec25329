"""Destination search queries over the contact overlay.

A query first checks the source's own neighborhood, then escalates the depth
of search one level at a time: depth 1 asks each contact to look in its own
neighborhood, deeper queries are decremented and relayed to the contacts'
contacts. All query traffic rides stored contact paths and is verified hop by
hop against the current snapshot, so a stale path silently eats the hops spent
before the break.
"""

from __future__ import annotations

from dataclasses import dataclass

from .contacts import ContactEntry
from .neighborhood import NeighborhoodTable
from .simcore import HOP_LATENCY_S, Network


@dataclass
class DestinationSearchQuery:
    target: int
    depth: int
    query_id: int
    reply_path: tuple[int, ...]


@dataclass(frozen=True)
class QueryOutcome:
    success: bool
    path: tuple[int, ...] | None
    depth_used: int
    hops: int


def reply_timeout(config) -> float:
    """Per-level wait before escalating: a full out-and-back at the maximum
    contact distance."""
    return 2.0 * config.max_contact_distance * HOP_LATENCY_S


def handle_dsq(
    net: Network,
    tables: list[NeighborhoodTable],
    contacts_map: list[list[ContactEntry]],
    node: int,
    dsq: DestinationSearchQuery,
    seen: dict[int, int],
) -> tuple[str, tuple[int, ...] | None]:
    """Per-contact behavior: answer from the local neighborhood at depth 1,
    otherwise decrement and relay to own contacts one at a time."""
    if dsq.depth <= 1:
        if dsq.target == node:
            return "reply", dsq.reply_path
        table = tables[node]
        if table.contains(dsq.target):
            return "reply", dsq.reply_path + table.route_to(dsq.target)[1:]
        return "no_answer", None
    forwarded = DestinationSearchQuery(dsq.target, dsq.depth - 1, dsq.query_id, dsq.reply_path)
    found = _fan_out(net, tables, contacts_map, node, forwarded, seen)
    if found is not None:
        return "reply", found
    return "forwarded", None


def _fan_out(
    net: Network,
    tables: list[NeighborhoodTable],
    contacts_map: list[list[ContactEntry]],
    node: int,
    dsq: DestinationSearchQuery,
    seen: dict[int, int],
) -> tuple[int, ...] | None:
    """Send the DSQ to each of the node's contacts in selection order, stopping
    at the first answer. A receiver acts on a re-arrival only when it carries
    more remaining depth than any earlier one: a shallower copy's lookup
    already ran during an earlier escalation level and its forwarding tree is
    a subset of the deeper visit's. The hops spent reaching an ignored
    receiver are already charged."""
    for entry in contacts_map[node]:
        path = entry.source_path
        delivered = True
        for i in range(len(path) - 1):
            if not net.send(path[i], path[i + 1], "query_hops"):
                delivered = False
                break
        if not delivered:
            continue
        if dsq.depth <= seen.get(entry.contact, 0):
            continue
        seen[entry.contact] = dsq.depth
        arrived = DestinationSearchQuery(
            dsq.target, dsq.depth, dsq.query_id, dsq.reply_path + path[1:]
        )
        status, reply = handle_dsq(net, tables, contacts_map, entry.contact, arrived, seen)
        if status == "reply":
            return reply
    return None


def resolve(
    net: Network,
    tables: list[NeighborhoodTable],
    contacts_map: list[list[ContactEntry]],
    source: int,
    target: int,
    max_depth: int,
    query_id: int,
) -> QueryOutcome:
    """Run one destination search from the source, escalating the search depth
    until the target is found or max_depth levels are exhausted. Levels run
    strictly in order; a level is only entered after the previous one came
    back empty. depth_used is 0 for neighborhood hits."""
    hops_before = net.ledger.total("query_hops")
    if target == source:
        return QueryOutcome(True, (source,), 0, 0)
    table = tables[source]
    if table.contains(target):
        return QueryOutcome(True, table.route_to(target), 0, 0)
    for depth in range(1, max_depth + 1):
        seen: dict[int, int] = {}
        dsq = DestinationSearchQuery(target, depth, query_id + depth - 1, (source,))
        reply = _fan_out(net, tables, contacts_map, source, dsq, seen)
        if reply is not None:
            hops = net.ledger.total("query_hops") - hops_before
            return QueryOutcome(True, reply, depth, hops)
    hops = net.ledger.total("query_hops") - hops_before
    return QueryOutcome(False, None, max_depth, hops)


def contact_levels(
    contacts_map: list[list[ContactEntry]], source: int, depth: int
) -> set[int]:
    """All contacts reachable from the source in at most depth contact levels."""
    reached: set[int] = set()
    frontier = [source]
    for _ in range(depth):
        nxt = []
        for node in frontier:
            for entry in contacts_map[node]:
                if entry.contact != source and entry.contact not in reached:
                    reached.add(entry.contact)
                    nxt.append(entry.contact)
        if not nxt:
            break
        frontier = nxt
    return reached


def analytic_reachability(
    tables: list[NeighborhoodTable],
    contacts_map: list[list[ContactEntry]],
    source: int,
    depth: int,
    node_count: int,
) -> float:
    """Fraction of the network covered by the source's neighborhood plus the
    neighborhoods of every contact within depth contact levels. Pure set
    union; no messages are exchanged or charged."""
    covered = {source}
    covered.update(tables[source].member_set)
    for contact in contact_levels(contacts_map, source, depth):
        covered.add(contact)
        covered.update(tables[contact].member_set)
    return len(covered) / node_count
