"""Reference query schemes: classic flooding and zone bordercasting.

Both answer the same question as a contact query (is the target reachable,
and at what message cost) with none of the contact machinery. Transmission
counts land in the baseline ledger category.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .neighborhood import NeighborhoodTable
from .simcore import Network


@dataclass(frozen=True)
class BaselineResult:
    success: bool
    transmissions: int


def flood_query(net: Network, source: int, target: int) -> BaselineResult:
    """Classic flood: every node that receives the query rebroadcasts it once;
    only the target stays quiet and answers. There is no kill switch, so the
    flood covers everything reachable without passing through the target."""
    if source == target:
        return BaselineResult(True, 0)
    graph = net.graph
    visited = {source}
    queue = deque([source])
    transmissions = 0
    found = False
    while queue:
        node = queue.popleft()
        net.ledger.charge("baseline_hops", node)
        transmissions += 1
        for neigh in graph.adjacency[node]:
            if neigh == target:
                found = True
            elif neigh not in visited:
                visited.add(neigh)
                queue.append(neigh)
    return BaselineResult(found, transmissions)


@dataclass
class BordercastState:
    """Per-query bookkeeping for one bordercast search."""

    zone_radius: int
    received: set[int] = field(default_factory=set)
    covered: set[int] = field(default_factory=set)
    transmitted: set[int] = field(default_factory=set)
    pending: deque = field(default_factory=deque)


def bordercast_query(
    net: Network,
    zone_tables: list[NeighborhoodTable],
    source: int,
    target: int,
) -> BaselineResult:
    """Zone-based search: a node holding the query answers if the target is in
    its zone, else unicasts the query along zone routes to its peripheral
    nodes. Query detection prunes the search: relay nodes mark their zone
    covered (QD1), overhearers of any transmission do too (QD2, the addressed
    recipient excepted), and covered or already queried peripherals are not
    re-targeted. A covered node still answers from its zone but does not
    re-bordercast.

    A node transmits a given query at most once: later route hops from the
    same sender ride the transmission its neighbors already overheard. This
    keeps the cost of overlapping zone routes at one transmission per node,
    which is what bounds bordercast by flooding on the same query."""
    if source == target:
        return BaselineResult(True, 0)
    state = BordercastState(zone_tables[source].radius)
    state.received.add(source)
    state.pending.append(source)
    while state.pending:
        node = state.pending.popleft()
        table = zone_tables[node]
        if target == node or table.contains(target):
            return BaselineResult(True, len(state.transmitted))
        if node in state.covered:
            continue
        state.covered.add(node)
        marks: set[int] = set()
        recipients: list[int] = []
        for edge in table.edge_nodes:
            if edge in state.received or edge in state.covered:
                continue
            route = table.route_to(edge)
            for i in range(len(route) - 1):
                if route[i] not in state.transmitted:
                    net.send(route[i], route[i + 1], "baseline_hops")
                    state.transmitted.add(route[i])
                marks.update(net.graph.adjacency[route[i]])
            marks.update(route[1:-1])
            state.received.add(edge)
            recipients.append(edge)
            state.pending.append(edge)
        # One emission is treated as simultaneous: its own recipients are not
        # suppressed by it, everyone else who heard it is.
        state.covered.update(marks.difference(recipients))
    return BaselineResult(False, len(state.transmitted))
