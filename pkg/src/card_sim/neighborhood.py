"""Proactive R-hop neighborhood tables built from connectivity snapshots."""

from __future__ import annotations

from dataclasses import dataclass, field

from .scenario import ConnectivityGraph


@dataclass
class NeighborhoodTable:
    """Everything one node knows within its neighborhood radius.

    members maps each reachable node (owner excluded) to its hop distance.
    parents encodes the BFS tree for route reconstruction; edge_nodes are the
    members at exactly the neighborhood radius.
    """

    owner: int
    radius: int
    epoch: float
    members: dict[int, int]
    parents: dict[int, int]
    edge_nodes: tuple[int, ...]
    member_set: frozenset[int] = field(init=False)

    def __post_init__(self) -> None:
        self.member_set = frozenset(self.members)

    def contains(self, node: int) -> bool:
        return node in self.member_set

    def distance(self, node: int) -> int:
        return self.members[node]

    def route_to(self, node: int) -> tuple[int, ...]:
        """Path from the owner to a member, both endpoints included."""
        if node == self.owner:
            return (self.owner,)
        hops = [node]
        cursor = node
        while cursor != self.owner:
            cursor = self.parents[cursor]
            hops.append(cursor)
        hops.reverse()
        return tuple(hops)


def compute_neighborhood(
    graph: ConnectivityGraph, owner: int, radius: int, epoch: float = 0.0
) -> NeighborhoodTable:
    """Truncated BFS from the owner. Ties at equal distance resolve toward the
    lowest NodeId parent, so tables are deterministic for a given snapshot."""
    members: dict[int, int] = {}
    parents: dict[int, int] = {}
    frontier = [owner]
    seen = {owner}
    for dist in range(1, radius + 1):
        next_frontier: list[int] = []
        for node in frontier:  # frontier is already in ascending id order
            for neigh in graph.adjacency[node]:
                if neigh not in seen:
                    seen.add(neigh)
                    members[neigh] = dist
                    parents[neigh] = node
                    next_frontier.append(neigh)
        if not next_frontier:
            break
        next_frontier.sort()
        frontier = next_frontier
    edge_nodes = tuple(sorted(n for n, d in members.items() if d == radius))
    return NeighborhoodTable(owner, radius, epoch, members, parents, edge_nodes)


def compute_all(
    graph: ConnectivityGraph, radius: int, epoch: float = 0.0
) -> list[NeighborhoodTable]:
    """Tables for every node of the snapshot, indexed by NodeId."""
    return [compute_neighborhood(graph, owner, radius, epoch) for owner in range(graph.node_count)]
