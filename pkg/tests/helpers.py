from __future__ import annotations

from card_sim.scenario import ConnectivityGraph


def line_graph(n: int) -> ConnectivityGraph:
    return ConnectivityGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def bfs_distances(graph: ConnectivityGraph, start: int) -> dict[int, int]:
    """Plain dict BFS, kept independent of the package's table code."""
    dist = {start: 0}
    frontier = [start]
    while frontier:
        nxt = []
        for node in frontier:
            for neigh in graph.adjacency[node]:
                if neigh not in dist:
                    dist[neigh] = dist[node] + 1
                    nxt.append(neigh)
        frontier = nxt
    return dist


def is_walk(graph: ConnectivityGraph, path: tuple[int, ...]) -> bool:
    return all(graph.has_link(path[i], path[i + 1]) for i in range(len(path) - 1))
