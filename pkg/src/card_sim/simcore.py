"""Discrete-event core: event queue, per-hop message accounting, transmission."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Callable, Optional

from .scenario import ConnectivityGraph

HOP_LATENCY_S = 0.001

CATEGORIES = (
    "selection_csq_hops",
    "backtrack_hops",
    "maintenance_hops",
    "query_hops",
    "baseline_hops",
)


@dataclass(order=True)
class Event:
    fire_time: float
    sequence: int
    action: Callable[[], None] = field(compare=False)
    cancelled: bool = field(default=False, compare=False)


class Simulator:
    """Event queue with a total (fire_time, sequence) order."""

    def __init__(self) -> None:
        self._heap: list[Event] = []
        self._sequence = 0
        self._now = 0.0

    @property
    def now(self) -> float:
        return self._now

    def schedule(self, fire_time: float, action: Callable[[], None]) -> Event:
        if fire_time < self._now:
            raise ValueError(
                f"cannot schedule into the past (now={self._now}, requested={fire_time})"
            )
        event = Event(fire_time, self._sequence, action)
        self._sequence += 1
        heapq.heappush(self._heap, event)
        return event

    def run_until(self, end_time: float) -> None:
        """Fire all events with fire_time <= end_time, then advance the clock to it.

        Calling again with the same end_time is a no-op.
        """
        while self._heap and self._heap[0].fire_time <= end_time:
            event = heapq.heappop(self._heap)
            self._now = event.fire_time
            if not event.cancelled:
                event.action()
        if end_time > self._now:
            self._now = end_time

    def pending(self) -> int:
        return sum(1 for event in self._heap if not event.cancelled)


class MetricsLedger:
    """Per-node, per-category counters of message hops. Counters only increase."""

    def __init__(self) -> None:
        self._by_node: dict[str, dict[int, int]] = {cat: {} for cat in CATEGORIES}
        self._totals: dict[str, int] = {cat: 0 for cat in CATEGORIES}

    def charge(self, category: str, node: int, count: int = 1) -> None:
        if category not in self._totals:
            raise KeyError(f"unknown ledger category: {category}")
        if count < 0:
            raise ValueError("ledger counts cannot decrease")
        per_node = self._by_node[category]
        per_node[node] = per_node.get(node, 0) + count
        self._totals[category] += count

    def total(self, category: str) -> int:
        return self._totals[category]

    def node_total(self, node: int, category: str) -> int:
        return self._by_node[category].get(node, 0)

    def grand_total(self) -> int:
        return sum(self._totals.values())

    def rows(self, time_s: float, node_count: int) -> list[tuple[float, int, str, int]]:
        """Snapshot rows (time_s, node_id, category, count) in a fixed order."""
        out = []
        for node in range(node_count):
            for category in CATEGORIES:
                out.append((time_s, node, category, self._by_node[category].get(node, 0)))
        return out


class DropReport:
    """Record of transmissions attempted over absent links, per sender."""

    def __init__(self) -> None:
        self.drops: list[tuple[float, int, int, str]] = []

    def record(self, time_s: float, sender: int, receiver: int, category: str) -> None:
        self.drops.append((time_s, sender, receiver, category))


class Network:
    """Couples the current connectivity snapshot to the event queue and ledger.

    Protocol walks that complete within one event use send(); timed delivery
    with a callback goes through transmit().
    """

    def __init__(self, sim: Simulator, ledger: MetricsLedger) -> None:
        self.sim = sim
        self.ledger = ledger
        self.graph: Optional[ConnectivityGraph] = None
        self.drop_report = DropReport()

    def set_graph(self, graph: ConnectivityGraph) -> None:
        self.graph = graph

    def send(self, sender: int, receiver: int, category: str) -> bool:
        """One hop against the current snapshot: charge the sender and report
        whether the receiver got it. A missing link charges nothing."""
        if self.graph is None:
            raise RuntimeError("network has no connectivity snapshot")
        if receiver in self.graph.neighbor_sets[sender]:
            self.ledger.charge(category, sender)
            return True
        self.drop_report.record(self.sim.now, sender, receiver, category)
        return False

    def transmit(
        self,
        payload,
        sender: int,
        receiver: int,
        category: str,
        on_deliver: Optional[Callable[[object], None]] = None,
    ) -> Optional[Event]:
        """Send one hop with per-hop latency. Returns the delivery event, or None
        when the link is absent (the drop is recorded for the sender)."""
        if not self.send(sender, receiver, category):
            return None
        action = (lambda: on_deliver(payload)) if on_deliver else _noop
        return self.sim.schedule(self.sim.now + HOP_LATENCY_S, action)

    def broadcast(self, sender: int, category: str) -> tuple[int, ...]:
        """One local broadcast: a single charged transmission reaching all
        current neighbors."""
        if self.graph is None:
            raise RuntimeError("network has no connectivity snapshot")
        self.ledger.charge(category, sender)
        return self.graph.adjacency[sender]


def _noop() -> None:
    return None
