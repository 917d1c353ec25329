"""Contact selection and maintenance.

Contacts are shortcut nodes kept outside a node's own neighborhood. They are
found by contact selection queries (CSQs): bounded depth-first walks launched
through each edge node of the source's neighborhood. Two acceptance policies
are implemented: probabilistic (PM, two band variants) and edge-based (EM,
which rejects any candidate whose neighborhood touches the source, an already
selected contact, or an edge node of the source).
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field

from .neighborhood import NeighborhoodTable
from .scenario import ConnectivityGraph, ScenarioConfig
from .simcore import Network

PM_VARIANTS = ("pm1", "pm2")
METHODS = ("pm1", "pm2", "em")


def derive_seed(*parts) -> int:
    """Stable sub-seed from a tuple of ints/strings, independent of hash salting."""
    text = "|".join(str(p) for p in parts)
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


def pm_probability(hop_count: float, radius: int, max_distance: int, variant: str) -> float:
    """Probability that a candidate at the given walk hop count becomes a contact.

    pm1 ramps linearly from 0 at the neighborhood radius to 1 at the maximum
    contact distance; pm2 ramps from 0 at twice the radius instead. Outside
    the ramp the value clamps to [0, 1].
    """
    if variant == "pm1":
        low = radius
    elif variant == "pm2":
        low = 2 * radius
    else:
        raise ValueError(f"unknown PM variant: {variant}")
    if max_distance <= low:
        raise ValueError("max contact distance must exceed the ramp start")
    p = (hop_count - low) / (max_distance - low)
    return min(1.0, max(0.0, p))


def overlap_hit(
    candidate: int, candidate_table: NeighborhoodTable, targets: frozenset[int]
) -> bool:
    """True when the candidate, or anything in its neighborhood, is a target."""
    return candidate in targets or not targets.isdisjoint(candidate_table.member_set)


def em_accept(
    candidate: int,
    candidate_table: NeighborhoodTable,
    source: int,
    contact_ids: frozenset[int],
    edge_ids: frozenset[int],
) -> bool:
    """Edge-method acceptance: the candidate's neighborhood (candidate included)
    must avoid the source, every selected contact, and every edge node of the
    source. This forces the candidate beyond 2R hops from the source."""
    targets = frozenset({source}) | contact_ids | edge_ids
    return not overlap_hit(candidate, candidate_table, targets)


@dataclass(frozen=True)
class ContactEntry:
    contact: int
    source_path: tuple[int, ...]
    selected_at: float
    last_validated: float

    def path_hops(self) -> int:
        return len(self.source_path) - 1


@dataclass
class ContactSelectionQuery:
    """State of one CSQ walk. hop_count is the walk depth, not graph distance."""

    source: int
    query_id: int
    contact_ids: frozenset[int]
    edge_ids: frozenset[int]
    traversal_stack: list[int]
    visited: set[int] = field(default_factory=set)

    def __post_init__(self) -> None:
        self.visited.update(self.traversal_stack)

    @property
    def hop_count(self) -> int:
        return len(self.traversal_stack) - 1

    @property
    def current(self) -> int:
        return self.traversal_stack[-1]


ACCEPT = "accept"
FORWARD = "forward"
BACKTRACK = "backtrack"


def csq_step(
    csq: ContactSelectionQuery,
    tables: list[NeighborhoodTable],
    graph: ConnectivityGraph,
    method: str,
    config: ScenarioConfig,
    rng: random.Random,
    evaluate_acceptance: bool = True,
) -> tuple[str, int | None]:
    """Decide the CSQ's next move at the top of its traversal stack.

    Acceptance is evaluated only on first arrival at a node; a walk returning
    by backtrack goes straight to picking another unvisited neighbor.
    """
    current = csq.current
    if evaluate_acceptance and _accepts(csq, tables[current], method, config, rng):
        return ACCEPT, None
    if csq.hop_count < config.max_contact_distance:
        unvisited = [n for n in graph.adjacency[current] if n not in csq.visited]
        if unvisited:
            return FORWARD, rng.choice(unvisited)
    return BACKTRACK, None


def _accepts(
    csq: ContactSelectionQuery,
    candidate_table: NeighborhoodTable,
    method: str,
    config: ScenarioConfig,
    rng: random.Random,
) -> bool:
    candidate = csq.current
    if method == "em":
        return em_accept(candidate, candidate_table, csq.source, csq.contact_ids, csq.edge_ids)
    # PM: the containment test comes first; the Bernoulli draw happens only
    # for non-overlapping candidates, so rejected nodes consume no randomness.
    targets = frozenset({csq.source}) | csq.contact_ids
    if overlap_hit(candidate, candidate_table, targets):
        return False
    p = pm_probability(
        csq.hop_count, config.neighborhood_radius, config.max_contact_distance, method
    )
    return rng.random() < p


def run_csq(
    net: Network,
    tables: list[NeighborhoodTable],
    source: int,
    edge: int,
    contact_ids: frozenset[int],
    method: str,
    config: ScenarioConfig,
    rng: random.Random,
    query_id: int,
    now: float,
) -> ContactEntry | None:
    """Drive one CSQ through an edge node until a contact is found or the walk
    exhausts. Forward hops charge selection traffic, pops charge backtrack
    traffic, and a successful walk is answered along the reverse stack."""
    table = tables[source]
    route = table.route_to(edge)
    for i in range(len(route) - 1):
        net.send(route[i], route[i + 1], "selection_csq_hops")
    csq = ContactSelectionQuery(
        source=source,
        query_id=query_id,
        contact_ids=contact_ids,
        edge_ids=frozenset(table.edge_nodes),
        traversal_stack=list(route),
    )
    fresh = True
    while True:
        decision, nxt = csq_step(csq, tables, net.graph, method, config, rng, fresh)
        if decision == ACCEPT:
            stack = csq.traversal_stack
            for i in range(len(stack) - 1, 0, -1):
                net.send(stack[i], stack[i - 1], "selection_csq_hops")
            return ContactEntry(csq.current, tuple(stack), now, now)
        if decision == FORWARD:
            net.send(csq.current, nxt, "selection_csq_hops")
            csq.traversal_stack.append(nxt)
            csq.visited.add(nxt)
            fresh = True
        else:
            if len(csq.traversal_stack) == 1:
                return None
            net.send(csq.current, csq.traversal_stack[-2], "backtrack_hops")
            csq.traversal_stack.pop()
            fresh = False


def select_contacts(
    net: Network,
    tables: list[NeighborhoodTable],
    source: int,
    existing: list[ContactEntry],
    method: str,
    config: ScenarioConfig,
    run_seed: int,
    selection_round: int,
    now: float,
) -> list[ContactEntry]:
    """Issue CSQs through the source's edge nodes, in ascending NodeId order and
    one at a time, until the contact quota is met or the edge nodes run out.
    Each CSQ sees the contact list as updated by the ones before it."""
    quota = config.max_contacts
    contact_ids = {entry.contact for entry in existing}
    selected: list[ContactEntry] = []
    if len(contact_ids) >= quota:
        return selected
    for edge in tables[source].edge_nodes:
        if len(contact_ids) >= quota:
            break
        rng = random.Random(derive_seed(run_seed, "csq", selection_round, source, edge))
        entry = run_csq(
            net,
            tables,
            source,
            edge,
            frozenset(contact_ids),
            method,
            config,
            rng,
            query_id=derive_seed(run_seed, "qid", selection_round, source, edge),
            now=now,
        )
        if entry is not None:
            selected.append(entry)
            contact_ids.add(entry.contact)
    return selected


def local_recovery(
    detector_table: NeighborhoodTable, path: tuple[int, ...], break_index: int
) -> tuple[int, ...] | None:
    """Repair a broken contact path at the detecting node.

    The detector scans the stored path just past the break, nearest node
    first, for the first one inside its own neighborhood, and splices its
    route to that node into the path. Returns None when nothing past the
    break is in reach, which loses the contact.
    """
    detector = path[break_index]
    for j in range(break_index + 1, len(path)):
        node = path[j]
        if node == detector:
            return path[: break_index + 1] + path[j + 1 :]
        if detector_table.contains(node):
            route = detector_table.route_to(node)
            return path[: break_index + 1] + route[1:] + path[j + 1 :]
    return None


VALID = "valid"
REPAIRED = "repaired"
LOST_BREAK = "lost_break"
LOST_RANGE = "lost_range"


@dataclass(frozen=True)
class ValidationResult:
    status: str
    path: tuple[int, ...]

    @property
    def kept(self) -> bool:
        return self.status in (VALID, REPAIRED)


def validate_contact(
    net: Network,
    tables: list[NeighborhoodTable],
    entry: ContactEntry,
    config: ScenarioConfig,
) -> ValidationResult:
    """Walk the stored path hop by hop against the current snapshot, repairing
    breaks locally where possible. A path that survives must still be between
    2R+1 and r hops long; the answer returns along the validated path."""
    path = list(entry.source_path)
    i = 0
    repaired = False
    while i < len(path) - 1:
        if net.send(path[i], path[i + 1], "maintenance_hops"):
            i += 1
            continue
        spliced = local_recovery(tables[path[i]], tuple(path), i)
        if spliced is None:
            return ValidationResult(LOST_BREAK, tuple(path[: i + 1]))
        repaired = True
        path = list(spliced)
    hops = len(path) - 1
    low = 2 * config.neighborhood_radius + 1
    if not low <= hops <= config.max_contact_distance:
        return ValidationResult(LOST_RANGE, tuple(path))
    for j in range(len(path) - 1, 0, -1):
        net.send(path[j], path[j - 1], "maintenance_hops")
    return ValidationResult(REPAIRED if repaired else VALID, tuple(path))


def validate_contacts(
    net: Network,
    tables: list[NeighborhoodTable],
    source: int,
    entries: list[ContactEntry],
    config: ScenarioConfig,
    now: float,
) -> tuple[list[ContactEntry], list[tuple]]:
    """Validate each stored contact in order. Lost contacts drop immediately;
    kept ones carry their possibly repaired path. Returns the surviving
    entries plus census rows (time_s, node, contact, path_hops, status)."""
    kept: list[ContactEntry] = []
    rows: list[tuple] = []
    for entry in entries:
        result = validate_contact(net, tables, entry, config)
        rows.append((now, source, entry.contact, len(result.path) - 1, result.status))
        if result.kept:
            kept.append(
                ContactEntry(entry.contact, result.path, entry.selected_at, now)
            )
    return kept, rows
