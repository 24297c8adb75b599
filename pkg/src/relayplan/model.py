"""Radio configuration, interference predicates, and plan data structures.

The interference model is the slotted protocol model: a hop succeeds when it
is no longer than the transmission range r and no other node transmitting in
the same slot is within the interference range R of the transmitter.  Two
links therefore conflict (may not share a slot) when they share a node or
their transmitters are within R of each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Sequence

import numpy as np

from .geometry import GEOM_TOL, Point, Polyline, dist, polyline_length


@dataclass(frozen=True)
class RadioConfig:
    """Radio parameters shared by every node.

    r: transmission range (m); R: interference range (m), R >= r;
    f: flow deliverable over one link in one slot; C: maximum number of
    paths the planner may build for a single demand.
    """

    r: float
    R: float
    f: float = 1.0
    C: int = 8

    def __post_init__(self) -> None:
        if not (self.r > 0.0):
            raise ValueError("transmission range r must be positive")
        if self.R < self.r - GEOM_TOL:
            raise ValueError("interference range R must be at least r")
        if not (self.f > 0.0):
            raise ValueError("per-slot flow f must be positive")
        if self.C < 1:
            raise ValueError("maximum path count C must be at least 1")

    @property
    def interference_span(self) -> int:
        """Number of whole r-hops covered by R: the j with R in [j*r, (j+1)*r)."""
        return interference_span(self)


def interference_span(config: RadioConfig) -> int:
    """The unique positive integer j with j*r <= R < (j+1)*r.

    The lower boundary is inclusive with 1e-9 m slack, so R = j*r exactly
    maps to j.
    """
    if config.R < config.r - GEOM_TOL:
        raise ValueError("interference range R must be at least r")
    return max(1, int(math.floor((config.R + GEOM_TOL) / config.r)))


@dataclass(frozen=True)
class Demand:
    """One routing demand: move flow from src to dest at required_flow units/slot."""

    id: str
    src: Point
    dest: Point
    required_flow: float | None = None

    def __post_init__(self) -> None:
        if self.src == self.dest:
            raise ValueError(f"demand {self.id}: source equals destination")
        if self.required_flow is not None and not (self.required_flow > 0.0):
            raise ValueError(f"demand {self.id}: required flow must be positive")

    @property
    def separation(self) -> float:
        return dist(self.src, self.dest)


@dataclass(frozen=True)
class Link:
    """Directed link between two node indices of a plan's node table."""

    tx: int
    rx: int

    def __post_init__(self) -> None:
        if self.tx == self.rx:
            raise ValueError("link endpoints must differ")

    def shares_node(self, other: "Link") -> bool:
        return (
            self.tx == other.tx
            or self.tx == other.rx
            or self.rx == other.tx
            or self.rx == other.rx
        )


def links_conflict(
    a: Link, b: Link, positions: Sequence[Point], R: float
) -> bool:
    """True when the two links may not share a time slot.

    Conflicts arise when the links share a node (half-duplex radios) or the
    two transmitters are within interference range of each other.
    """
    if a.shares_node(b):
        return True
    return dist(positions[a.tx], positions[b.tx]) <= R + GEOM_TOL


@dataclass
class SlotSchedule:
    """Periodic slot assignment; period equals the largest slot index in use."""

    period: int
    assignment: dict[Link, int]

    def __post_init__(self) -> None:
        if self.assignment:
            slots = self.assignment.values()
            if min(slots) < 1 or max(slots) != self.period:
                raise ValueError("schedule period must equal the maximum slot index")
        elif self.period != 0:
            raise ValueError("empty schedule must have period 0")


@dataclass
class PlannedPath:
    """One constructed path: ordered node ids plus per-link slot labels."""

    demand_id: str
    index: int
    node_ids: tuple[int, ...]
    geometry: Polyline
    slots: list[int] | None = None
    achieved_flow: float | None = None

    @property
    def links(self) -> tuple[Link, ...]:
        return tuple(
            Link(a, b) for a, b in zip(self.node_ids, self.node_ids[1:])
        )

    @property
    def key(self) -> tuple[str, int]:
        return (self.demand_id, self.index)

    def distinct_slot_count(self) -> int:
        if not self.slots:
            return 0
        return len(set(self.slots))

    def clone(self) -> "PlannedPath":
        return PlannedPath(
            demand_id=self.demand_id,
            index=self.index,
            node_ids=self.node_ids,
            geometry=self.geometry,
            slots=list(self.slots) if self.slots is not None else None,
            achieved_flow=self.achieved_flow,
        )


@dataclass
class PlacementPlan:
    """A full placement: node table, per-demand paths, slots and flows.

    ``nodes`` is the shared node table; paths reference it by index so that
    relays shared between merged paths are stored (and counted) once.
    ``achieved`` holds the measured per-demand flow; ``analytic`` keeps the
    planner's closed-form numbers for comparison.
    """

    config: RadioConfig
    demands: list[Demand]
    nodes: list[Point]
    endpoints: dict[str, tuple[int, int]]
    paths: dict[str, list[PlannedPath]]
    achieved: dict[str, float] = field(default_factory=dict)
    analytic: dict[str, dict] = field(default_factory=dict)

    # -- structure ---------------------------------------------------------

    def all_paths(self) -> list[PlannedPath]:
        out: list[PlannedPath] = []
        for demand in self.demands:
            out.extend(self.paths[demand.id])
        return out

    def demand(self, demand_id: str) -> Demand:
        for d in self.demands:
            if d.id == demand_id:
                return d
        raise KeyError(demand_id)

    def positions(self) -> np.ndarray:
        return np.array([(p.x, p.y) for p in self.nodes], dtype=float)

    def endpoint_ids(self) -> set[int]:
        out: set[int] = set()
        for src_id, dest_id in self.endpoints.values():
            out.add(src_id)
            out.add(dest_id)
        return out

    def transmitter_ids(self) -> set[int]:
        """Node ids that transmit at least one link."""
        out: set[int] = set()
        for path in self.all_paths():
            out.update(path.node_ids[:-1])
        return out

    def endpoint_degree(self, node_id: int) -> int:
        """Number of constructed paths that start or end at this node."""
        count = 0
        for path in self.all_paths():
            if path.node_ids[0] == node_id or path.node_ids[-1] == node_id:
                count += 1
        return count

    def relay_ids(self) -> set[int]:
        """Distinct relay node ids referenced by any path (shared counted once)."""
        endpoint_ids = self.endpoint_ids()
        out: set[int] = set()
        for path in self.all_paths():
            out.update(i for i in path.node_ids if i not in endpoint_ids)
        return out

    def relay_count(self) -> int:
        return len(self.relay_ids())

    def total_length(self) -> float:
        """Total built length; a link shared by merged paths is counted once."""
        seen: set[Link] = set()
        total = 0.0
        for path in self.all_paths():
            for link in path.links:
                if link not in seen:
                    seen.add(link)
                    total += dist(self.nodes[link.tx], self.nodes[link.rx])
        return total

    # -- schedule ----------------------------------------------------------

    def slot_assignment(self) -> dict[Link, int]:
        out: dict[Link, int] = {}
        for path in self.all_paths():
            if path.slots is None:
                raise ValueError("plan has unscheduled paths")
            for link, slot in zip(path.links, path.slots):
                prev = out.get(link)
                if prev is not None and prev != slot:
                    raise ValueError(f"link {link} carries two different slots")
                out[link] = slot
        return out

    def schedule(self) -> SlotSchedule:
        assignment = self.slot_assignment()
        period = max(assignment.values()) if assignment else 0
        return SlotSchedule(period=period, assignment=assignment)

    def refresh_achieved(self) -> None:
        """Recompute per-path and per-demand flows from the slot labels."""
        for demand in self.demands:
            total = 0.0
            for path in self.paths[demand.id]:
                distinct = path.distinct_slot_count()
                if distinct == 0:
                    raise ValueError("cannot measure flow of an unscheduled path")
                path.achieved_flow = self.config.f / distinct
                total += path.achieved_flow
            self.achieved[demand.id] = total

    def clone(self) -> "PlacementPlan":
        return PlacementPlan(
            config=self.config,
            demands=list(self.demands),
            nodes=list(self.nodes),
            endpoints=dict(self.endpoints),
            paths={d: [p.clone() for p in ps] for d, ps in self.paths.items()},
            achieved=dict(self.achieved),
            analytic={k: dict(v) for k, v in self.analytic.items()},
        )


def interference_set(node_id: int, plan: PlacementPlan) -> dict[int, int]:
    """Weighted set of transmitters within interference range of a node.

    Returns a map node id -> multiplicity.  Pre-deployed endpoints count once
    per constructed path that connects them; relays count once.  The node
    itself is excluded.
    """
    tx_ids = sorted(plan.transmitter_ids())
    if node_id not in tx_ids:
        raise ValueError(f"node {node_id} does not transmit in this plan")
    pos = plan.nodes
    centre = pos[node_id]
    limit = plan.config.R + GEOM_TOL
    endpoint_ids = plan.endpoint_ids()
    out: dict[int, int] = {}
    for m in tx_ids:
        if m == node_id:
            continue
        if dist(pos[m], centre) <= limit:
            out[m] = plan.endpoint_degree(m) if m in endpoint_ids else 1
    return out


def weighted_cardinality(weights: dict[int, int]) -> int:
    return sum(weights.values())
