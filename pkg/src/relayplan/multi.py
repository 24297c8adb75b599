"""Multi-demand planner: per-demand geometry, then global slot assignment.

Geometry is planned per demand in isolation and never reconstructed;
cross-demand interference is handled purely by slot assignment.  For each
path the node with the heaviest weighted interference set gates the path:
links transmitted by that set get the lowest non-conflicting slots and the
rest of the path cycles through the same slot set, growing it only when
reuse is impossible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ScheduleConsistencyError, SeparationError
from .geometry import GEOM_TOL, Point
from .model import (
    Demand,
    Link,
    PlacementPlan,
    PlannedPath,
    RadioConfig,
    weighted_cardinality,
)
from .single import best_configuration


@dataclass(frozen=True)
class PathInterferenceReport:
    """The gating node of a path and the flow its interference set allows."""

    demand_id: str
    path_index: int
    node: int                      # gating node id (heaviest interference)
    weights: dict[int, int]        # interfering transmitter id -> multiplicity
    cardinality: int               # sum of multiplicities
    realized_flow: float


@dataclass
class _InterferenceIndex:
    """Precomputed arrays for weighted interference queries over a fixed plan."""

    tx_ids: list[int]
    tx_pos: np.ndarray             # (T, 2)
    tx_weight: np.ndarray          # (T,)
    row_of: dict[int, int]

    @classmethod
    def build(cls, plan: PlacementPlan) -> "_InterferenceIndex":
        tx_ids = sorted(plan.transmitter_ids())
        pos = plan.positions()
        endpoint_ids = plan.endpoint_ids()
        degree: dict[int, int] = {}
        for path in plan.all_paths():
            for node in (path.node_ids[0], path.node_ids[-1]):
                degree[node] = degree.get(node, 0) + 1
        weight = np.array(
            [degree.get(i, 1) if i in endpoint_ids else 1 for i in tx_ids],
            dtype=float,
        )
        return cls(
            tx_ids=tx_ids,
            tx_pos=pos[tx_ids],
            tx_weight=weight,
            row_of={node: row for row, node in enumerate(tx_ids)},
        )


def heaviest_interference(
    path: PlannedPath, plan: PlacementPlan, index: _InterferenceIndex | None = None
) -> PathInterferenceReport:
    """Scan the path's transmitters from source to destination for the gate.

    Every node except the destination transmits.  The weighted interference
    set of a node counts the transmitters within R, with pre-deployed
    endpoints counted once per path that connects them.  Ties go to the node
    encountered first.
    """
    if index is None:
        index = _InterferenceIndex.build(plan)
    tx_nodes = path.node_ids[:-1]
    pos = plan.positions()[list(tx_nodes)]
    d2 = ((pos[:, None, :] - index.tx_pos[None, :, :]) ** 2).sum(axis=2)
    limit2 = (plan.config.R + GEOM_TOL) ** 2
    mask = d2 <= limit2
    for i, node in enumerate(tx_nodes):
        mask[i, index.row_of[node]] = False
    totals = (mask * index.tx_weight[None, :]).sum(axis=1)
    best = int(np.argmax(totals))
    gate = tx_nodes[best]
    cols = np.nonzero(mask[best])[0]
    weights = {index.tx_ids[c]: int(index.tx_weight[c]) for c in cols}
    cardinality = weighted_cardinality(weights)
    realized = plan.config.f / max(cardinality, 1)
    return PathInterferenceReport(
        demand_id=path.demand_id,
        path_index=path.index,
        node=gate,
        weights=weights,
        cardinality=cardinality,
        realized_flow=realized,
    )


class _SlotState:
    """Mutable slot assignment shared across paths during scheduling."""

    def __init__(self, plan: PlacementPlan):
        self.plan = plan
        self.positions = plan.nodes
        self.R = plan.config.R
        self.label_links: dict[int, list[Link]] = {}
        self.label_nodes: dict[int, set[int]] = {}
        self.label_tx: dict[int, list[tuple[float, float]]] = {}
        self.slot_of: dict[Link, int] = {}
        # A link shared by merged paths appears in several paths; keep owners.
        self.owners: dict[Link, list[tuple[PlannedPath, int]]] = {}
        for path in plan.all_paths():
            path.slots = [0] * (len(path.node_ids) - 1)
            for k, link in enumerate(path.links):
                self.owners.setdefault(link, []).append((path, k))

    def conflicts(self, link: Link, label: int) -> bool:
        nodes = self.label_nodes.get(label)
        if not nodes:
            return False
        if link.tx in nodes or link.rx in nodes:
            return True
        tx = self.positions[link.tx]
        limit = self.R + GEOM_TOL
        return any(
            math.hypot(tx.x - x, tx.y - y) <= limit for x, y in self.label_tx[label]
        )

    def assign(self, link: Link, label: int) -> None:
        self.slot_of[link] = label
        self.label_links.setdefault(label, []).append(link)
        self.label_nodes.setdefault(label, set()).update((link.tx, link.rx))
        tx = self.positions[link.tx]
        self.label_tx.setdefault(label, []).append((tx.x, tx.y))
        for path, k in self.owners[link]:
            path.slots[k] = label

    def lowest_free(self, link: Link) -> int:
        label = 1
        while self.conflicts(link, label):
            label += 1
        return label


def _ordered_links(plan: PlacementPlan) -> tuple[list[Link], dict[int, list[Link]]]:
    """All links in (demand, path, hop) order plus a transmitter -> links map."""
    ordered: list[Link] = []
    by_tx: dict[int, list[Link]] = {}
    seen: set[Link] = set()
    for path in plan.all_paths():
        for link in path.links:
            if link in seen:
                continue
            seen.add(link)
            ordered.append(link)
            by_tx.setdefault(link.tx, []).append(link)
    return ordered, by_tx


def assign_slots(
    path: PlannedPath,
    report: PathInterferenceReport,
    state: _SlotState,
    by_tx: dict[int, list[Link]],
    order_key: dict[Link, int],
) -> None:
    """Slot the path per its interference report.

    Unassigned links transmitted by the gate and its interference set take
    the lowest non-conflicting slots; the remaining links of the path cycle
    through that slot set, falling back to the lowest free slot (growing the
    period) only when no reuse works.
    """
    cluster_nodes = sorted(set(report.weights) | {report.node})
    cluster_links = [
        link for node in cluster_nodes for link in by_tx.get(node, ())
    ]
    # Deterministic: visit cluster links in (demand, path, hop) plan order.
    for link in sorted(cluster_links, key=order_key.__getitem__):
        if link not in state.slot_of:
            state.assign(link, state.lowest_free(link))

    palette = sorted({state.slot_of[link] for link in cluster_links})
    prev: int | None = None
    for k, link in enumerate(path.links):
        existing = state.slot_of.get(link)
        if existing is not None:
            prev = existing
            continue
        label = None
        if palette:
            if prev in palette:
                start = (palette.index(prev) + 1) % len(palette)
            else:
                start = 0
            for step in range(len(palette)):
                candidate = palette[(start + step) % len(palette)]
                if not state.conflicts(link, candidate):
                    label = candidate
                    break
        if label is None:
            label = state.lowest_free(link)
            palette = sorted(set(palette) | {label})
        state.assign(link, label)
        prev = label


def schedule_plan(
    plan: PlacementPlan, order: list[str] | None = None
) -> dict[tuple[str, int], PathInterferenceReport]:
    """Assign slots to every path of the plan (wiping any existing schedule).

    Demands are processed in ``order`` (input order by default); each path
    gets its interference report against the whole plan, then its slots.
    The emitted schedule is re-checked with the independent validator and a
    conflict aborts planning, since it would mean a planner bug.
    """
    from . import validator

    ordered, by_tx = _ordered_links(plan)
    order_key = {link: i for i, link in enumerate(ordered)}

    state = _SlotState(plan)
    index = _InterferenceIndex.build(plan)
    demand_ids = order if order is not None else [d.id for d in plan.demands]
    reports: dict[tuple[str, int], PathInterferenceReport] = {}
    for demand_id in demand_ids:
        realized_total = 0.0
        for path in plan.paths[demand_id]:
            report = heaviest_interference(path, plan, index)
            assign_slots(path, report, state, by_tx, order_key)
            reports[path.key] = report
            realized_total += report.realized_flow
        plan.analytic.setdefault(demand_id, {})["realized_flow"] = realized_total
    plan.refresh_achieved()

    violations = validator.validate(plan)
    if violations:
        raise ScheduleConsistencyError(
            f"planner emitted {len(violations)} conflicting slot assignments; "
            f"first: {violations[0]}"
        )
    return reports


def plan_demands(
    demands: list[Demand], config: RadioConfig, order: list[str] | None = None
) -> PlacementPlan:
    """Plan every demand: per-demand geometry, then one global slot schedule."""
    ids = [d.id for d in demands]
    if len(set(ids)) != len(ids):
        raise ValueError("demand ids must be unique")
    minimum = 2.0 * config.R
    for demand in demands:
        if demand.separation < minimum - GEOM_TOL:
            raise SeparationError(demand.id, demand.separation, minimum)

    geometries: dict[str, list] = {}
    analytic: dict[str, dict] = {}
    for demand in demands:
        flow, best_c, profile, paths = best_configuration(demand, config)
        geometries[demand.id] = paths
        analytic[demand.id] = {
            "max_flow": flow,
            "path_count": best_c,
            "max_slots": profile.max_slots,
        }

    plan = _assemble(demands, geometries, config)
    plan.analytic = analytic
    schedule_plan(plan, order)
    return plan


def _assemble(
    demands: list[Demand], geometries: dict[str, list], config: RadioConfig
) -> PlacementPlan:
    """Build the shared node table; equal endpoint positions share one node."""
    nodes: list[Point] = []
    by_position: dict[tuple[float, float], int] = {}

    def endpoint_id(pt: Point) -> int:
        key = (pt.x, pt.y)
        if key not in by_position:
            nodes.append(pt)
            by_position[key] = len(nodes) - 1
        return by_position[key]

    endpoints = {
        d.id: (endpoint_id(d.src), endpoint_id(d.dest)) for d in demands
    }
    paths: dict[str, list[PlannedPath]] = {}
    for demand in demands:
        src_id, dest_id = endpoints[demand.id]
        demand_paths = []
        for idx, geom in enumerate(geometries[demand.id]):
            ids = [src_id]
            for pt in geom.vertices[1:-1]:
                nodes.append(pt)
                ids.append(len(nodes) - 1)
            ids.append(dest_id)
            demand_paths.append(
                PlannedPath(
                    demand_id=demand.id, index=idx, node_ids=tuple(ids), geometry=geom
                )
            )
        paths[demand.id] = demand_paths
    return PlacementPlan(
        config=config,
        demands=list(demands),
        nodes=nodes,
        endpoints=endpoints,
        paths=paths,
    )
