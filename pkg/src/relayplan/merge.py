"""Surplus pruning and greedy cross-demand path merging.

Pruning deletes the longest paths of a demand while the remaining measured
flow still exceeds its requirement.  Merging reroutes a guest path of one
demand onto a nearby host path of another: the guest enters the host by the
shortest connection, rides the host's relays (shared, counted once) and
exits near where its own course resumes.  A merge is kept only when it
shortens the built length, does not add relays, and the re-measured flows
still satisfy every requirement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RequirementInfeasibleError
from .geometry import (
    GEOM_TOL,
    Point,
    Polyline,
    cumulative_arcs,
    dist,
    point_to_polyline_distance,
    points_to_polyline_distance,
    polyline,
    polyline_length,
    sample_polyline,
)
from .model import PlacementPlan, PlannedPath
from .multi import schedule_plan


@dataclass(frozen=True)
class SurplusReport:
    """Flow a demand still has to spare after pruning."""

    demand_id: str
    surplus: float


@dataclass(frozen=True)
class MergeCandidate:
    """One entry of the sampled distance matrix between two demands' paths."""

    demands: tuple[str, str]
    path_indices: tuple[int, int]
    distance: float


@dataclass
class MergeOutcome:
    plan: PlacementPlan
    surplus: list[SurplusReport]
    merged_pairs: list[tuple[tuple[str, int], tuple[str, int]]]


def prune_surplus(
    plan: PlacementPlan, requirements: dict[str, float]
) -> tuple[PlacementPlan, list[SurplusReport]]:
    """Delete each demand's longest paths while the rest still exceeds its need.

    Flows are the measured per-path values carried by the plan.  Raises
    RequirementInfeasibleError when a requirement exceeds the demand's
    achieved flow; callers decide whether to cap or abort.
    """
    work = plan.clone()
    reports: list[SurplusReport] = []
    for demand in work.demands:
        req = requirements[demand.id]
        paths = work.paths[demand.id]
        achieved = sum(p.achieved_flow for p in paths)
        if req > achieved + GEOM_TOL:
            raise RequirementInfeasibleError(demand.id, req, achieved)
        while len(paths) > 1:
            longest = max(paths, key=lambda p: (polyline_length(p.geometry), p.index))
            if achieved - longest.achieved_flow > req + 1e-12:
                paths.remove(longest)
                achieved -= longest.achieved_flow
            else:
                break
        work.achieved[demand.id] = achieved
        reports.append(SurplusReport(demand_id=demand.id, surplus=achieved - req))
    return work, reports


def avg_path_distance(p1: Polyline, p2: Polyline, step: float) -> float:
    """Mean sample-to-path distance, symmetrized over both directions."""
    if step <= 0.0:
        raise ValueError("sampling step must be positive")
    s1 = np.array([(p.x, p.y) for p in sample_polyline(p1, step)])
    s2 = np.array([(p.x, p.y) for p in sample_polyline(p2, step)])
    d12 = points_to_polyline_distance(s1, p2).mean()
    d21 = points_to_polyline_distance(s2, p1).mean()
    return float((d12 + d21) / 2.0)


@dataclass(frozen=True)
class _Junctions:
    """Where the guest leaves its course, rides the host, and returns."""

    guest_enter: int   # guest vertex index d_k1
    guest_exit: int    # guest vertex index d_k2
    host_enter: int    # host vertex index closest to d_k1
    host_exit: int     # host vertex index closest to d_k2


def _find_junctions(
    host: PlannedPath, guest: PlannedPath, plan: PlacementPlan
) -> _Junctions | None:
    """Locate the guest's close approach to the host and pick junction nodes.

    The guest is sampled at half the hop spacing; the junctions bracket the
    contiguous-by-extremes window where it comes within the interference
    range of the host (the merge-benefit threshold) and are snapped outward
    to existing guest relays.  Returns None when there is no such window or
    it collapses.
    """
    r = plan.config.r
    samples = sample_polyline(guest.geometry, r / 2.0)
    pts = np.array([(p.x, p.y) for p in samples])
    dists = points_to_polyline_distance(pts, host.geometry)
    close = np.nonzero(dists < plan.config.R)[0]
    if close.size == 0:
        return None
    sample_arcs = cumulative_arcs(polyline(samples)) if len(samples) > 1 else np.array([0.0])
    t1 = float(sample_arcs[close[0]])
    t2 = float(sample_arcs[close[-1]])

    guest_arcs = cumulative_arcs(guest.geometry)
    enter = int(np.searchsorted(guest_arcs, t1 + GEOM_TOL, side="right")) - 1
    exit_ = int(np.searchsorted(guest_arcs, t2 - GEOM_TOL, side="left"))
    enter = max(enter, 0)
    exit_ = min(exit_, len(guest.node_ids) - 1)
    if enter >= exit_:
        return None

    host_pts = host.geometry.vertices

    def nearest_host_vertex(p: Point) -> int:
        return min(range(len(host_pts)), key=lambda i: (dist(p, host_pts[i]), i))

    h1 = nearest_host_vertex(guest.geometry.vertices[enter])
    h2 = nearest_host_vertex(guest.geometry.vertices[exit_])
    if h1 == h2:
        return None
    return _Junctions(guest_enter=enter, guest_exit=exit_, host_enter=h1, host_exit=h2)


def _required_share(
    path: PlannedPath, requirements: dict[str, float], plan: PlacementPlan
) -> float:
    """Flow this path must carry for its demand's requirement to hold."""
    req = requirements[path.demand_id]
    others = plan.achieved[path.demand_id] - path.achieved_flow
    return max(0.0, req - others)


def is_mergable(
    host: PlannedPath,
    guest: PlannedPath,
    requirements: dict[str, float],
    plan: PlacementPlan,
) -> bool:
    """True when rerouting the guest over the host shortens the build and fits.

    Condition (i): entering plus exiting the host costs less than the guest
    length it replaces.  Condition (ii): the host pipe has slot capacity for
    both demands' required shares.
    """
    if host.demand_id == guest.demand_id:
        return False
    junctions = _find_junctions(host, guest, plan)
    if junctions is None:
        return False
    d1 = point_to_polyline_distance(
        guest.geometry.vertices[junctions.guest_enter], host.geometry
    )
    d2 = point_to_polyline_distance(
        guest.geometry.vertices[junctions.guest_exit], host.geometry
    )
    guest_arcs = cumulative_arcs(guest.geometry)
    replaced = float(
        guest_arcs[junctions.guest_exit] - guest_arcs[junctions.guest_enter]
    )
    if not (d1 + d2 < replaced - GEOM_TOL):
        return False
    capacity = plan.config.f / host.distinct_slot_count()
    needed = _required_share(host, requirements, plan) + _required_share(
        guest, requirements, plan
    )
    return needed <= capacity + GEOM_TOL


def merge_pair(
    plan: PlacementPlan, host: PlannedPath, guest: PlannedPath
) -> tuple[PlacementPlan, Polyline, tuple[int, ...]]:
    """Reroute the guest over the host on a copy of the plan.

    Returns the new plan, the merged guest geometry, and the shared host
    node ids (relays counted once because both paths reference them).  The
    returned plan is unscheduled; callers re-run slot assignment.
    """
    junctions = _find_junctions(host, guest, plan)
    if junctions is None:
        raise ValueError("paths have no merge window")
    work = plan.clone()
    host_w = next(p for p in work.paths[host.demand_id] if p.index == host.index)
    guest_w = next(p for p in work.paths[guest.demand_id] if p.index == guest.index)

    if junctions.host_enter <= junctions.host_exit:
        shared_ids = host_w.node_ids[junctions.host_enter : junctions.host_exit + 1]
    else:
        shared_ids = tuple(
            reversed(host_w.node_ids[junctions.host_exit : junctions.host_enter + 1])
        )

    prefix = list(guest_w.node_ids[: junctions.guest_enter + 1])
    suffix = list(guest_w.node_ids[junctions.guest_exit :])

    def connector(a_id: int, b_id: int) -> list[int]:
        """New relay ids subdividing the straight hop a->b at spacing <= r."""
        a, b = work.nodes[a_id], work.nodes[b_id]
        gap = dist(a, b)
        if gap <= 1e-12:
            return []
        hops = max(1, math.ceil((gap - GEOM_TOL) / work.config.r))
        ids = []
        for k in range(1, hops):
            t = k / hops
            work.nodes.append(Point(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)))
            ids.append(len(work.nodes) - 1)
        return ids

    new_ids = list(prefix)
    new_ids.extend(connector(prefix[-1], shared_ids[0]))
    for nid in shared_ids:
        if work.nodes[new_ids[-1]] != work.nodes[nid]:
            new_ids.append(nid)
    new_ids.extend(connector(new_ids[-1], suffix[0]))
    for nid in suffix:
        if work.nodes[new_ids[-1]] != work.nodes[nid]:
            new_ids.append(nid)

    geometry = polyline([work.nodes[i] for i in new_ids])
    guest_w.node_ids = tuple(new_ids)
    guest_w.geometry = geometry
    guest_w.slots = None
    guest_w.achieved_flow = None
    return work, geometry, shared_ids


def merge_paths(
    plan: PlacementPlan,
    requirements: dict[str, float | None],
    *,
    best_effort: bool = False,
) -> MergeOutcome:
    """Prune surplus paths, then greedily merge nearby paths across demands.

    Demands are ordered by descending surplus; for each ordered pair the
    sampled distance matrix drives the greedy scan, which stops at the first
    unmergable minimum.  Every accepted merge is re-scheduled and re-measured;
    one that breaks a requirement, lengthens the build, or adds relays is
    rolled back and ends the pair's scan.
    """
    work = plan.clone()
    effective: dict[str, float] = {}
    for demand in work.demands:
        req = requirements.get(demand.id)
        achieved = work.achieved[demand.id]
        if req is None:
            effective[demand.id] = achieved
        elif req > achieved + GEOM_TOL:
            if not best_effort:
                raise RequirementInfeasibleError(demand.id, req, achieved)
            effective[demand.id] = achieved
        else:
            effective[demand.id] = req

    work, surplus = prune_surplus(work, effective)

    by_surplus = sorted(
        range(len(work.demands)), key=lambda i: -surplus[i].surplus
    )
    ordered_ids = [work.demands[i].id for i in by_surplus]

    step = work.config.r / 2.0
    merged_keys: set[tuple[str, int]] = set()
    merged_pairs: list[tuple[tuple[str, int], tuple[str, int]]] = []

    for qi in range(len(ordered_ids)):
        for ui in range(qi + 1, len(ordered_ids)):
            q_id, u_id = ordered_ids[qi], ordered_ids[ui]
            rows = [p for p in work.paths[q_id] if p.key not in merged_keys]
            cols = [p for p in work.paths[u_id] if p.key not in merged_keys]
            if not rows or not cols:
                continue
            matrix = {
                (hp.index, gp.index): avg_path_distance(hp.geometry, gp.geometry, step)
                for hp in rows
                for gp in cols
            }
            excluded_rows: set[int] = set()
            excluded_cols: set[int] = set()
            while True:
                candidates = [
                    (d, ij)
                    for ij, d in matrix.items()
                    if ij[0] not in excluded_rows and ij[1] not in excluded_cols
                ]
                if not candidates:
                    break
                _, (aq, au) = min(candidates, key=lambda c: (c[0], c[1]))
                excluded_rows.add(aq)
                excluded_cols.add(au)
                host = next(p for p in work.paths[q_id] if p.index == aq)
                guest = next(p for p in work.paths[u_id] if p.index == au)
                if not is_mergable(host, guest, effective, work):
                    break
                candidate, _, _ = merge_pair(work, host, guest)
                schedule_plan(candidate)
                ok = (
                    all(
                        candidate.achieved[d.id] >= effective[d.id] - GEOM_TOL
                        for d in candidate.demands
                    )
                    and candidate.relay_count() <= work.relay_count()
                    and candidate.total_length() < work.total_length() - GEOM_TOL
                )
                if not ok:
                    break
                work = candidate
                merged_keys.add(host.key)
                merged_keys.add(guest.key)
                merged_pairs.append((host.key, guest.key))

    return MergeOutcome(plan=work, surplus=surplus, merged_pairs=merged_pairs)
