"""Independent schedule oracle: conflict replay and token-flow measurement.

This module never reuses the planners' analytic flow formulas.  Conflicts
are found by exhaustively replaying every slot; flows are measured by
pushing tokens hop by hop through each path's own slot cycle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidScheduleError
from .geometry import GEOM_TOL, dist
from .model import Link, PlacementPlan, PlannedPath, links_conflict


@dataclass(frozen=True)
class Violation:
    """Two links that share a slot but may not: shared node or transmitters within R."""

    slot: int
    links: tuple[Link, Link]
    distance: float  # transmitter-to-transmitter distance of the offending pair


@dataclass(frozen=True)
class FlowMeasurement:
    """Measured end-to-end rate for one demand, in flow units per slot."""

    demand_id: str
    flow: float


def validate(plan: PlacementPlan) -> list[Violation]:
    """Exhaustively check every pair of same-slot links for conflicts.

    An empty result certifies the schedule.  The check is label-based and
    black-box: it only looks at slot equality and node positions, never at
    how the planner chose the slots.
    """
    assignment = plan.slot_assignment()
    by_slot: dict[int, list[Link]] = {}
    for link, slot in assignment.items():
        by_slot.setdefault(slot, []).append(link)

    positions = plan.nodes
    violations: list[Violation] = []
    for slot in sorted(by_slot):
        group = by_slot[slot]
        n = len(group)
        if n < 2:
            continue
        tx = np.array([(positions[l.tx].x, positions[l.tx].y) for l in group])
        ends = np.array([(l.tx, l.rx) for l in group])
        d2 = ((tx[:, None, :] - tx[None, :, :]) ** 2).sum(axis=2)
        near = d2 <= (plan.config.R + GEOM_TOL) ** 2
        shared = (
            (ends[:, None, 0] == ends[None, :, 0])
            | (ends[:, None, 0] == ends[None, :, 1])
            | (ends[:, None, 1] == ends[None, :, 0])
            | (ends[:, None, 1] == ends[None, :, 1])
        )
        bad = near | shared
        for i in range(n):
            for j in range(i + 1, n):
                if bad[i, j]:
                    violations.append(
                        Violation(
                            slot=slot,
                            links=(group[i], group[j]),
                            distance=dist(
                                positions[group[i].tx], positions[group[j].tx]
                            ),
                        )
                    )
    return violations


def _simulate_path(path: PlannedPath, f: float, warmup: int, periods: int) -> float:
    """Token replay of one path over its own slot cycle.

    The path's links fire once per cycle at the rank of their slot label in
    the path's distinct label set; one token of size f enters per cycle.
    Links sharing a tick are advanced downstream first so a token moves one
    hop per firing of its current link.  The warm-up is stretched to the hop
    count so pipelines reach equilibrium before measurement.
    """
    slots = path.slots
    if not slots:
        return 0.0
    distinct = sorted(set(slots))
    cycle = len(distinct)
    rank = {label: i + 1 for i, label in enumerate(distinct)}
    ranks = [rank[s] for s in slots]
    hops = len(slots)

    buffers = [0] * (hops + 1)
    warm = max(warmup, hops)
    delivered = 0
    for frame in range(warm + periods):
        buffers[0] += 1
        for tick in range(1, cycle + 1):
            for k in reversed(range(hops)):
                if ranks[k] == tick and buffers[k] > 0:
                    buffers[k] -= 1
                    buffers[k + 1] += 1
        if frame >= warm:
            delivered += buffers[hops]
        buffers[hops] = 0
    return delivered * f / (periods * cycle)


def simulate_flow(
    plan: PlacementPlan, warmup: int = 3, periods: int = 10
) -> list[FlowMeasurement]:
    """Measure per-demand end-to-end delivery rates by token replay.

    Requires a certified schedule (no validator violations).  Each path is
    replayed over its own slot-reuse cycle; a demand's flow is the sum over
    its paths.  The replay is deterministic: identical plans give
    bit-identical measurements.
    """
    violations = validate(plan)
    if violations:
        raise InvalidScheduleError(
            f"cannot measure flow of a conflicted schedule ({len(violations)} violations)"
        )
    out = []
    for demand in plan.demands:
        total = 0.0
        for path in plan.paths[demand.id]:
            total += _simulate_path(path, plan.config.f, warmup, periods)
        out.append(FlowMeasurement(demand_id=demand.id, flow=total))
    return out
