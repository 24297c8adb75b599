"""Single-demand planner: analytic flow profile and multi-path construction.

For one source/destination pair the planner evaluates, for every candidate
path count c, how many slots the most congested node near an endpoint needs
(the interference profile), picks the c with the best per-period flow, and
builds c paths that leave the source at equal angular intervals.  Detours are
routed along an offset corridor (a stadium around the straight segment) so
their relays stay clear of previously built paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConstructionInfeasibleError, SeparationError
from .geometry import (
    GEOM_TOL,
    Point,
    Polyline,
    dist,
    place_relays,
    polyline,
    rotate,
)
from .model import (
    Demand,
    PlacementPlan,
    PlannedPath,
    RadioConfig,
    links_conflict,
)

# Extra clearance (in units of r) for corridor relays beyond the interference range.
CORRIDOR_MARGIN = 1e-3


@dataclass(frozen=True)
class InterferenceProfile:
    """Slot demand of the most congested endpoint-side node for a path count.

    slot_totals maps the gate offset (in whole hops from the endpoint) to the
    number of distinct slots needed around a gate there; max_slots is the
    worst case over all offsets and gates the per-period flow.
    """

    path_count: int
    slot_totals: dict[int, int]
    max_slots: int
    flow: float


def single_path_flow(config: RadioConfig) -> float:
    """Best sustainable flow over one straight chain of r-spaced relays."""
    return config.f / (config.interference_span + 1)


def interference_length(q: int, m: int, c: int, config: RadioConfig) -> float:
    """Signed reach along path m within which its nodes disturb a gate q hops out.

    The gate sits q hops from the shared endpoint on the reference path; path
    m leaves the endpoint at angle 2*pi*(m-1)/c.  Solving the law of cosines
    for the arc position at which path m exits the gate's interference disk
    gives the reach; negative values mean the disk never covers path m.
    """
    span = config.interference_span
    if not (1 <= q <= span):
        raise ValueError(f"gate offset q={q} outside 1..{span}")
    if not (2 <= m <= c):
        raise ValueError(f"path index m={m} outside 2..{c}")
    theta = 2.0 * math.pi * (m - 1) / c
    qr = q * config.r
    radicand = config.R * config.R - (qr * math.sin(theta)) ** 2
    # q <= span guarantees qr <= R, so the radicand is only negative by rounding.
    radicand = max(radicand, 0.0)
    return qr * math.cos(theta) + math.sqrt(radicand)


def _slots_for_reach(x: float, r: float) -> int:
    # floor is closed below: a reach within 1e-9 m of a hop multiple counts it.
    return max(math.floor((x + GEOM_TOL) / r), 0) + 1


def interference_profile(c: int, config: RadioConfig) -> InterferenceProfile:
    """Slot totals for c equal-angle paths and the resulting per-period flow."""
    if not (1 <= c <= config.C):
        raise ValueError(f"path count {c} outside 1..{config.C}")
    span = config.interference_span
    slot_totals: dict[int, int] = {}
    for q in range(1, span + 1):
        total = q + 1
        for m in range(2, c + 1):
            total += _slots_for_reach(interference_length(q, m, c, config), config.r)
        slot_totals[q] = total
    max_slots = max(slot_totals.values())
    return InterferenceProfile(
        path_count=c,
        slot_totals=slot_totals,
        max_slots=max_slots,
        flow=c * config.f / max_slots,
    )


def max_flow(config: RadioConfig) -> tuple[float, int]:
    """Best per-period flow over path counts 1..C and the smallest c attaining it.

    The comparison is done on the exact rationals c/max_slots so that ties
    (such as 2/3 versus 6/9) resolve to the smaller path count.
    """
    best_c, best_slots = 1, interference_profile(1, config).max_slots
    for c in range(2, config.C + 1):
        slots = interference_profile(c, config).max_slots
        if c * best_slots > best_c * slots:  # c/slots > best_c/best_slots, exactly
            best_c, best_slots = c, slots
    return best_c * config.f / best_slots, best_c


# ---------------------------------------------------------------------------
# Geometry construction
# ---------------------------------------------------------------------------


def _segment_distance(pt: tuple[float, float], src: Point, u: tuple[float, float], length: float) -> float:
    """Distance from a point to the straight src->dest segment."""
    dx, dy = pt[0] - src.x, pt[1] - src.y
    t = dx * u[0] + dy * u[1]
    t = min(max(t, 0.0), length)
    cx, cy = src.x + t * u[0], src.y + t * u[1]
    return math.hypot(pt[0] - cx, pt[1] - cy)


class _Corridor:
    """Stadium-shaped offset corridor around the straight src->dest segment."""

    def __init__(self, src: Point, u: tuple[float, float], length: float, radius: float):
        self.src = src
        self.u = u
        self.n = (-u[1], u[0])
        self.length = length
        self.radius = radius
        self.perimeter = 2.0 * length + 2.0 * math.pi * radius

    def _local(self, pt: tuple[float, float]) -> tuple[float, float]:
        dx, dy = pt[0] - self.src.x, pt[1] - self.src.y
        return (dx * self.u[0] + dy * self.u[1], dx * self.n[0] + dy * self.n[1])

    def point_at(self, s: float) -> tuple[float, float]:
        s = s % self.perimeter
        L, d = self.length, self.radius
        if s <= L:
            lx, ly = s, d
        elif s <= L + math.pi * d:
            phi = math.pi / 2.0 - (s - L) / d
            lx, ly = L + d * math.cos(phi), d * math.sin(phi)
        elif s <= 2.0 * L + math.pi * d:
            lx, ly = L - (s - L - math.pi * d), -d
        else:
            phi = -math.pi / 2.0 - (s - 2.0 * L - math.pi * d) / d
            lx, ly = d * math.cos(phi), d * math.sin(phi)
        return (
            self.src.x + lx * self.u[0] + ly * self.n[0],
            self.src.y + lx * self.u[1] + ly * self.n[1],
        )

    def param_of(self, pt: tuple[float, float]) -> float:
        """Corridor arc position of the radial projection of an outside point."""
        x, y = self._local(pt)
        L, d = self.length, self.radius
        if 0.0 < x < L:
            return x if y >= 0.0 else L + math.pi * d + (L - x)
        if x >= L:
            psi = math.atan2(y, x - L)
            return L + (math.pi / 2.0 - psi) * d
        phi = math.atan2(y, x)
        if phi > math.pi / 2.0:
            phi -= 2.0 * math.pi
        return 2.0 * L + math.pi * d + (-math.pi / 2.0 - phi) * d


def construct_paths(demand: Demand, c: int, config: RadioConfig) -> list[Polyline]:
    """Build c equal-angle paths for a demand; path 1 is the straight segment.

    Path m leaves the source at 2*pi*(m-1)/c to the source->destination
    direction and approaches the destination at pi - 2*pi*(m-1)/c.  A ray of
    r-spaced relays extends from each endpoint until its tip clears every
    node of the previously built paths; the two tips are joined along an
    offset corridor whose relays keep more than R from all previous nodes.
    """
    if not (1 <= c <= config.C):
        raise ValueError(f"path count {c} outside 1..{config.C}")
    length = demand.separation
    minimum = 2.0 * config.R
    if length < minimum - GEOM_TOL:
        raise SeparationError(demand.id, length, minimum)

    src, dest = demand.src, demand.dest
    u = ((dest.x - src.x) / length, (dest.y - src.y) / length)
    r, R = config.r, config.R
    clear_stop = R + GEOM_TOL
    clear_corridor = R + CORRIDOR_MARGIN * r
    max_ray = math.ceil((2.0 * c * R + length) / r) + 8

    straight = polyline([src, dest])
    first = polyline([src, *place_relays(straight, r), dest])
    paths: list[Polyline] = [first]
    prev_nodes: list[Point] = list(first.vertices)

    def extend_ray(origin: Point, direction: tuple[float, float]) -> list[Point]:
        ray: list[Point] = []
        for k in range(1, max_ray + 1):
            tip = Point(origin.x + k * r * direction[0], origin.y + k * r * direction[1])
            ray.append(tip)
            if all(dist(tip, n) > clear_stop for n in prev_nodes):
                return ray
        raise ConstructionInfeasibleError(
            f"demand {demand.id}: no clear ray tip within the search region for c={c}"
        )

    for m in range(2, c + 1):
        theta = 2.0 * math.pi * (m - 1) / c
        u_src = rotate(u[0], u[1], theta)
        u_dest = rotate(u[0], u[1], math.pi - theta)

        max_prev_offset = max(
            _segment_distance((n.x, n.y), src, u, length) for n in prev_nodes
        )
        radius = clear_corridor + max_prev_offset
        corridor = _Corridor(src, u, length, radius)

        def reach_corridor(ray: list[Point], direction: tuple[float, float], origin: Point) -> list[Point]:
            out = list(ray)
            k = len(ray)
            while _segment_distance((out[-1].x, out[-1].y), src, u, length) < radius:
                k += 1
                if k > max_ray:
                    raise ConstructionInfeasibleError(
                        f"demand {demand.id}: corridor unreachable for c={c}"
                    )
                out.append(
                    Point(origin.x + k * r * direction[0], origin.y + k * r * direction[1])
                )
            return out

        ray_s = reach_corridor(extend_ray(src, u_src), u_src, src)
        ray_d = reach_corridor(extend_ray(dest, u_dest), u_dest, dest)

        s_a = corridor.param_of((ray_s[-1].x, ray_s[-1].y))
        s_b = corridor.param_of((ray_d[-1].x, ray_d[-1].y))
        forward = (s_b - s_a) % corridor.perimeter
        backward = corridor.perimeter - forward
        if forward <= backward:
            delta, sign = forward, 1.0
        else:
            delta, sign = backward, -1.0
        steps = max(1, math.ceil(delta / r))
        walk = [
            Point(*corridor.point_at(s_a + sign * delta * k / steps))
            for k in range(steps + 1)
        ]

        raw: list[Point] = [src, *ray_s, *walk, *reversed(ray_d), dest]
        deduped: list[Point] = [raw[0]]
        for pt in raw[1:]:
            if dist(pt, deduped[-1]) > 1e-12:
                deduped.append(pt)
        shape = polyline(deduped)
        # Re-space so every hop is at most r (corridor chords can be shorter).
        final = polyline([src, *place_relays(shape, r), dest])
        paths.append(final)
        prev_nodes.extend(final.vertices[1:-1])

    return paths


# ---------------------------------------------------------------------------
# Single-demand planning with slots
# ---------------------------------------------------------------------------


@dataclass
class SingleDemandPlan:
    """Planner output for one demand: analytic flow plus a scheduled plan."""

    demand: Demand
    flow: float              # analytic best per-period flow
    path_count: int
    profile: InterferenceProfile
    plan: PlacementPlan

    @property
    def paths(self) -> list[PlannedPath]:
        return self.plan.paths[self.demand.id]

    @property
    def measured_flow(self) -> float:
        return self.plan.achieved[self.demand.id]


def best_configuration(
    demand: Demand, config: RadioConfig
) -> tuple[float, int, InterferenceProfile, list[Polyline]]:
    """Analytic winner plus its constructed geometry."""
    flow, best_c = max_flow(config)
    profile = interference_profile(best_c, config)
    geometries = construct_paths(demand, best_c, config)
    return flow, best_c, profile, geometries


def _assemble_single(demand: Demand, geometries: list[Polyline], config: RadioConfig) -> PlacementPlan:
    nodes: list[Point] = [demand.src, demand.dest]
    paths: list[PlannedPath] = []
    for idx, geom in enumerate(geometries):
        ids = [0]
        for pt in geom.vertices[1:-1]:
            nodes.append(pt)
            ids.append(len(nodes) - 1)
        ids.append(1)
        paths.append(
            PlannedPath(demand_id=demand.id, index=idx, node_ids=tuple(ids), geometry=geom)
        )
    return PlacementPlan(
        config=config,
        demands=[demand],
        nodes=nodes,
        endpoints={demand.id: (0, 1)},
        paths={demand.id: paths},
    )


def assign_cyclic_slots(plan: PlacementPlan, period: int) -> None:
    """Schedule every path with a repeating pattern of ``period`` distinct slots.

    Links at the same position modulo the period share a label; labels are
    the lowest that avoid conflicts with everything already assigned.  When a
    path bends back on itself so that same-position links conflict, only that
    path's period grows.
    """
    positions = plan.nodes
    R = plan.config.R
    assigned: dict[int, list] = {}

    def conflicts(link, label: int) -> bool:
        return any(
            links_conflict(link, other, positions, R)
            for other in assigned.get(label, ())
        )

    for path in plan.all_paths():
        links = path.links
        p = min(period, len(links))
        while True:
            groups = [
                [links[k] for k in range(g, len(links), p)] for g in range(p)
            ]
            self_conflict = any(
                links_conflict(a, b, positions, R)
                for group in groups
                for i, a in enumerate(group)
                for b in group[i + 1 :]
            )
            if not self_conflict or p >= len(links):
                break
            p += 1
        slots: list[int | None] = [None] * len(links)
        used: set[int] = set()
        for g, group in enumerate(groups):
            label = 1
            while label in used or any(conflicts(link, label) for link in group):
                label += 1
            used.add(label)
            for k in range(g, len(links), p):
                slots[k] = label
            assigned.setdefault(label, []).extend(group)
        path.slots = [s for s in slots if s is not None]
    plan.refresh_achieved()


def plan_single_demand(demand: Demand, config: RadioConfig) -> SingleDemandPlan:
    """Full single-demand planning: best path count, geometry, and slots."""
    flow, best_c, profile, geometries = best_configuration(demand, config)
    plan = _assemble_single(demand, geometries, config)
    plan.analytic[demand.id] = {
        "max_flow": flow,
        "path_count": best_c,
        "max_slots": profile.max_slots,
    }
    assign_cyclic_slots(plan, profile.max_slots)
    return SingleDemandPlan(
        demand=demand, flow=flow, path_count=best_c, profile=profile, plan=plan
    )
