"""Planar geometry primitives: points, polylines, sampling, relay spacing.

Coordinates are meters in a 2D plane.  All geometric comparisons use an
absolute tolerance of ``GEOM_TOL`` (1e-9 m).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

GEOM_TOL = 1e-9


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __iter__(self) -> Iterator[float]:
        yield self.x
        yield self.y


def dist(a: Point, b: Point) -> float:
    """Euclidean distance between two points."""
    return math.hypot(a.x - b.x, a.y - b.y)


@dataclass(frozen=True)
class Polyline:
    """Open polygonal chain; the first vertex is the source end, the last the destination end."""

    vertices: tuple[Point, ...]

    def __post_init__(self) -> None:
        if len(self.vertices) < 2:
            raise ValueError("polyline needs at least two vertices")
        for a, b in zip(self.vertices, self.vertices[1:]):
            if not (dist(a, b) > 0.0):
                raise ValueError("consecutive polyline vertices must be distinct")

    def __len__(self) -> int:
        return len(self.vertices)


def polyline(points: Sequence[Point | tuple[float, float]]) -> Polyline:
    """Build a Polyline from points or bare coordinate pairs."""
    return Polyline(tuple(p if isinstance(p, Point) else Point(*p) for p in points))


def polyline_length(p: Polyline) -> float:
    """Total arc length: sum of consecutive vertex distances."""
    return float(sum(dist(a, b) for a, b in zip(p.vertices, p.vertices[1:])))


def cumulative_arcs(p: Polyline) -> np.ndarray:
    """Arc-length position of each vertex along the polyline (first is 0)."""
    seg = np.array(
        [dist(a, b) for a, b in zip(p.vertices, p.vertices[1:])], dtype=float
    )
    return np.concatenate(([0.0], np.cumsum(seg)))


def point_at_arc(p: Polyline, s: float) -> Point:
    """The point at arc-length position ``s`` along the polyline (clamped to its ends)."""
    arcs = cumulative_arcs(p)
    total = arcs[-1]
    if s <= 0.0:
        return p.vertices[0]
    if s >= total:
        return p.vertices[-1]
    i = int(np.searchsorted(arcs, s, side="right")) - 1
    a, b = p.vertices[i], p.vertices[i + 1]
    seg_len = arcs[i + 1] - arcs[i]
    t = (s - arcs[i]) / seg_len
    return Point(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))


def _segment_arrays(p: Polyline) -> tuple[np.ndarray, np.ndarray]:
    v = np.array([(pt.x, pt.y) for pt in p.vertices], dtype=float)
    return v[:-1], v[1:]


def points_to_polyline_distance(points: np.ndarray, p: Polyline) -> np.ndarray:
    """Vectorized minimum distance from each row of ``points`` to the polyline.

    ``points`` has shape (N, 2); the result has shape (N,).  The distance is
    to the continuous chain (interior of every segment), not just vertices.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    a, b = _segment_arrays(p)
    ab = b - a                                   # (E, 2)
    ab_len2 = np.einsum("ij,ij->i", ab, ab)      # (E,)
    ap = pts[:, None, :] - a[None, :, :]         # (N, E, 2)
    t = np.einsum("nej,ej->ne", ap, ab) / ab_len2
    t = np.clip(t, 0.0, 1.0)
    closest = a[None, :, :] + t[..., None] * ab[None, :, :]
    d2 = np.sum((pts[:, None, :] - closest) ** 2, axis=2)
    return np.sqrt(d2.min(axis=1))


def point_to_polyline_distance(q: Point, p: Polyline) -> float:
    """Minimum distance from a point to any point on the polyline."""
    return float(points_to_polyline_distance(np.array([[q.x, q.y]]), p)[0])


def sample_polyline(p: Polyline, step: float) -> list[Point]:
    """Points at arc positions 0, step, 2*step, ... plus the final vertex.

    Consecutive samples are at most ``step`` apart along the arc.
    """
    if step <= 0.0:
        raise ValueError("sampling step must be positive")
    total = polyline_length(p)
    out: list[Point] = []
    s = 0.0
    while s < total - 1e-12:
        out.append(point_at_arc(p, s))
        s += step
    out.append(p.vertices[-1])
    return out


def place_relays(p: Polyline, spacing: float) -> list[Point]:
    """Interior relay positions so that every hop along ``p`` is at most ``spacing``.

    The endpoints of ``p`` are pre-deployed nodes and are not included.
    Each segment gets the minimal interior count: ceil(len/spacing) - 1
    evenly spaced points (with 1e-9 m slack at exact multiples).
    """
    if spacing <= 0.0:
        raise ValueError("relay spacing must be positive")
    out: list[Point] = []
    n_seg = len(p.vertices) - 1
    for i in range(n_seg):
        a, b = p.vertices[i], p.vertices[i + 1]
        seg_len = dist(a, b)
        hops = max(1, math.ceil((seg_len - GEOM_TOL) / spacing))
        for k in range(1, hops):
            t = k / hops
            out.append(Point(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)))
        if i < n_seg - 1:
            out.append(b)
    return out


def rotate(dx: float, dy: float, angle: float) -> tuple[float, float]:
    """Rotate a vector counterclockwise by ``angle`` radians."""
    c, s = math.cos(angle), math.sin(angle)
    return (c * dx - s * dy, s * dx + c * dy)
