"""Named polygon boundaries with draw-mode editing and enter/exit events.

Point-in-polygon math treats lat/lon as a plane, which is fine at incident
scale (a few km at most); points exactly on an edge count as inside, the
safety-conservative call for a unit standing on the fence of a danger zone.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Mapping

from .geo import GeoPoint

Membership = dict[tuple[int, str], bool]


class RejectReason(str, Enum):
    TOO_FEW_VERTICES = "TooFewVertices"
    MISSING_NAME = "MissingName"
    SELF_INTERSECTING = "SelfIntersecting"


class DraftRejected(ValueError):
    """Finalize refused the draft; draw mode exits without building it."""

    def __init__(self, reason: RejectReason):
        self.reason = reason
        super().__init__(reason.value)


class FenceEventKind(str, Enum):
    ENTER = "ENTER"
    EXIT = "EXIT"


@dataclass(frozen=True)
class GeofenceEvent:
    unit: int
    boundary_id: str
    kind: FenceEventKind
    at: float

    def to_dict(self) -> dict:
        return {
            "unit": self.unit,
            "boundary_id": self.boundary_id,
            "kind": self.kind.value,
            "at": self.at,
        }


@dataclass(frozen=True)
class DraftBoundary:
    """In-progress boundary; holds anything until finalize validates it."""

    name: str = ""
    vertices: tuple[GeoPoint, ...] = ()


@dataclass(frozen=True)
class Boundary:
    """A finalized, named, simple polygon (implicitly closed)."""

    boundary_id: str
    name: str
    vertices: tuple[GeoPoint, ...]

    def to_dict(self) -> dict:
        return {
            "boundary_id": self.boundary_id,
            "name": self.name,
            "vertices": [v.to_dict() for v in self.vertices],
        }


def draft_add_vertex(draft: DraftBoundary, p: GeoPoint) -> DraftBoundary:
    return replace(draft, vertices=draft.vertices + (p,))


def draft_undo(draft: DraftBoundary) -> DraftBoundary:
    """Remove the latest corner; no-op on an empty draft."""
    return replace(draft, vertices=draft.vertices[:-1])


def draft_clear(draft: DraftBoundary) -> DraftBoundary:
    return replace(draft, vertices=())


def _orient(a: GeoPoint, b: GeoPoint, c: GeoPoint) -> float:
    return (b.lon - a.lon) * (c.lat - a.lat) - (b.lat - a.lat) * (c.lon - a.lon)


def _within(a: float, m: float, b: float) -> bool:
    return min(a, b) <= m <= max(a, b)


def _on_segment(p: GeoPoint, a: GeoPoint, b: GeoPoint) -> bool:
    return _orient(a, b, p) == 0.0 and _within(a.lon, p.lon, b.lon) and _within(a.lat, p.lat, b.lat)


def _segments_intersect(a: GeoPoint, b: GeoPoint, c: GeoPoint, d: GeoPoint) -> bool:
    """Closed-segment intersection, including collinear overlap and touching."""
    o1 = _orient(a, b, c)
    o2 = _orient(a, b, d)
    o3 = _orient(c, d, a)
    o4 = _orient(c, d, b)
    if ((o1 > 0) != (o2 > 0)) and ((o3 > 0) != (o4 > 0)) and o1 != 0 and o2 != 0 and o3 != 0 and o4 != 0:
        return True
    if o1 == 0 and _on_segment(c, a, b):
        return True
    if o2 == 0 and _on_segment(d, a, b):
        return True
    if o3 == 0 and _on_segment(a, c, d):
        return True
    if o4 == 0 and _on_segment(b, c, d):
        return True
    return False


def is_simple_polygon(vertices: tuple[GeoPoint, ...]) -> bool:
    """No repeated corners and no two non-adjacent edges touching or crossing."""
    n = len(vertices)
    if n < 3:
        return False
    if len({(v.lat, v.lon) for v in vertices}) != n:
        return False
    edges = [(vertices[i], vertices[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue  # adjacent edges share a corner by construction
            if _segments_intersect(*edges[i], *edges[j]):
                return False
    return True


def finalize(draft: DraftBoundary, boundary_id: str) -> Boundary:
    """Validate a draft into a Boundary, or reject it and discard the draft."""
    if len(draft.vertices) < 3:
        raise DraftRejected(RejectReason.TOO_FEW_VERTICES)
    if not draft.name.strip():
        raise DraftRejected(RejectReason.MISSING_NAME)
    if not is_simple_polygon(draft.vertices):
        raise DraftRejected(RejectReason.SELF_INTERSECTING)
    return Boundary(boundary_id=boundary_id, name=draft.name, vertices=draft.vertices)


def contains(boundary: Boundary, p: GeoPoint) -> bool:
    """Even-odd ray-casting containment; edge and corner points count inside."""
    vs = boundary.vertices
    n = len(vs)
    for i in range(n):
        if _on_segment(p, vs[i], vs[(i + 1) % n]):
            return True
    inside = False
    j = n - 1
    for i in range(n):
        if (vs[i].lat > p.lat) != (vs[j].lat > p.lat):
            x_cross = vs[i].lon + (p.lat - vs[i].lat) * (vs[j].lon - vs[i].lon) / (vs[j].lat - vs[i].lat)
            if p.lon < x_cross:
                inside = not inside
        j = i
    return inside


def update(
    positions: Mapping[int, GeoPoint | None],
    membership: Mapping[tuple[int, str], bool],
    boundaries: Mapping[str, Boundary],
    now: float,
) -> tuple[list[GeofenceEvent], Membership]:
    """Diff containment against previous membership and emit crossings.

    Units mapped to None (no GPS fix) keep their previous membership and emit
    nothing; so do units absent from `positions`.
    """
    new_membership: Membership = dict(membership)
    events: list[GeofenceEvent] = []
    for unit in sorted(positions):
        pos = positions[unit]
        if pos is None:
            continue
        for boundary_id in sorted(boundaries):
            inside = contains(boundaries[boundary_id], pos)
            was = new_membership.get((unit, boundary_id), False)
            if inside != was:
                kind = FenceEventKind.ENTER if inside else FenceEventKind.EXIT
                events.append(GeofenceEvent(unit=unit, boundary_id=boundary_id, kind=kind, at=now))
            new_membership[(unit, boundary_id)] = inside
    return events, new_membership
