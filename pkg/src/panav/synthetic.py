"""Deterministic synthetic office worlds.

Worlds are built from axis-aligned rectangles: hallway rooms form either a
rectangular ring ("loop" topology) or a straight corridor, and the remaining
rooms hang off the corridors behind walls with door gaps. Every room gets
floor, wall, and ceiling points so the grid construction behaves the same way
it does on real scans. The output is a pure function of ``(seed, layout)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidLayoutError
from .scene_ingest import Room, RoomCategory, SceneSet, category_for_name

_WALL_Z_STEP = 0.25
_WALL_Z_FIRST = 0.15

_FLOOR_BASE = {
    RoomCategory.OFFICE: (186, 160, 130),
    RoomCategory.HALLWAY: (201, 200, 196),
    RoomCategory.CONFERENCE: (150, 168, 196),
    RoomCategory.BATHROOM: (168, 196, 196),
    RoomCategory.STORAGE: (160, 160, 150),
    RoomCategory.LOBBY: (196, 186, 150),
    RoomCategory.OTHER: (180, 180, 180),
}
_WALL_BASE = (122, 122, 122)
_CEIL_BASE = (240, 240, 238)


@dataclass(frozen=True)
class SyntheticLayout:
    """Room counts, corridor topology, and dimensions of a generated world."""

    offices: int = 4
    hallways: int = 4
    conferences: int = 0
    bathrooms: int = 0
    topology: str = "loop"  # "loop" or "corridor"
    corridor_width: float = 1.6
    room_size: float = 3.0
    wall_height: float = 2.6
    wall_thickness: float = 0.1
    door_width: float = 0.9
    point_spacing: float = 0.05


@dataclass
class _RoomPlan:
    name: str
    floor_rects: list
    wall_edges: list  # (x0, y0, x1, y1, gap_lo, gap_hi); gap bounds may be None
    thresholds: list


def _validate(layout: SyntheticLayout) -> None:
    lo = layout
    if lo.topology not in ("loop", "corridor"):
        raise InvalidLayoutError(f"unknown topology {lo.topology!r}")
    if lo.hallways < 1 or lo.hallways > 8:
        raise InvalidLayoutError("hallways must be between 1 and 8")
    if lo.topology == "loop" and lo.hallways < 2:
        raise InvalidLayoutError("loop topology needs at least 2 hallways")
    if lo.offices < 0 or lo.conferences < 0 or lo.bathrooms < 0:
        raise InvalidLayoutError("room counts must be non-negative")
    if lo.offices + lo.conferences + lo.bathrooms < 2:
        raise InvalidLayoutError("need at least 2 non-hallway rooms")
    if lo.topology == "loop" and lo.offices < 2:
        raise InvalidLayoutError("loop topology needs at least 2 offices as anchors")
    for field in ("corridor_width", "room_size", "wall_height", "wall_thickness",
                  "door_width", "point_spacing"):
        if getattr(lo, field) <= 0:
            raise InvalidLayoutError(f"{field} must be positive")
    if lo.door_width > lo.room_size - 0.2:
        raise InvalidLayoutError("door_width does not fit the room size")
    if lo.wall_thickness >= lo.corridor_width / 2:
        raise InvalidLayoutError("wall_thickness too large for the corridor")
    if lo.point_spacing > min(lo.room_size, lo.corridor_width) / 4:
        raise InvalidLayoutError("point_spacing too coarse for the layout")
    if lo.wall_height <= _WALL_Z_FIRST + _WALL_Z_STEP:
        raise InvalidLayoutError("wall_height too small")


def _lattice(lo: float, hi: float, s: float) -> np.ndarray:
    return np.arange(lo + 0.5 * s, hi, s, dtype=np.float64)


def _rect_grid(x0, y0, x1, y1, s) -> np.ndarray:
    xs = _lattice(x0, x1, s)
    ys = _lattice(y0, y1, s)
    if xs.size == 0 or ys.size == 0:
        return np.empty((0, 2), dtype=np.float64)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel()])


def _edge_points(x0, y0, x1, y1, gap_lo, gap_hi, s, heights) -> np.ndarray:
    """Points along one wall edge at several heights, skipping the door gap."""
    if x0 == x1:
        run = _lattice(y0, y1, s)
    else:
        run = _lattice(x0, x1, s)
    if gap_lo is not None:
        run = run[(run < gap_lo) | (run > gap_hi)]
    if run.size == 0:
        return np.empty((0, 3), dtype=np.float64)
    uu, zz = np.meshgrid(run, heights, indexing="ij")
    if x0 == x1:
        return np.column_stack([np.full(uu.size, x0), uu.ravel(), zz.ravel()])
    return np.column_stack([uu.ravel(), np.full(uu.size, y0), zz.ravel()])


def _split_segment(seg):
    """Split one corridor segment in half along its traversal direction."""
    name, (x0, y0, x1, y1), direction = seg
    if direction in ("v+", "v-"):
        mid = (y0 + y1) / 2.0
        a = (name, (x0, y0, x1, mid), direction)
        b = (name, (x0, mid, x1, y1), direction)
        return (a, b) if direction == "v+" else (b, a)
    mid = (x0 + x1) / 2.0
    a = (name, (x0, y0, mid, y1), direction)
    b = (name, (mid, y0, x1, y1), direction)
    return (a, b) if direction == "h+" else (b, a)


def _hallway_rects(layout: SyntheticLayout, W: float, H: float) -> list[list]:
    """Partition the ring (or corridor) into per-hallway rect lists."""
    c = layout.corridor_width
    nh = layout.hallways
    if layout.topology == "corridor":
        xs = np.linspace(0.0, W, nh + 1)
        return [[(float(xs[i]), 0.0, float(xs[i + 1]), c)] for i in range(nh)]
    bands = [
        ("left", (0.0, c, c, H - c), "v+"),
        ("top", (0.0, H - c, W, H), "h+"),
        ("right", (W - c, c, W, H - c), "v-"),
        ("bottom", (0.0, 0.0, W, c), "h-"),
    ]
    if nh <= 4:
        base, extra = divmod(4, nh)
        sizes = [base + 1] * extra + [base] * (nh - extra)
        groups, at = [], 0
        for size in sizes:
            groups.append([bands[at + j][1] for j in range(size)])
            at += size
        return groups
    segments = list(bands)
    while len(segments) < nh:
        extents = [
            (abs(s[1][2] - s[1][0]) if s[2] in ("h+", "h-") else abs(s[1][3] - s[1][1]))
            for s in segments
        ]
        pick = int(np.argmax(extents))
        a, b = _split_segment(segments[pick])
        segments[pick:pick + 1] = [a, b]
    return [[seg[1]] for seg in segments]


def generate_synthetic_world(seed: int, layout: SyntheticLayout | None = None) -> SceneSet:
    """Build a deterministic SceneSet for the given seed and layout.

    Loop topology guarantees at least two distinct hallway routes between
    ``office_1`` and ``office_2``: those two rooms anchor opposite sides of
    the corridor ring and ``office_1`` additionally spans the joint of two
    hallway segments when only two hallways exist.
    """
    layout = layout or SyntheticLayout()
    _validate(layout)
    rng = np.random.default_rng(seed)
    c = layout.corridor_width
    t = layout.wall_thickness
    R = layout.room_size
    pitch = R + 0.12

    plans: list[_RoomPlan] = []
    if layout.topology == "loop":
        side_rooms = (layout.offices - 2) + layout.conferences + layout.bathrooms
        W = max(14.0, side_rooms * pitch + 2 * (c + 1.0)) + float(rng.uniform(0.0, 1.5))
        H = max(9.0, 2 * c + R + 3.5) + float(rng.uniform(0.0, 1.0))
        for i, rects in enumerate(_hallway_rects(layout, W, H), 1):
            plans.append(_RoomPlan(f"hallway_{i}", list(rects), [], []))
        y_a = 0.3
        plans.append(_anchor_room("office_1", -t - R, y_a, -t, y_a + R, "e", t, layout))
        plans.append(_anchor_room("office_2", W + t, y_a, W + t + R, y_a + R, "w", t, layout))
        names = (
            [f"office_{i}" for i in range(3, layout.offices + 1)]
            + [f"conference_{i}" for i in range(1, layout.conferences + 1)]
            + [f"bathroom_{i}" for i in range(1, layout.bathrooms + 1)]
        )
        x_start = (W - side_rooms * pitch) / 2.0 + 0.06
        for j, name in enumerate(names):
            x0 = x_start + j * pitch
            plans.append(_anchor_room(name, x0, -t - R, x0 + R, -t, "n", t, layout))
    else:
        total = layout.offices + layout.conferences + layout.bathrooms
        columns = (total + 1) // 2
        margin = 1.0 + float(rng.uniform(0.0, 0.5))
        W = margin * 2 + columns * pitch
        for i, rects in enumerate(_hallway_rects(layout, W, 0.0), 1):
            plans.append(_RoomPlan(f"hallway_{i}", list(rects), [], []))
        middle = (
            [f"office_{i}" for i in range(3, layout.offices + 1)]
            + [f"conference_{i}" for i in range(1, layout.conferences + 1)]
            + [f"bathroom_{i}" for i in range(1, layout.bathrooms + 1)]
        )
        if layout.offices >= 2:
            slot_names = ["office_1"] + middle + ["office_2"]
        elif layout.offices == 1:
            slot_names = ["office_1"] + middle
        else:
            slot_names = middle
        for j, name in enumerate(slot_names):
            col, south = j // 2, j % 2 == 0
            x0 = margin + col * pitch + 0.06
            if south:
                plans.append(_anchor_room(name, x0, -t - R, x0 + R, -t, "n", t, layout))
            else:
                plans.append(_anchor_room(name, x0, c + t, x0 + R, c + t + R, "s", t, layout))

    rooms = [_emit_room(plan, layout, rng) for plan in plans]
    return SceneSet(f"synthetic_{seed}", tuple(rooms))


def _anchor_room(name, x0, y0, x1, y1, door_side, t, layout) -> _RoomPlan:
    """Rectangular room with a full wall perimeter, one door, and the floor
    strip that carries the doorway across the wall gap."""
    dw = layout.door_width
    edges = []
    if door_side in ("n", "s"):
        mid = (x0 + x1) / 2.0
        gap = (mid - dw / 2.0, mid + dw / 2.0)
    else:
        mid = (y0 + y1) / 2.0
        gap = (mid - dw / 2.0, mid + dw / 2.0)
    for side, seg in (
        ("s", (x0, y0, x1, y0)),
        ("n", (x0, y1, x1, y1)),
        ("w", (x0, y0, x0, y1)),
        ("e", (x1, y0, x1, y1)),
    ):
        if side == door_side:
            edges.append(seg + gap)
        else:
            edges.append(seg + (None, None))
    if door_side == "n":
        threshold = (gap[0], y1, gap[1], y1 + t)
    elif door_side == "s":
        threshold = (gap[0], y0 - t, gap[1], y0)
    elif door_side == "e":
        threshold = (x1, gap[0], x1 + t, gap[1])
    else:
        threshold = (x0 - t, gap[0], x0, gap[1])
    return _RoomPlan(name, [(x0, y0, x1, y1)], edges, [threshold])


def _emit_room(plan: _RoomPlan, layout: SyntheticLayout, rng) -> Room:
    s = layout.point_spacing
    tint = rng.integers(-18, 19, size=3)
    base = _FLOOR_BASE.get(category_for_name(plan.name), (180, 180, 180))
    floor_rgb = np.clip(np.array(base) + tint, 0, 255).astype(np.int64)
    wall_rgb = np.clip(np.array(_WALL_BASE) + tint // 2, 0, 255).astype(np.int64)
    ceil_rgb = np.array(_CEIL_BASE, dtype=np.int64)

    xyz_parts, rgb_parts, lbl_parts = [], [], []

    def _add(points_xyz, color, label):
        if len(points_xyz) == 0:
            return
        xyz_parts.append(points_xyz)
        rgb_parts.append(np.tile(color, (len(points_xyz), 1)))
        lbl_parts.append(np.full(len(points_xyz), label, dtype=object))

    for (x0, y0, x1, y1) in plan.floor_rects:
        pts = _rect_grid(x0, y0, x1, y1, s)
        _add(np.column_stack([pts, np.zeros(len(pts))]), floor_rgb, "floor")
    s_thr = min(s, layout.wall_thickness / 2.0)
    for (x0, y0, x1, y1) in plan.thresholds:
        pts = _rect_grid(x0, y0, x1, y1, s_thr)
        _add(np.column_stack([pts, np.zeros(len(pts))]), floor_rgb, "floor")
    heights = np.arange(_WALL_Z_FIRST, layout.wall_height, _WALL_Z_STEP)
    for (x0, y0, x1, y1, g0, g1) in plan.wall_edges:
        _add(_edge_points(x0, y0, x1, y1, g0, g1, s, heights), wall_rgb, "wall")
    for (x0, y0, x1, y1) in plan.floor_rects:
        pts = _rect_grid(x0, y0, x1, y1, s)
        _add(
            np.column_stack([pts, np.full(len(pts), layout.wall_height)]),
            ceil_rgb,
            "ceiling",
        )

    return Room.create(
        plan.name,
        np.concatenate(xyz_parts),
        np.concatenate(rgb_parts),
        np.concatenate(lbl_parts),
    )
