"""Annotated indoor point clouds: dataset parsing, the portable scene file
format, and the in-memory scene containers the rest of the pipeline consumes.

Datasets follow the usual area layout: ``<area>/<room_name>/<room_name>.txt``
with one ``x y z r g b`` record per point, optionally split into
``<room_name>/Annotations/<class>_<n>.txt`` files whose names carry the
per-point semantic class.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from io import StringIO
from pathlib import Path
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import (
    MalformedRecordError,
    MalformedSceneError,
    NoScenesError,
    UnknownRoomError,
)

SCENE_MAGIC = "PANAV-SCENE v1"


class RoomCategory(str, Enum):
    OFFICE = "office"
    HALLWAY = "hallway"
    CONFERENCE = "conference"
    LOBBY = "lobby"
    BATHROOM = "bathroom"
    STORAGE = "storage"
    OTHER = "other"


# Name prefixes seen in the wild mapped onto the category enum. Anything
# unlisted falls through to OTHER.
_CATEGORY_ALIASES = {
    "office": RoomCategory.OFFICE,
    "hallway": RoomCategory.HALLWAY,
    "hallways": RoomCategory.HALLWAY,
    "corridor": RoomCategory.HALLWAY,
    "conference": RoomCategory.CONFERENCE,
    "conferenceroom": RoomCategory.CONFERENCE,
    "meeting": RoomCategory.CONFERENCE,
    "lobby": RoomCategory.LOBBY,
    "lounge": RoomCategory.LOBBY,
    "wc": RoomCategory.BATHROOM,
    "bathroom": RoomCategory.BATHROOM,
    "restroom": RoomCategory.BATHROOM,
    "toilet": RoomCategory.BATHROOM,
    "storage": RoomCategory.STORAGE,
    "closet": RoomCategory.STORAGE,
}


def category_for_name(room_name: str) -> RoomCategory:
    """Category from the room-name prefix before the first underscore."""
    prefix = room_name.split("_", 1)[0].lower()
    return _CATEGORY_ALIASES.get(prefix, RoomCategory.OTHER)


class LabeledPoint(NamedTuple):
    x: float
    y: float
    z: float
    r: int
    g: int
    b: int
    semantic_class: str | None = None


@dataclass(frozen=True, eq=False)
class Room:
    """One room: name, derived category, and its annotated points.

    Points are stored columnar (``xyz`` float64 ``(n, 3)``, ``rgb`` uint8
    ``(n, 3)``, optional per-point ``labels``) and are immutable after
    construction. ``labels`` is None when no point carries a class.
    """

    name: str
    category: RoomCategory
    xyz: np.ndarray
    rgb: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        if not self.name or any(ch.isspace() for ch in self.name):
            raise ValueError(f"invalid room name {self.name!r}")
        if self.category is not category_for_name(self.name):
            raise ValueError(
                f"room {self.name!r}: category {self.category.value!r} does not "
                f"match the name prefix"
            )
        xyz = np.ascontiguousarray(np.asarray(self.xyz, dtype=np.float64))
        if xyz.ndim != 2 or xyz.shape[1] != 3 or xyz.shape[0] == 0:
            raise ValueError(f"room {self.name!r}: xyz must be a non-empty (n, 3) array")
        if not np.isfinite(xyz).all():
            raise ValueError(f"room {self.name!r}: non-finite coordinates")
        rgb = np.asarray(self.rgb)
        if rgb.shape != xyz.shape:
            raise ValueError(f"room {self.name!r}: rgb shape {rgb.shape} != xyz shape")
        if rgb.dtype != np.uint8:
            if not ((rgb >= 0) & (rgb <= 255)).all():
                raise ValueError(f"room {self.name!r}: colors outside 0..255")
            rgb = rgb.astype(np.uint8)
        rgb = np.ascontiguousarray(rgb)
        labels = self.labels
        if labels is not None:
            labels = np.asarray(labels, dtype=object)
            if labels.shape != (xyz.shape[0],):
                raise ValueError(f"room {self.name!r}: labels length mismatch")
            for l in labels:
                if l is not None and (not l or any(ch.isspace() for ch in l)):
                    raise ValueError(f"room {self.name!r}: invalid label {l!r}")
            if all(l is None for l in labels):
                labels = None
        for arr in (xyz, rgb) + ((labels,) if labels is not None else ()):
            arr.setflags(write=False)
        object.__setattr__(self, "xyz", xyz)
        object.__setattr__(self, "rgb", rgb)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def create(cls, name: str, xyz, rgb, labels=None) -> "Room":
        return cls(name, category_for_name(name), xyz, rgb, labels)

    def __len__(self) -> int:
        return self.xyz.shape[0]

    def point(self, i: int) -> LabeledPoint:
        x, y, z = self.xyz[i]
        r, g, b = self.rgb[i]
        label = None if self.labels is None else self.labels[i]
        return LabeledPoint(float(x), float(y), float(z), int(r), int(g), int(b), label)

    def iter_points(self) -> Iterator[LabeledPoint]:
        for i in range(len(self)):
            yield self.point(i)

    def __eq__(self, other):
        if not isinstance(other, Room):
            return NotImplemented
        if self.name != other.name or self.category is not other.category:
            return False
        if not np.array_equal(self.xyz, other.xyz):
            return False
        if not np.array_equal(self.rgb, other.rgb):
            return False
        if (self.labels is None) != (other.labels is None):
            return False
        if self.labels is not None and not all(
            a == b for a, b in zip(self.labels, other.labels)
        ):
            return False
        return True


@dataclass(frozen=True, eq=False)
class SceneSet:
    """All rooms of one area, sorted by name; names are unique."""

    area_name: str
    rooms: tuple[Room, ...]

    def __post_init__(self):
        if not self.area_name:
            raise ValueError("area_name must be non-empty")
        rooms = tuple(sorted(self.rooms, key=lambda r: r.name))
        if not rooms:
            raise ValueError("SceneSet needs at least one room")
        names = [r.name for r in rooms]
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise ValueError(f"duplicate room names: {dup}")
        object.__setattr__(self, "rooms", rooms)

    def room(self, name: str) -> Room:
        for r in self.rooms:
            if r.name == name:
                return r
        raise UnknownRoomError(f"no room named {name!r} in area {self.area_name!r}")

    def room_names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.rooms)

    def total_points(self) -> int:
        return sum(len(r) for r in self.rooms)

    def __iter__(self) -> Iterator[Room]:
        return iter(self.rooms)

    def __eq__(self, other):
        if not isinstance(other, SceneSet):
            return NotImplemented
        return self.area_name == other.area_name and self.rooms == other.rooms


@dataclass(frozen=True, eq=False)
class Episode:
    """A delivery task bound to a scene: instruction plus start and goal."""

    scene: SceneSet
    instruction: str
    start_room: str
    goal_room: str

    def __post_init__(self):
        if not self.instruction.strip():
            raise ValueError("instruction must be non-empty")
        self.scene.room(self.start_room)
        self.scene.room(self.goal_room)


# dataset parsing


def _load_points_file(path: Path) -> tuple[np.ndarray, np.ndarray]:
    """Read one ``x y z r g b`` record file; raises MalformedRecordError with
    the offending line on any violation."""
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise MalformedRecordError(path, 0, f"unreadable file: {exc}") from exc
    try:
        arr = np.loadtxt(StringIO(text), dtype=np.float64, comments=None, ndmin=2)
    except ValueError:
        _scan_for_bad_record(path, text)
        raise MalformedRecordError(path, 0, "unparseable records")
    if arr.size == 0:
        raise MalformedRecordError(path, 0, "file holds no records")
    if arr.shape[1] != 6:
        _scan_for_bad_record(path, text)
        raise MalformedRecordError(path, 0, f"expected 6 columns, got {arr.shape[1]}")
    xyz = arr[:, :3]
    rgb = arr[:, 3:6]
    bad = ~np.isfinite(arr).all(axis=1)
    bad |= (rgb < 0).any(axis=1) | (rgb > 255).any(axis=1)
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        raise MalformedRecordError(
            path, _physical_line_of_row(text, row), "coordinate or color out of range"
        )
    return np.ascontiguousarray(xyz), np.ascontiguousarray(np.rint(rgb).astype(np.uint8))


def _scan_for_bad_record(path: Path, text: str) -> None:
    """Slow path: find the first malformed line so the error is precise."""
    for line_no, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped:
            continue
        tokens = stripped.split()
        if len(tokens) != 6:
            raise MalformedRecordError(
                path, line_no, f"expected 6 fields, got {len(tokens)}"
            )
        try:
            [float(t) for t in tokens]
        except ValueError:
            raise MalformedRecordError(path, line_no, f"non-numeric field in {stripped!r}")


def _physical_line_of_row(text: str, row: int) -> int:
    """Map a parsed-record index back to its 1-based line number."""
    seen = -1
    for line_no, line in enumerate(text.splitlines(), 1):
        if line.strip():
            seen += 1
            if seen == row:
                return line_no
    return 0


def parse_s3dis_area(root) -> SceneSet:
    """Parse one dataset area directory into a SceneSet.

    Rooms come back sorted by name regardless of directory listing order;
    annotation files inside a room are read in sorted filename order and the
    semantic class is the filename prefix before the trailing ``_<n>``.
    """
    root = Path(root)
    if not root.is_dir():
        raise NoScenesError(f"not a directory: {root}")
    rooms = []
    for room_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        ann_dir = room_dir / "Annotations"
        ann_files = sorted(ann_dir.glob("*.txt")) if ann_dir.is_dir() else []
        if ann_files:
            parts_xyz, parts_rgb, parts_lbl = [], [], []
            for f in ann_files:
                xyz, rgb = _load_points_file(f)
                cls = f.stem.rsplit("_", 1)[0] if "_" in f.stem else f.stem
                parts_xyz.append(xyz)
                parts_rgb.append(rgb)
                parts_lbl.append(np.full(len(xyz), cls, dtype=object))
            rooms.append(
                Room.create(
                    room_dir.name,
                    np.concatenate(parts_xyz),
                    np.concatenate(parts_rgb),
                    np.concatenate(parts_lbl),
                )
            )
            continue
        flat_files = sorted(
            p for p in room_dir.glob("*.txt") if p.is_file()
        )
        preferred = room_dir / f"{room_dir.name}.txt"
        if preferred in flat_files:
            flat_files = [preferred]
        if not flat_files:
            continue
        parts = [_load_points_file(f) for f in flat_files]
        rooms.append(
            Room.create(
                room_dir.name,
                np.concatenate([p[0] for p in parts]),
                np.concatenate([p[1] for p in parts]),
            )
        )
    if not rooms:
        raise NoScenesError(f"no room data under {root}")
    return SceneSet(root.name, tuple(rooms))


# scene file format


def _format_float(v: float) -> str:
    return repr(float(v))


def write_scene_file(scene: SceneSet, path) -> None:
    """Write the portable scene format: versioned header, AREA line, then one
    ROOM block per room with ``x y z r g b [label]`` records."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{SCENE_MAGIC}\n")
        fh.write(f"AREA {scene.area_name}\n")
        for room in scene.rooms:
            fh.write(f"ROOM {room.name} {room.category.value} {len(room)}\n")
            labels = room.labels
            for i in range(len(room)):
                x, y, z = room.xyz[i]
                r, g, b = room.rgb[i]
                line = (
                    f"{_format_float(x)} {_format_float(y)} {_format_float(z)} "
                    f"{int(r)} {int(g)} {int(b)}"
                )
                if labels is not None and labels[i] is not None:
                    line += f" {labels[i]}"
                fh.write(line + "\n")


def parse_scene_file(path) -> SceneSet:
    """Inverse of :func:`write_scene_file`; raises MalformedSceneError on any
    schema violation."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise MalformedSceneError(f"unreadable scene file {path}: {exc}") from exc
    if not lines or lines[0].strip() != SCENE_MAGIC:
        raise MalformedSceneError(f"{path}: missing {SCENE_MAGIC!r} header")
    pos = 1
    area_name = path.stem
    if pos < len(lines) and lines[pos].startswith("AREA "):
        area_name = lines[pos][len("AREA "):].strip()
        if not area_name:
            raise MalformedSceneError(f"{path}:2: empty AREA name")
        pos += 1
    rooms = []
    seen = set()
    while pos < len(lines):
        line = lines[pos].strip()
        pos += 1
        if not line:
            continue
        head = line.split()
        if head[0] != "ROOM" or len(head) != 4:
            raise MalformedSceneError(f"{path}:{pos}: expected ROOM line, got {line!r}")
        _, name, category, count_tok = head
        if name in seen:
            raise MalformedSceneError(f"{path}:{pos}: duplicate room {name!r}")
        seen.add(name)
        try:
            count = int(count_tok)
        except ValueError:
            raise MalformedSceneError(f"{path}:{pos}: bad point count {count_tok!r}")
        if count < 1:
            raise MalformedSceneError(f"{path}:{pos}: room {name!r} has no points")
        if category_for_name(name).value != category:
            raise MalformedSceneError(
                f"{path}:{pos}: category {category!r} inconsistent with name {name!r}"
            )
        xyz = np.empty((count, 3), dtype=np.float64)
        rgb = np.empty((count, 3), dtype=np.int64)
        labels = np.full(count, None, dtype=object)
        for i in range(count):
            if pos >= len(lines):
                raise MalformedSceneError(
                    f"{path}: room {name!r} truncated after {i} of {count} records"
                )
            tokens = lines[pos].split()
            pos += 1
            if len(tokens) not in (6, 7):
                raise MalformedSceneError(
                    f"{path}:{pos}: expected 6 or 7 fields, got {len(tokens)}"
                )
            try:
                xyz[i] = [float(t) for t in tokens[:3]]
                rgb[i] = [int(t) for t in tokens[3:6]]
            except ValueError:
                raise MalformedSceneError(f"{path}:{pos}: non-numeric record")
            if len(tokens) == 7:
                labels[i] = tokens[6]
        if ((rgb < 0) | (rgb > 255)).any():
            raise MalformedSceneError(f"{path}: room {name!r} has colors outside 0..255")
        if not np.isfinite(xyz).all():
            raise MalformedSceneError(f"{path}: room {name!r} has non-finite coordinates")
        try:
            rooms.append(Room.create(name, xyz, rgb, labels))
        except ValueError as exc:
            raise MalformedSceneError(f"{path}: room {name!r}: {exc}") from exc
    if not rooms:
        raise MalformedSceneError(f"{path}: scene holds no rooms")
    try:
        return SceneSet(area_name, tuple(rooms))
    except ValueError as exc:
        raise MalformedSceneError(f"{path}: {exc}") from exc
