"""Top-view and traversability grids projected from annotated point clouds.

The top view keeps, per cell, only the highest retained point after ceiling
removal; traversability applies a two-band height rule on the same retained
set. Cell coordinates are ``(ix, iy)`` with ``ix`` the column; arrays are
indexed ``[iy, ix]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import EmptyAfterFilterError, GeometryMismatchError
from .scene_ingest import RoomCategory, SceneSet

_EXTENT_EPS = 1e-9

DEFAULT_RESOLUTION = 0.05
DEFAULT_FLOOR_BAND = 0.2
DEFAULT_OBSTACLE_BAND = (0.3, 1.8)
DEFAULT_HEIGHT_CUT_FRACTION = 0.85


@dataclass(frozen=True)
class CeilingPolicy:
    """How ceiling points are removed before projection.

    ``by-label`` drops points whose semantic class is "ceiling";
    ``by-height-cut`` drops points above ``floor_z + fraction * (max_z -
    floor_z)``; ``auto`` resolves to by-label when the scene carries labels
    and to by-height-cut otherwise.
    """

    kind: str = "auto"
    fraction: float = DEFAULT_HEIGHT_CUT_FRACTION

    def __post_init__(self):
        if self.kind not in ("auto", "by-label", "by-height-cut"):
            raise ValueError(f"unknown ceiling policy {self.kind!r}")
        if not 0.0 < self.fraction < 1.0:
            raise ValueError("height-cut fraction must be in (0, 1)")

    @classmethod
    def parse(cls, text: str) -> "CeilingPolicy":
        text = text.strip()
        if text.startswith("by-height-cut:"):
            return cls("by-height-cut", float(text.split(":", 1)[1]))
        return cls(text)

    def format(self) -> str:
        if self.kind == "by-height-cut":
            return f"by-height-cut:{self.fraction:g}"
        return self.kind


@dataclass(frozen=True)
class GridGeometry:
    """Placement of a grid in world coordinates; ``(origin_x, origin_y)`` is
    the outer corner of cell ``(0, 0)``."""

    origin_x: float
    origin_y: float
    resolution: float
    width: int
    height: int

    def __post_init__(self):
        if self.resolution <= 0 or self.width < 1 or self.height < 1:
            raise ValueError("invalid grid geometry")

    def world_to_cell(self, x: float, y: float) -> tuple[int, int]:
        return (
            int(math.floor((x - self.origin_x) / self.resolution)),
            int(math.floor((y - self.origin_y) / self.resolution)),
        )

    def cell_center(self, ix: int, iy: int) -> tuple[float, float]:
        return (
            self.origin_x + (ix + 0.5) * self.resolution,
            self.origin_y + (iy + 0.5) * self.resolution,
        )

    def contains_cell(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.width and 0 <= iy < self.height


@dataclass(frozen=True, eq=False)
class TopViewMap:
    """Highest retained point per cell: height (NaN when empty) and color."""

    geometry: GridGeometry
    height: np.ndarray  # (H, W) float64, NaN where unoccupied
    color: np.ndarray  # (H, W, 3) uint8
    floor_z: float
    ceiling: CeilingPolicy  # resolved policy actually applied

    @property
    def occupied(self) -> np.ndarray:
        return ~np.isnan(self.height)


@dataclass(frozen=True, eq=False)
class TraversabilityMap:
    geometry: GridGeometry
    traversable: np.ndarray  # (H, W) bool


@dataclass(frozen=True, eq=False)
class RoomMask:
    """Cells claimed by rooms of the requested categories; a room claims a
    cell when any of its raw points projects into it."""

    geometry: GridGeometry
    room_masks: dict  # room name -> (H, W) bool

    @cached_property
    def mask(self) -> np.ndarray:
        out = np.zeros((self.geometry.height, self.geometry.width), dtype=bool)
        for m in self.room_masks.values():
            out |= m
        out.setflags(write=False)
        return out

    def rooms_at(self, ix: int, iy: int) -> tuple[str, ...]:
        return tuple(
            sorted(n for n, m in self.room_masks.items() if m[iy, ix])
        )


def _gather(scene: SceneSet):
    """Concatenate scene points preserving room-name-then-file order."""
    xyz = np.concatenate([room.xyz for room in scene.rooms])
    labels = np.concatenate(
        [
            room.labels
            if room.labels is not None
            else np.full(len(room), None, dtype=object)
            for room in scene.rooms
        ]
    )
    rgb = np.concatenate([room.rgb for room in scene.rooms])
    return xyz, rgb, labels


def _resolve_policy(policy: CeilingPolicy, labels: np.ndarray) -> CeilingPolicy:
    if policy.kind != "auto":
        return policy
    has_labels = any(l is not None for l in labels)
    kind = "by-label" if has_labels else "by-height-cut"
    return CeilingPolicy(kind, policy.fraction)


def _retained_mask(z, labels, policy: CeilingPolicy, floor_z, max_z) -> np.ndarray:
    if policy.kind == "by-label":
        return np.array([l != "ceiling" for l in labels], dtype=bool)
    cut = floor_z + policy.fraction * (max_z - floor_z)
    return z <= cut


def _validate_resolution(resolution: float) -> None:
    if not 0.005 < resolution <= 1.0:
        raise ValueError(f"resolution {resolution} outside (0.005, 1.0] m")


def build_top_view(
    scene: SceneSet,
    resolution: float = DEFAULT_RESOLUTION,
    ceiling_policy: CeilingPolicy | None = None,
) -> TopViewMap:
    """Project the scene onto a top-view grid.

    Geometry tightly bounds the retained points with one padding cell on each
    side. Ties for the highest point in a cell go to the first point in
    room-name-then-file order.
    """
    _validate_resolution(resolution)
    policy = ceiling_policy or CeilingPolicy()
    xyz, rgb, labels = _gather(scene)
    z = xyz[:, 2]
    floor_z = float(np.percentile(z, 1.0))
    max_z = float(z.max())
    policy = _resolve_policy(policy, labels)
    keep = _retained_mask(z, labels, policy, floor_z, max_z)
    if not keep.any():
        raise EmptyAfterFilterError("ceiling policy removed every point")
    pts = xyz[keep]
    colors = rgb[keep]
    xmin, ymin = pts[:, 0].min(), pts[:, 1].min()
    xmax, ymax = pts[:, 0].max(), pts[:, 1].max()
    ncx = max(1, math.ceil((xmax - xmin) / resolution - _EXTENT_EPS))
    ncy = max(1, math.ceil((ymax - ymin) / resolution - _EXTENT_EPS))
    geometry = GridGeometry(
        origin_x=float(xmin - resolution),
        origin_y=float(ymin - resolution),
        resolution=float(resolution),
        width=ncx + 2,
        height=ncy + 2,
    )
    ix = np.clip(
        np.floor((pts[:, 0] - geometry.origin_x) / resolution).astype(np.int64),
        0,
        geometry.width - 1,
    )
    iy = np.clip(
        np.floor((pts[:, 1] - geometry.origin_y) / resolution).astype(np.int64),
        0,
        geometry.height - 1,
    )
    lin = iy * geometry.width + ix
    # Primary key cell, then height descending, then original order: the
    # first row of each cell group is the winner under the tie rule.
    order = np.lexsort((np.arange(len(lin)), -pts[:, 2], lin))
    lin_sorted = lin[order]
    _, first = np.unique(lin_sorted, return_index=True)
    winners = order[first]
    height = np.full((geometry.height, geometry.width), np.nan, dtype=np.float64)
    color = np.zeros((geometry.height, geometry.width, 3), dtype=np.uint8)
    height.ravel()[lin[winners]] = pts[winners, 2]
    color.reshape(-1, 3)[lin[winners]] = colors[winners]
    for arr in (height, color):
        arr.setflags(write=False)
    return TopViewMap(geometry, height, color, floor_z, policy)


def build_traversability(
    scene: SceneSet,
    geometry: GridGeometry,
    ceiling_policy: CeilingPolicy | None = None,
    floor_band: float = DEFAULT_FLOOR_BAND,
    obstacle_band: tuple[float, float] = DEFAULT_OBSTACLE_BAND,
) -> TraversabilityMap:
    """Two-band rule over the retained points of the paired top view.

    A cell is traversable iff it holds a retained point with ``z <= floor_z +
    floor_band`` and no retained point inside the obstacle band; cells with no
    retained points are obstacles.
    """
    if floor_band <= 0:
        raise ValueError("floor_band must be positive")
    band_lo, band_hi = obstacle_band
    if not band_lo < band_hi:
        raise ValueError("obstacle_band must be an increasing pair")
    policy = ceiling_policy or CeilingPolicy()
    xyz, _, labels = _gather(scene)
    z = xyz[:, 2]
    floor_z = float(np.percentile(z, 1.0))
    max_z = float(z.max())
    policy = _resolve_policy(policy, labels)
    keep = _retained_mask(z, labels, policy, floor_z, max_z)
    if not keep.any():
        raise EmptyAfterFilterError("ceiling policy removed every point")
    pts = xyz[keep]
    res = geometry.resolution
    ix = np.floor((pts[:, 0] - geometry.origin_x) / res).astype(np.int64)
    iy = np.floor((pts[:, 1] - geometry.origin_y) / res).astype(np.int64)
    inside = (ix >= 0) & (ix < geometry.width) & (iy >= 0) & (iy < geometry.height)
    if not inside.all():
        raise GeometryMismatchError(
            "retained points fall outside the provided geometry"
        )
    lin = iy * geometry.width + ix
    ncell = geometry.width * geometry.height
    zk = pts[:, 2]
    has_floor = np.bincount(lin[zk <= floor_z + floor_band], minlength=ncell) > 0
    blocked = (zk >= floor_z + band_lo) & (zk <= floor_z + band_hi)
    has_block = np.bincount(lin[blocked], minlength=ncell) > 0
    trav = (has_floor & ~has_block).reshape(geometry.height, geometry.width)
    trav.setflags(write=False)
    return TraversabilityMap(geometry, trav)


def build_room_mask(scene: SceneSet, geometry: GridGeometry, categories) -> RoomMask:
    """Cells claimed by rooms whose category is in ``categories``; claims use
    the raw (unfiltered) room points, so walls and ceilings count."""
    cats = {RoomCategory(c) for c in categories}
    if not cats:
        raise ValueError("categories must be non-empty")
    res = geometry.resolution
    masks = {}
    for room in scene.rooms:
        if room.category not in cats:
            continue
        ix = np.floor((room.xyz[:, 0] - geometry.origin_x) / res).astype(np.int64)
        iy = np.floor((room.xyz[:, 1] - geometry.origin_y) / res).astype(np.int64)
        inside = (ix >= 0) & (ix < geometry.width) & (iy >= 0) & (iy < geometry.height)
        m = np.zeros((geometry.height, geometry.width), dtype=bool)
        m[iy[inside], ix[inside]] = True
        m.setflags(write=False)
        masks[room.name] = m
    return RoomMask(geometry, masks)


# grid export


def write_traversability_pgm(tra: TraversabilityMap, path) -> None:
    """Binary PGM (P5): 255 traversable, 0 obstacle; sidecar written beside
    it with the geometry fields."""
    from pathlib import Path

    path = Path(path)
    data = np.where(tra.traversable, 255, 0).astype(np.uint8)
    with path.open("wb") as fh:
        fh.write(f"P5\n{tra.geometry.width} {tra.geometry.height}\n255\n".encode())
        fh.write(data.tobytes())
    write_geometry_sidecar(tra.geometry, path.with_suffix(".meta"))


def read_traversability_pgm(path) -> TraversabilityMap:
    from pathlib import Path

    path = Path(path)
    blob = path.read_bytes()
    if not blob.startswith(b"P5\n"):
        raise ValueError(f"{path}: not a binary PGM")
    rest = blob[3:]
    header, _, payload = rest.partition(b"\n255\n")
    w, h = (int(tok) for tok in header.split())
    data = np.frombuffer(payload[: w * h], dtype=np.uint8).reshape(h, w)
    geom = read_geometry_sidecar(path.with_suffix(".meta"))
    if (geom.width, geom.height) != (w, h):
        raise GeometryMismatchError(f"{path}: sidecar disagrees with PGM size")
    return TraversabilityMap(geom, data == 255)


def write_geometry_sidecar(geometry: GridGeometry, path) -> None:
    from pathlib import Path

    lines = [
        f"origin_x={geometry.origin_x!r}",
        f"origin_y={geometry.origin_y!r}",
        f"resolution={geometry.resolution!r}",
        f"width={geometry.width}",
        f"height={geometry.height}",
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_geometry_sidecar(path) -> GridGeometry:
    from pathlib import Path

    fields = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            key, _, value = line.partition("=")
            fields[key.strip()] = value.strip()
    return GridGeometry(
        origin_x=float(fields["origin_x"]),
        origin_y=float(fields["origin_y"]),
        resolution=float(fields["resolution"]),
        width=int(fields["width"]),
        height=int(fields["height"]),
    )
