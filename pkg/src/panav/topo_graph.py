"""Room-level topological graph built from inter-room point distances.

Rooms become nodes; an edge appears when two rooms come within an adjacency
threshold of each other in 3D and at least one of them is a hallway. Node
centers are snapped to traversable cells so downstream metric planning can
start from them.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    MalformedSceneError,
    NoTraversableCenterError,
    UnknownRoomError,
)
from .grid_maps import GridGeometry, TraversabilityMap
from .scene_ingest import RoomCategory, SceneSet

GRAPH_MAGIC = "PANAV-GRAPH v1"

DEFAULT_ADJACENCY_THRESHOLD = 0.5
_CENTER_SEARCH_MARGIN = 1.0


@dataclass(frozen=True)
class TopoNode:
    name: str
    category: RoomCategory
    cell: tuple[int, int]  # (ix, iy) on the traversability grid
    center_xy: tuple[float, float]  # world coords of the snapped cell center


@dataclass(frozen=True)
class TopoEdge:
    a: str
    b: str
    length: float  # Euclidean distance between node centers, m
    clearance: float  # minimum inter-room 3D point distance, m


@dataclass(frozen=True, eq=False)
class TopoGraph:
    nodes: tuple[TopoNode, ...]
    edges: tuple[TopoEdge, ...]

    def __post_init__(self):
        names = [n.name for n in self.nodes]
        if len(set(names)) != len(names):
            raise ValueError("duplicate node names")
        known = set(names)
        for e in self.edges:
            if e.a not in known or e.b not in known:
                raise ValueError(f"edge {e.a}-{e.b} references unknown node")

    def node(self, name: str) -> TopoNode:
        for n in self.nodes:
            if n.name == name:
                return n
        raise UnknownRoomError(f"unknown room {name!r}")

    def has_node(self, name: str) -> bool:
        return any(n.name == name for n in self.nodes)

    def neighbors(self, name: str) -> tuple[str, ...]:
        out = set()
        for e in self.edges:
            if e.a == name:
                out.add(e.b)
            elif e.b == name:
                out.add(e.a)
        return tuple(sorted(out))

    def edge(self, a: str, b: str) -> TopoEdge:
        for e in self.edges:
            if {e.a, e.b} == {a, b}:
                return e
        raise KeyError(f"no edge between {a!r} and {b!r}")

    def has_edge(self, a: str, b: str) -> bool:
        return any({e.a, e.b} == {a, b} for e in self.edges)


def min_room_distance(room_a, room_b) -> float:
    """Minimum 3D point-pair distance between two rooms.

    A KD-tree picks the closest pair; the value returned is recomputed from
    that pair's coordinates.
    """
    small, large = room_a.xyz, room_b.xyz
    if len(large) < len(small):
        small, large = large, small
    tree = cKDTree(large)
    dists, idx = tree.query(small, k=1)
    j = int(np.argmin(dists))
    p, q = small[j], large[int(idx[j])]
    return float(np.sqrt(((p - q) ** 2).sum()))


def _snap_center(room, tra: TraversabilityMap) -> tuple[int, int]:
    """Traversable cell nearest the room's xy centroid, searched inside the
    room's bounding box grown by a fixed margin."""
    geom = tra.geometry
    cx = float(room.xyz[:, 0].mean())
    cy = float(room.xyz[:, 1].mean())
    xmin, ymin = room.xyz[:, :2].min(axis=0) - _CENTER_SEARCH_MARGIN
    xmax, ymax = room.xyz[:, :2].max(axis=0) + _CENTER_SEARCH_MARGIN
    ix0, iy0 = geom.world_to_cell(xmin, ymin)
    ix1, iy1 = geom.world_to_cell(xmax, ymax)
    ix0, iy0 = max(ix0, 0), max(iy0, 0)
    ix1 = min(ix1, geom.width - 1)
    iy1 = min(iy1, geom.height - 1)
    if ix0 > ix1 or iy0 > iy1:
        raise NoTraversableCenterError(room.name)
    window = tra.traversable[iy0 : iy1 + 1, ix0 : ix1 + 1]
    if not window.any():
        raise NoTraversableCenterError(room.name)
    ys, xs = np.nonzero(window)
    wx = geom.origin_x + (xs + ix0 + 0.5) * geom.resolution
    wy = geom.origin_y + (ys + iy0 + 0.5) * geom.resolution
    d2 = (wx - cx) ** 2 + (wy - cy) ** 2
    best = int(np.argmin(d2))  # ties: first in row-major window order
    return (int(xs[best] + ix0), int(ys[best] + iy0))


def build_topology(
    scene: SceneSet,
    tra: TraversabilityMap,
    adjacency_threshold: float = DEFAULT_ADJACENCY_THRESHOLD,
) -> TopoGraph:
    """Build the room graph for a scene.

    Edges require at least one hallway endpoint; hallway-hallway edges are
    allowed. Edge length is the center-to-center Euclidean distance and
    clearance the minimum inter-room point distance.
    """
    if adjacency_threshold <= 0:
        raise ValueError("adjacency_threshold must be positive")
    nodes = []
    for room in scene.rooms:
        cell = _snap_center(room, tra)
        wx, wy = tra.geometry.cell_center(*cell)
        nodes.append(TopoNode(room.name, room.category, cell, (wx, wy)))
    by_name = {n.name: n for n in nodes}
    edges = []
    rooms = list(scene.rooms)
    for i in range(len(rooms)):
        for j in range(i + 1, len(rooms)):
            a, b = rooms[i], rooms[j]
            hall = RoomCategory.HALLWAY
            if a.category != hall and b.category != hall:
                continue
            clearance = min_room_distance(a, b)
            if clearance > adjacency_threshold:
                continue
            ca = np.array(by_name[a.name].center_xy)
            cb = np.array(by_name[b.name].center_xy)
            length = float(np.sqrt(((ca - cb) ** 2).sum()))
            edges.append(TopoEdge(a.name, b.name, length, clearance))
    return TopoGraph(tuple(nodes), tuple(edges))


def write_graph_file(graph: TopoGraph, path) -> None:
    lines = [GRAPH_MAGIC]
    for n in graph.nodes:
        lines.append(
            f"NODE {n.name} {n.category.value} {n.cell[0]} {n.cell[1]} "
            f"{n.center_xy[0]!r} {n.center_xy[1]!r}"
        )
    for e in graph.edges:
        lines.append(f"EDGE {e.a} {e.b} {e.length!r} {e.clearance!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def parse_graph_file(path) -> TopoGraph:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != GRAPH_MAGIC:
        raise MalformedSceneError(f"{path}: missing {GRAPH_MAGIC!r} header")
    nodes, edges = [], []
    for no, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        toks = line.split()
        try:
            if toks[0] == "NODE" and len(toks) == 7:
                nodes.append(
                    TopoNode(
                        toks[1],
                        RoomCategory(toks[2]),
                        (int(toks[3]), int(toks[4])),
                        (float(toks[5]), float(toks[6])),
                    )
                )
            elif toks[0] == "EDGE" and len(toks) == 5:
                edges.append(
                    TopoEdge(toks[1], toks[2], float(toks[3]), float(toks[4]))
                )
            else:
                raise ValueError(f"unrecognized record {toks[0]!r}")
        except (ValueError, IndexError) as exc:
            raise MalformedSceneError(f"{path}:{no}: {exc}") from exc
    return TopoGraph(tuple(nodes), tuple(edges))
