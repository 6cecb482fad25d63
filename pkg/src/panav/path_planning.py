"""Route enumeration on the room graph and metric realization on the grid.

Candidate routes are simple paths from start to goal, filtered down to
hallway-routed ones, ranked by topological length, capped at k, then realized
as grid paths by chaining A* segments between consecutive node centers.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import (
    MalformedSceneError,
    NotTraversableError,
    SegmentUnreachableError,
    UnknownRoomError,
    UnreachableError,
)
from .grid_maps import TraversabilityMap
from .kernels import SQRT2, astar_grid
from .scene_ingest import RoomCategory
from .topo_graph import TopoGraph

PATHS_MAGIC = "PANAV-PATHS v1"

DEFAULT_K = 5


@dataclass(frozen=True)
class TopologicalPath:
    path_id: int
    nodes: tuple[str, ...]
    topo_length: float  # sum of edge lengths, m


@dataclass(frozen=True, eq=False)
class MetricPath:
    path_id: int
    nodes: tuple[str, ...]
    cells: np.ndarray  # (n, 2) int32 (ix, iy), start to goal
    cell_length: float  # step costs in cell units
    world_length: float  # cell_length * resolution, m

    def __post_init__(self):
        self.cells.setflags(write=False)


def enumerate_simple_paths(graph: TopoGraph, start: str, goal: str):
    """All simple start-to-goal paths, in lexicographic node-name order."""
    for name in (start, goal):
        if not graph.has_node(name):
            raise UnknownRoomError(f"unknown room {name!r}")
    out = []
    on_path = {start}
    trail = [start]

    def walk(node):
        if node == goal:
            out.append(tuple(trail))
            return
        for nxt in graph.neighbors(node):  # sorted, hence lex output order
            if nxt in on_path:
                continue
            on_path.add(nxt)
            trail.append(nxt)
            walk(nxt)
            trail.pop()
            on_path.remove(nxt)

    walk(start)
    return out


def _topo_length(graph: TopoGraph, nodes) -> float:
    total = 0.0
    for a, b in zip(nodes, nodes[1:]):
        total += graph.edge(a, b).length
    return total


def filter_candidates(graph: TopoGraph, paths, k: int = DEFAULT_K):
    """Reduce enumerated routes to ranked candidates.

    Keeps paths whose intermediate nodes are all hallways, drops any whose
    node set strictly contains another kept path's node set (detours around a
    shorter route), then ranks by (topo_length, node names) and caps at k.
    Path ids are assigned 0..n-1 in rank order. Idempotent.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    routed = []
    for nodes in paths:
        nodes = tuple(nodes)
        if all(
            graph.node(n).category == RoomCategory.HALLWAY for n in nodes[1:-1]
        ):
            routed.append(nodes)
    sets = [set(n) for n in routed]
    kept = []
    for i, nodes in enumerate(routed):
        dominated = any(
            j != i and sets[j] < sets[i] for j in range(len(routed))
        )
        if not dominated:
            kept.append(nodes)
    kept.sort(key=lambda nodes: (_topo_length(graph, nodes), nodes))
    return [
        TopologicalPath(i, nodes, _topo_length(graph, nodes))
        for i, nodes in enumerate(kept[:k])
    ]


def astar(tra: TraversabilityMap, start, goal):
    """A* between two cells; returns (cells, ns, nd).

    Raises NotTraversable for invalid endpoints and Unreachable when no path
    exists.
    """
    geom = tra.geometry
    for cell in (start, goal):
        ix, iy = int(cell[0]), int(cell[1])
        if not geom.contains_cell(ix, iy) or not tra.traversable[iy, ix]:
            raise NotTraversableError(f"cell ({ix}, {iy}) is not traversable")
    result = astar_grid(tra.traversable, start, goal)
    if result is None:
        raise UnreachableError(f"no grid path from {tuple(start)} to {tuple(goal)}")
    return result


def realize_metric_path(
    topo: TopologicalPath, graph: TopoGraph, tra: TraversabilityMap
) -> MetricPath:
    """Chain A* segments between consecutive node centers.

    Junction cells are kept once: each later segment contributes everything
    but its first cell.
    """
    pieces = []
    ns_total = 0
    nd_total = 0
    for a, b in zip(topo.nodes, topo.nodes[1:]):
        ca = graph.node(a).cell
        cb = graph.node(b).cell
        try:
            cells, ns, nd = astar(tra, ca, cb)
        except (NotTraversableError, UnreachableError) as exc:
            raise SegmentUnreachableError(a, b) from exc
        ns_total += ns
        nd_total += nd
        pieces.append(cells if not pieces else cells[1:])
    cells = np.concatenate(pieces) if pieces else np.empty((0, 2), dtype=np.int32)
    cell_length = ns_total + nd_total * SQRT2
    return MetricPath(
        path_id=topo.path_id,
        nodes=topo.nodes,
        cells=np.ascontiguousarray(cells, dtype=np.int32),
        cell_length=float(cell_length),
        world_length=float(cell_length * tra.geometry.resolution),
    )


def recompute_cell_length(cells: np.ndarray) -> float:
    """Per-step cost sum of a cell sequence, for cross-checks."""
    ns = 0
    nd = 0
    for (x0, y0), (x1, y1) in zip(cells[:-1], cells[1:]):
        dx = abs(int(x1) - int(x0))
        dy = abs(int(y1) - int(y0))
        if dx > 1 or dy > 1 or (dx == 0 and dy == 0):
            raise ValueError("cells are not an 8-adjacent step sequence")
        if dx == 1 and dy == 1:
            nd += 1
        else:
            ns += 1
    return ns + nd * SQRT2


def inflate_obstacles(tra: TraversabilityMap, radius_cells: float) -> TraversabilityMap:
    """Shrink the traversable region by a safety margin of ``radius_cells``.

    Cells within that Euclidean distance of an obstacle become obstacles;
    radius 0 returns the map unchanged.
    """
    if radius_cells < 0:
        raise ValueError("radius_cells must be >= 0")
    if radius_cells == 0:
        return tra
    dist = ndimage.distance_transform_edt(tra.traversable)
    shrunk = tra.traversable & (dist > radius_cells)
    shrunk.setflags(write=False)
    return TraversabilityMap(tra.geometry, shrunk)


# path export


def write_paths_file(paths, path, include_cells: bool = False) -> None:
    """One PATH record per metric path; CELLS lines are optional."""
    lines = [PATHS_MAGIC]
    for p in paths:
        lines.append(
            f"PATH {p.path_id} {'>'.join(p.nodes)} {len(p.cells)} "
            f"{p.cell_length!r} {p.world_length!r}"
        )
        if include_cells:
            pairs = " ".join(f"{int(x)},{int(y)}" for x, y in p.cells)
            lines.append(f"CELLS {p.path_id} {pairs}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def parse_paths_file(path):
    """Inverse of write_paths_file; paths without CELLS get empty cells."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != PATHS_MAGIC:
        raise MalformedSceneError(f"{path}: missing {PATHS_MAGIC!r} header")
    records = {}
    order = []
    cells_by_id = {}
    for no, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        toks = line.split()
        try:
            if toks[0] == "PATH" and len(toks) == 6:
                pid = int(toks[1])
                records[pid] = (
                    tuple(toks[2].split(">")),
                    int(toks[3]),
                    float(toks[4]),
                    float(toks[5]),
                )
                order.append(pid)
            elif toks[0] == "CELLS" and len(toks) >= 2:
                pid = int(toks[1])
                cells = [
                    (int(p.split(",")[0]), int(p.split(",")[1]))
                    for p in toks[2:]
                ]
                cells_by_id[pid] = cells
            else:
                raise ValueError(f"unrecognized record {toks[0]!r}")
        except (ValueError, IndexError) as exc:
            raise MalformedSceneError(f"{path}:{no}: {exc}") from exc
    out = []
    for pid in order:
        nodes, count, cell_length, world_length = records[pid]
        cells = np.array(
            cells_by_id.get(pid, []), dtype=np.int32
        ).reshape(-1, 2)
        if pid in cells_by_id and len(cells) != count:
            raise MalformedSceneError(
                f"{path}: path {pid} cell count disagrees with CELLS record"
            )
        out.append(MetricPath(pid, nodes, cells, cell_length, world_length))
    return out
