"""Pure-Python planning kernels: grid A* and a first-order distance
transform by fast marching.

The compiled extension mirrors these routines operation for operation
(neighbor order, heap keys, arithmetic expression order), so either lane
produces bit-identical outputs. Keep the two in lockstep when editing.
"""

from __future__ import annotations

import math
from heapq import heappop, heappush

import numpy as np

SQRT2 = math.sqrt(2.0)

# Orthogonal moves first, then diagonals; (dx, dy).
NEIGHBOR_ORDER = (
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
)


def astar_grid(trav, start, goal):
    """Shortest 8-connected path between two traversable cells.

    Diagonal steps cost sqrt(2) and are blocked unless both flanking
    orthogonal cells are traversable. Costs are tracked as (straight, diagonal)
    step counts so equal-cost comparisons are exact. Returns ``(cells, ns,
    nd)`` with ``cells`` an int32 (n, 2) array of (ix, iy) from start to goal,
    or None when the goal is unreachable.
    """
    h_, w = trav.shape
    grid = trav.ravel()
    sx, sy = start
    gx, gy = goal
    size = h_ * w
    ns = [0] * size
    nd = [0] * size
    gcost = [math.inf] * size
    parent = [-1] * size
    done = bytearray(size)
    start_idx = sy * w + sx
    goal_idx = gy * w + gx

    def heur(x, y):
        dx = x - gx
        if dx < 0:
            dx = -dx
        dy = y - gy
        if dy < 0:
            dy = -dy
        if dx < dy:
            dmin, dmax = dx, dy
        else:
            dmin, dmax = dy, dx
        return (dmax - dmin) + dmin * SQRT2

    gcost[start_idx] = 0.0
    h0 = heur(sx, sy)
    heap = [(h0, h0, start_idx)]
    while heap:
        f, h, idx = heappop(heap)
        if done[idx]:
            continue
        done[idx] = 1
        if idx == goal_idx:
            break
        x = idx % w
        y = idx // w
        base_ns = ns[idx]
        base_nd = nd[idx]
        for dx, dy in NEIGHBOR_ORDER:
            nx = x + dx
            ny = y + dy
            if nx < 0 or nx >= w or ny < 0 or ny >= h_:
                continue
            nidx = ny * w + nx
            if not grid[nidx] or done[nidx]:
                continue
            if dx != 0 and dy != 0:
                # no corner cutting
                if not grid[y * w + nx] or not grid[ny * w + x]:
                    continue
                cand_ns = base_ns
                cand_nd = base_nd + 1
            else:
                cand_ns = base_ns + 1
                cand_nd = base_nd
            g_new = cand_ns + cand_nd * SQRT2
            if g_new < gcost[nidx]:
                gcost[nidx] = g_new
                ns[nidx] = cand_ns
                nd[nidx] = cand_nd
                parent[nidx] = idx
                hn = heur(nx, ny)
                heappush(heap, (g_new + hn, hn, nidx))
    if not done[goal_idx]:
        return None
    chain = []
    idx = goal_idx
    while idx != -1:
        chain.append(idx)
        idx = parent[idx]
    chain.reverse()
    cells = np.empty((len(chain), 2), dtype=np.int32)
    for i, idx in enumerate(chain):
        cells[i, 0] = idx % w
        cells[i, 1] = idx // w
    return cells, ns[goal_idx], nd[goal_idx]


def fmm_field(trav, sources):
    """First-order fast-marching distance from source cells over a grid.

    Unit speed, grid spacing 1. The one-ring around each source is seeded
    with its exact distance (1 orthogonally, sqrt(2) diagonally when the
    corner is passable) before marching; this keeps near-field values exact
    and tightens the far field. Obstacles and unreachable cells stay +inf.
    Returns a float64 array shaped like ``trav``.
    """
    h_, w = trav.shape
    grid = trav.ravel()
    size = h_ * w
    dist = [math.inf] * size
    settled = bytearray(size)  # value is final: source, seeded ring, or popped
    done = bytearray(size)  # neighbors already relaxed
    heap = []
    src_idx = []
    for k in range(len(sources)):
        sx = int(sources[k][0])
        sy = int(sources[k][1])
        idx = sy * w + sx
        if not settled[idx]:
            dist[idx] = 0.0
            settled[idx] = 1
            src_idx.append(idx)
    for idx in src_idx:
        x = idx % w
        y = idx // w
        for dx, dy in NEIGHBOR_ORDER[:4]:
            nx = x + dx
            ny = y + dy
            if nx < 0 or nx >= w or ny < 0 or ny >= h_:
                continue
            nidx = ny * w + nx
            if grid[nidx] and dist[nidx] > 1.0:
                dist[nidx] = 1.0
                settled[nidx] = 1
    for idx in src_idx:
        x = idx % w
        y = idx // w
        for dx, dy in NEIGHBOR_ORDER[4:]:
            nx = x + dx
            ny = y + dy
            if nx < 0 or nx >= w or ny < 0 or ny >= h_:
                continue
            nidx = ny * w + nx
            if not grid[nidx] or dist[nidx] <= SQRT2:
                continue
            # corner must be passable through one of the shared orthogonals
            if grid[y * w + nx] or grid[ny * w + x]:
                dist[nidx] = SQRT2
                settled[nidx] = 1
    for idx in range(size):
        if settled[idx]:
            heappush(heap, (dist[idx], idx))
    while heap:
        d, idx = heappop(heap)
        if done[idx]:
            continue
        done[idx] = 1
        settled[idx] = 1
        x = idx % w
        y = idx // w
        for dx, dy in NEIGHBOR_ORDER[:4]:
            nx = x + dx
            ny = y + dy
            if nx < 0 or nx >= w or ny < 0 or ny >= h_:
                continue
            nidx = ny * w + nx
            if not grid[nidx] or settled[nidx]:
                continue
            # axis minima over settled neighbors only
            ax = math.inf
            if nx + 1 < w:
                j = nidx + 1
                if settled[j] and dist[j] < ax:
                    ax = dist[j]
            if nx - 1 >= 0:
                j = nidx - 1
                if settled[j] and dist[j] < ax:
                    ax = dist[j]
            ay = math.inf
            if ny + 1 < h_:
                j = nidx + w
                if settled[j] and dist[j] < ay:
                    ay = dist[j]
            if ny - 1 >= 0:
                j = nidx - w
                if settled[j] and dist[j] < ay:
                    ay = dist[j]
            if ax < ay:
                lo, hi = ax, ay
            else:
                lo, hi = ay, ax
            if lo == math.inf:
                continue
            if hi == math.inf:
                t = lo + 1.0
            else:
                diff = hi - lo
                if diff >= 1.0:
                    t = lo + 1.0
                else:
                    t = (lo + hi + math.sqrt(2.0 - diff * diff)) * 0.5
            if t < dist[nidx]:
                dist[nidx] = t
                heappush(heap, (t, nidx))
    out = np.array(dist, dtype=np.float64).reshape(h_, w)
    return out
