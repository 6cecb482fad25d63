# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled planning kernels.

Mirrors panav._kernels_py operation for operation; the two must stay
bit-identical. Neighbor order, heap key comparisons, and every floating-point
expression are kept in the same shape as the Python lane (the build also
disables FP contraction so no fused multiply-adds sneak in).
"""

from libc.math cimport INFINITY, sqrt

import numpy as np


cdef double SQRT2 = sqrt(2.0)

# orthogonal moves first, then diagonals; same order as the Python lane
cdef int[8] DX
cdef int[8] DY
DX[0] = 1; DX[1] = -1; DX[2] = 0; DX[3] = 0
DX[4] = 1; DX[5] = 1; DX[6] = -1; DX[7] = -1
DY[0] = 0; DY[1] = 0; DY[2] = 1; DY[3] = -1
DY[4] = 1; DY[5] = -1; DY[6] = 1; DY[7] = -1


cdef inline bint _less(double fa, double ha, Py_ssize_t ia,
                       double fb, double hb, Py_ssize_t ib) noexcept:
    if fa != fb:
        return fa < fb
    if ha != hb:
        return ha < hb
    return ia < ib


cdef class _Heap:
    """Binary min-heap over (f, h, idx) keys; keys are always distinct, so
    pop order equals full sorted order."""

    cdef double[::1] f
    cdef double[::1] h
    cdef Py_ssize_t[::1] idx
    cdef object _f_arr
    cdef object _h_arr
    cdef object _i_arr
    cdef Py_ssize_t size

    def __cinit__(self, Py_ssize_t capacity):
        if capacity < 16:
            capacity = 16
        self._f_arr = np.empty(capacity, dtype=np.float64)
        self._h_arr = np.empty(capacity, dtype=np.float64)
        self._i_arr = np.empty(capacity, dtype=np.intp)
        self.f = self._f_arr
        self.h = self._h_arr
        self.idx = self._i_arr
        self.size = 0

    cdef void _grow(self):
        cdef Py_ssize_t cap = self.f.shape[0] * 2
        f2 = np.empty(cap, dtype=np.float64)
        h2 = np.empty(cap, dtype=np.float64)
        i2 = np.empty(cap, dtype=np.intp)
        f2[: self.size] = self._f_arr[: self.size]
        h2[: self.size] = self._h_arr[: self.size]
        i2[: self.size] = self._i_arr[: self.size]
        self._f_arr = f2
        self._h_arr = h2
        self._i_arr = i2
        self.f = f2
        self.h = h2
        self.idx = i2

    cdef void push(self, double f, double h, Py_ssize_t idx):
        cdef Py_ssize_t pos, up
        if self.size == self.f.shape[0]:
            self._grow()
        pos = self.size
        self.size += 1
        self.f[pos] = f
        self.h[pos] = h
        self.idx[pos] = idx
        while pos > 0:
            up = (pos - 1) >> 1
            if _less(self.f[pos], self.h[pos], self.idx[pos],
                     self.f[up], self.h[up], self.idx[up]):
                self.f[pos], self.f[up] = self.f[up], self.f[pos]
                self.h[pos], self.h[up] = self.h[up], self.h[pos]
                self.idx[pos], self.idx[up] = self.idx[up], self.idx[pos]
                pos = up
            else:
                break

    cdef (double, double, Py_ssize_t) pop(self):
        cdef double rf = self.f[0]
        cdef double rh = self.h[0]
        cdef Py_ssize_t ri = self.idx[0]
        cdef Py_ssize_t pos = 0
        cdef Py_ssize_t child, right
        self.size -= 1
        cdef Py_ssize_t last = self.size
        self.f[0] = self.f[last]
        self.h[0] = self.h[last]
        self.idx[0] = self.idx[last]
        while True:
            child = 2 * pos + 1
            if child >= self.size:
                break
            right = child + 1
            if right < self.size and _less(
                self.f[right], self.h[right], self.idx[right],
                self.f[child], self.h[child], self.idx[child],
            ):
                child = right
            if _less(self.f[child], self.h[child], self.idx[child],
                     self.f[pos], self.h[pos], self.idx[pos]):
                self.f[pos], self.f[child] = self.f[child], self.f[pos]
                self.h[pos], self.h[child] = self.h[child], self.h[pos]
                self.idx[pos], self.idx[child] = self.idx[child], self.idx[pos]
                pos = child
            else:
                break
        return rf, rh, ri


def astar_grid(const unsigned char[:, ::1] trav, int sx, int sy, int gx, int gy):
    """See panav._kernels_py.astar_grid."""
    cdef Py_ssize_t h_ = trav.shape[0]
    cdef Py_ssize_t w = trav.shape[1]
    cdef Py_ssize_t size = h_ * w
    ns_arr = np.zeros(size, dtype=np.int64)
    nd_arr = np.zeros(size, dtype=np.int64)
    g_arr = np.full(size, np.inf, dtype=np.float64)
    parent_arr = np.full(size, -1, dtype=np.intp)
    done_arr = np.zeros(size, dtype=np.uint8)
    cdef long long[::1] ns = ns_arr
    cdef long long[::1] nd = nd_arr
    cdef double[::1] gcost = g_arr
    cdef Py_ssize_t[::1] parent = parent_arr
    cdef unsigned char[::1] done = done_arr
    cdef const unsigned char* grid = &trav[0, 0]

    cdef Py_ssize_t start_idx = sy * w + sx
    cdef Py_ssize_t goal_idx = gy * w + gx
    cdef _Heap heap = _Heap(1024)
    cdef double f, h, g_new, hn, h0
    cdef Py_ssize_t idx, nidx, x, y, nx, ny, k
    cdef long long base_ns, base_nd, cand_ns, cand_nd
    cdef long long dx_, dy_, dmin, dmax
    cdef int dx, dy

    gcost[start_idx] = 0.0
    dx_ = sx - gx
    if dx_ < 0:
        dx_ = -dx_
    dy_ = sy - gy
    if dy_ < 0:
        dy_ = -dy_
    if dx_ < dy_:
        dmin = dx_; dmax = dy_
    else:
        dmin = dy_; dmax = dx_
    h0 = <double>(dmax - dmin) + <double>dmin * SQRT2
    heap.push(h0, h0, start_idx)
    while heap.size > 0:
        f, h, idx = heap.pop()
        if done[idx]:
            continue
        done[idx] = 1
        if idx == goal_idx:
            break
        x = idx % w
        y = idx // w
        base_ns = ns[idx]
        base_nd = nd[idx]
        for k in range(8):
            dx = DX[k]
            dy = DY[k]
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
            g_new = <double>cand_ns + <double>cand_nd * SQRT2
            if g_new < gcost[nidx]:
                gcost[nidx] = g_new
                ns[nidx] = cand_ns
                nd[nidx] = cand_nd
                parent[nidx] = idx
                dx_ = nx - gx
                if dx_ < 0:
                    dx_ = -dx_
                dy_ = ny - gy
                if dy_ < 0:
                    dy_ = -dy_
                if dx_ < dy_:
                    dmin = dx_; dmax = dy_
                else:
                    dmin = dy_; dmax = dx_
                hn = <double>(dmax - dmin) + <double>dmin * SQRT2
                heap.push(g_new + hn, hn, nidx)
    if not done[goal_idx]:
        return None
    cdef Py_ssize_t count = 0
    idx = goal_idx
    while idx != -1:
        count += 1
        idx = parent[idx]
    cells_arr = np.empty((count, 2), dtype=np.int32)
    cdef int[:, ::1] cells = cells_arr
    idx = goal_idx
    cdef Py_ssize_t row = count - 1
    while idx != -1:
        cells[row, 0] = <int>(idx % w)
        cells[row, 1] = <int>(idx // w)
        idx = parent[idx]
        row -= 1
    return cells_arr, int(ns[goal_idx]), int(nd[goal_idx])


def fmm_field(const unsigned char[:, ::1] trav, const int[:, ::1] sources):
    """See panav._kernels_py.fmm_field."""
    cdef Py_ssize_t h_ = trav.shape[0]
    cdef Py_ssize_t w = trav.shape[1]
    cdef Py_ssize_t size = h_ * w
    dist_arr = np.full(size, np.inf, dtype=np.float64)
    settled_arr = np.zeros(size, dtype=np.uint8)
    done_arr = np.zeros(size, dtype=np.uint8)
    cdef double[::1] dist = dist_arr
    cdef unsigned char[::1] settled = settled_arr
    cdef unsigned char[::1] done = done_arr
    cdef const unsigned char* grid = &trav[0, 0]

    cdef Py_ssize_t nsrc = sources.shape[0]
    src_arr = np.empty(nsrc, dtype=np.intp)
    cdef Py_ssize_t[::1] src_idx = src_arr
    cdef Py_ssize_t n_src = 0
    cdef Py_ssize_t k, m, idx, nidx, x, y, nx, ny, j
    cdef int dx, dy
    for k in range(nsrc):
        idx = (<Py_ssize_t>sources[k, 1]) * w + <Py_ssize_t>sources[k, 0]
        if not settled[idx]:
            dist[idx] = 0.0
            settled[idx] = 1
            src_idx[n_src] = idx
            n_src += 1
    for m in range(n_src):
        idx = src_idx[m]
        x = idx % w
        y = idx // w
        for k in range(4):
            dx = DX[k]
            dy = DY[k]
            nx = x + dx
            ny = y + dy
            if nx < 0 or nx >= w or ny < 0 or ny >= h_:
                continue
            nidx = ny * w + nx
            if grid[nidx] and dist[nidx] > 1.0:
                dist[nidx] = 1.0
                settled[nidx] = 1
    for m in range(n_src):
        idx = src_idx[m]
        x = idx % w
        y = idx // w
        for k in range(4, 8):
            dx = DX[k]
            dy = DY[k]
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
    cdef _Heap heap = _Heap(1024)
    for idx in range(size):
        if settled[idx]:
            heap.push(dist[idx], 0.0, idx)
    cdef double d, hdrop, ax, ay, lo, hi, diff, t
    while heap.size > 0:
        d, hdrop, idx = heap.pop()
        if done[idx]:
            continue
        done[idx] = 1
        settled[idx] = 1
        x = idx % w
        y = idx // w
        for k in range(4):
            dx = DX[k]
            dy = DY[k]
            nx = x + dx
            ny = y + dy
            if nx < 0 or nx >= w or ny < 0 or ny >= h_:
                continue
            nidx = ny * w + nx
            if not grid[nidx] or settled[nidx]:
                continue
            # axis minima over settled neighbors only
            ax = INFINITY
            if nx + 1 < w:
                j = nidx + 1
                if settled[j] and dist[j] < ax:
                    ax = dist[j]
            if nx - 1 >= 0:
                j = nidx - 1
                if settled[j] and dist[j] < ax:
                    ax = dist[j]
            ay = INFINITY
            if ny + 1 < h_:
                j = nidx + w
                if settled[j] and dist[j] < ay:
                    ay = dist[j]
            if ny - 1 >= 0:
                j = nidx - w
                if settled[j] and dist[j] < ay:
                    ay = dist[j]
            if ax < ay:
                lo = ax; hi = ay
            else:
                lo = ay; hi = ax
            if lo == INFINITY:
                continue
            if hi == INFINITY:
                t = lo + 1.0
            else:
                diff = hi - lo
                if diff >= 1.0:
                    t = lo + 1.0
                else:
                    t = (lo + hi + sqrt(2.0 - diff * diff)) * 0.5
            if t < dist[nidx]:
                dist[nidx] = t
                heap.push(t, 0.0, nidx)
    return dist_arr.reshape(h_, w)
