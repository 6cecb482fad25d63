"""Kernel dispatch: compiled extension when available, pure Python otherwise.

Set ``PANAV_NO_NATIVE=1`` to force the Python lane. Both lanes are
bit-identical by construction; the tests hold them to that.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py
from ._kernels_py import NEIGHBOR_ORDER, SQRT2  # noqa: F401  (shared constants)

if os.environ.get("PANAV_NO_NATIVE"):
    _native = None
else:
    try:
        from . import _native  # type: ignore[attr-defined]
    except ImportError:
        _native = None

NATIVE_AVAILABLE = _native is not None


def active_lane() -> str:
    return "native" if NATIVE_AVAILABLE else "python"


def astar_grid(trav: np.ndarray, start, goal):
    """See :func:`panav._kernels_py.astar_grid`."""
    grid = np.ascontiguousarray(trav, dtype=np.uint8)
    sx, sy = int(start[0]), int(start[1])
    gx, gy = int(goal[0]), int(goal[1])
    if _native is not None:
        return _native.astar_grid(grid, sx, sy, gx, gy)
    return _kernels_py.astar_grid(grid, (sx, sy), (gx, gy))


def fmm_field(trav: np.ndarray, sources) -> np.ndarray:
    """See :func:`panav._kernels_py.fmm_field`."""
    grid = np.ascontiguousarray(trav, dtype=np.uint8)
    src = np.ascontiguousarray(sources, dtype=np.int32).reshape(-1, 2)
    if _native is not None:
        return _native.fmm_field(grid, src)
    return _kernels_py.fmm_field(grid, src)
