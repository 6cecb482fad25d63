"""Raster rendering: top-view images, field heatmaps, path overlays.

Everything here is presentational; data interchange goes through the PGM and
binary raster writers in the grid and field modules. All outputs are
deterministic functions of their inputs so exported figures can be compared
byte for byte.

PNG images are rendered north-up: world +y is the upward image direction,
so image row 0 shows the top of the scene. The PGM/raster writers keep plain
row-major grid order instead.
"""

from __future__ import annotations

import io

import numpy as np
from PIL import Image, ImageDraw, ImageFont

from .errors import GeometryMismatchError

# 16 evenly spaced samples of a perceptually uniform dark-to-bright ramp.
_RAMP = np.array(
    [
        (68, 1, 84),
        (72, 26, 108),
        (71, 47, 125),
        (65, 68, 135),
        (57, 86, 140),
        (49, 104, 142),
        (42, 120, 142),
        (35, 136, 142),
        (31, 152, 139),
        (34, 168, 132),
        (53, 183, 121),
        (84, 197, 104),
        (122, 209, 81),
        (165, 219, 54),
        (210, 226, 27),
        (253, 231, 37),
    ],
    dtype=np.float64,
)

_INVALID_RGB = (0, 0, 0)
PATH_RGB = (255, 0, 0)


def colormap_rgb(values01: np.ndarray) -> np.ndarray:
    """Map values in [0, 1] through the ramp; out-of-range values clip."""
    v = np.clip(np.asarray(values01, dtype=np.float64), 0.0, 1.0)
    pos = v * (len(_RAMP) - 1)
    lo = np.floor(pos).astype(np.int64)
    hi = np.minimum(lo + 1, len(_RAMP) - 1)
    frac = (pos - lo)[..., None]
    rgb = _RAMP[lo] * (1.0 - frac) + _RAMP[hi] * frac
    return np.clip(np.rint(rgb), 0, 255).astype(np.uint8)


def array_to_png_bytes(rgb: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(rgb, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def heatmap_png(values: np.ndarray, vmin=None, vmax=None, scale: int = 1) -> bytes:
    """Field raster as a PNG heatmap; non-finite cells render black."""
    vals = np.asarray(values, dtype=np.float64)
    finite = np.isfinite(vals)
    if vmin is None:
        vmin = float(vals[finite].min()) if finite.any() else 0.0
    if vmax is None:
        vmax = float(vals[finite].max()) if finite.any() else 1.0
    span = vmax - vmin
    if span <= 0:
        span = 1.0
    norm = np.zeros_like(vals)
    norm[finite] = (vals[finite] - vmin) / span
    rgb = colormap_rgb(norm)
    rgb[~finite] = _INVALID_RGB
    rgb = rgb[::-1]  # north up
    if scale > 1:
        rgb = rgb.repeat(scale, axis=0).repeat(scale, axis=1)
    return array_to_png_bytes(np.ascontiguousarray(rgb))


def top_view_rgb(top, scale: int = 1) -> np.ndarray:
    """Top-view colors as an upscaled north-up RGB array; empty cells black."""
    rgb = top.color.copy()
    rgb[~top.occupied] = _INVALID_RGB
    rgb = rgb[::-1]
    if scale > 1:
        rgb = rgb.repeat(scale, axis=0).repeat(scale, axis=1)
    return np.ascontiguousarray(rgb)


def _cell_to_pixel(ix: int, iy: int, grid_h: int, scale: int) -> tuple[int, int]:
    px = ix * scale + scale // 2
    py = (grid_h - 1 - iy) * scale + scale // 2
    return px, py


def path_overlay_png(
    top,
    cells,
    scale: int = 4,
    stroke: int | None = None,
    label: str | None = None,
) -> bytes:
    """Top view with a path polyline in pure red and an optional corner label.

    ``cells`` is a sequence of (ix, iy) grid cells inside the top view's
    geometry.
    """
    geom = top.geometry
    cells = np.asarray(cells, dtype=np.int64).reshape(-1, 2)
    if len(cells) and (
        cells[:, 0].min() < 0
        or cells[:, 0].max() >= geom.width
        or cells[:, 1].min() < 0
        or cells[:, 1].max() >= geom.height
    ):
        raise GeometryMismatchError("path cells leave the rendered grid")
    if scale < 1:
        raise ValueError("scale must be >= 1")
    if stroke is None:
        stroke = max(1, scale // 2)
    img = Image.fromarray(top_view_rgb(top, scale), mode="RGB")
    draw = ImageDraw.Draw(img)
    pts = [
        _cell_to_pixel(int(x), int(y), geom.height, scale) for x, y in cells
    ]
    if len(pts) == 1:
        x, y = pts[0]
        r = max(1, stroke)
        draw.ellipse((x - r, y - r, x + r, y + r), fill=PATH_RGB)
    elif pts:
        draw.line(pts, fill=PATH_RGB, width=stroke, joint="curve")
    if label:
        font = ImageFont.load_default()
        pad = 2
        box = draw.textbbox((pad, pad), label, font=font)
        draw.rectangle(
            (0, 0, box[2] + pad, box[3] + pad), fill=(255, 255, 255)
        )
        draw.text((pad, pad), label, fill=(0, 0, 0), font=font)
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()
